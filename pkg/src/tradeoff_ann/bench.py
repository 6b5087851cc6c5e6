"""End-to-end benchmark loop and exponent fitting.

A report is structured text: ``[section]`` headers followed by
``key = value`` lines, with per-n series as CSV under ``[series]``.
Everything except the ``[timing]`` section is a pure function of the
configuration (including its seed).
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dd_tree, filter_tree
from .instances import gen_clustered, gen_hamming, gen_sphere
from .reductions import hamming_to_sphere
from .solver import curve_point, solve_thresholds

REPORT_VERSION = 1


@dataclass
class BenchConfig:
    structure: str = "di"  # "di" or "dd"
    kind: str = "sphere"  # "sphere", "hamming" or "clustered"
    n: int = 4096
    d: int = 128
    c: float = 2.0
    queries: int = 200
    seed: int = 0
    regime: str = "balanced"  # "balanced", "rho_q" or "rho_u"
    rho: float = 0.0  # value of the fixed exponent for the rho_q / rho_u regimes
    K: int | None = 3
    success_const: float = 3.0
    series: tuple = ()  # extra n values for an exponent fit (di only)
    clusters: int = 4
    radius_factor: float = 1.0
    eps: float = 0.15
    delta: float = 0.005
    cluster_tau: float = 0.02
    planted: bool = True  # also measure planted-neighbour reachability

    def __post_init__(self):
        if self.structure not in ("di", "dd"):
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.kind not in ("sphere", "hamming", "clustered"):
            raise ValueError(f"unknown instance kind {self.kind!r}")
        if self.regime not in ("balanced", "rho_q", "rho_u"):
            raise ValueError(f"unknown regime {self.regime!r}")


@dataclass
class BenchReport:
    config: dict
    recall: float
    planted_recall: float | None
    nodes_mean: float
    nodes_median: float
    scanned_mean: float
    scanned_median: float
    stored: int
    params: dict
    series: list = field(default_factory=list)  # (n, mean scanned, stored)
    fit: tuple | None = None
    timing: dict = field(default_factory=dict)

    def to_text(self, timing: bool = True) -> str:
        lines = [f"# tradeoff-ann bench report v{REPORT_VERSION}", "[config]"]
        lines += [f"{k} = {_fmt(v)}" for k, v in sorted(self.config.items())]
        lines.append("[params]")
        lines += [f"{k} = {_fmt(v)}" for k, v in sorted(self.params.items())]
        lines.append("[result]")
        for k in ("recall", "planted_recall", "nodes_mean", "nodes_median",
                  "scanned_mean", "scanned_median", "stored"):
            lines.append(f"{k} = {_fmt(getattr(self, k))}")
        if self.series:
            lines.append("[series]")
            lines.append("n,scanned_mean,stored")
            lines += [f"{n},{_fmt(s)},{st}" for n, s, st in self.series]
            if self.fit is not None:
                lines.append(f"# slope = {_fmt(self.fit[0])}, r_squared = {_fmt(self.fit[1])}")
        if timing:
            lines.append("[timing]")
            lines += [f"{k} = {v:.3f}" for k, v in sorted(self.timing.items())]
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(round(v, 12))
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def fit_exponent(series) -> tuple[float, float]:
    """Least-squares slope of log(work) against log(n), and its r^2."""
    s = [(float(n), float(w)) for n, w in series]
    if len(s) < 3:
        raise ValueError("need at least 3 points to fit an exponent")
    ns = np.array([n for n, _ in s])
    ws = np.array([w for _, w in s])
    if np.any(np.diff(ns) <= 0):
        raise ValueError("series n values must be strictly increasing")
    if np.any(ws <= 0) or np.any(ns <= 0):
        raise ValueError("series values must be positive")
    x, y = np.log(ns), np.log(ws)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / tot
    return float(slope), r2


def _instance(cfg: BenchConfig, n: int):
    if cfg.kind == "sphere":
        return gen_sphere(n, cfg.d, cfg.c, cfg.queries, cfg.seed)
    if cfg.kind == "hamming":
        return gen_hamming(n, cfg.d, cfg.c, cfg.queries, cfg.seed)
    return gen_clustered(n, cfg.d, cfg.c, cfg.clusters, cfg.radius_factor, cfg.seed,
                         q_count=cfg.queries)


def _sphere_geometry(cfg: BenchConfig):
    """(c, r) of the instance after mapping onto the unit sphere."""
    if cfg.kind == "hamming":
        # Ham = d/(2c) -> 2 sqrt(1/(2c)); Ham = d/2 -> sqrt(2)
        return math.sqrt(cfg.c), math.sqrt(2.0 / cfg.c)
    return cfg.c, math.sqrt(2.0) / cfg.c


def _point(cfg: BenchConfig):
    c, r = _sphere_geometry(cfg)
    if cfg.regime == "balanced":
        return curve_point(c, r, which="balanced")
    if cfg.regime == "rho_q":
        return curve_point(c, r, rho_q=cfg.rho)
    return curve_point(c, r, rho_u=cfg.rho)


def _within(truth, P, Q, j, i) -> bool:
    if truth.space_tag == "hamming":
        return int(np.count_nonzero(P.data[i] != Q.data[j])) <= truth.cr
    return float(np.linalg.norm(P.data[i] - Q.data[j])) <= truth.cr * (1 + 1e-12)


def _run_one(cfg: BenchConfig, n: int, exhaustive: bool):
    P, Q, truth = _instance(cfg, n)
    Ps, Qs = (hamming_to_sphere(P), hamming_to_sphere(Q)) if P.space == "hamming" else (P, Q)
    c, r = _sphere_geometry(cfg)
    timing = {}
    t0 = time.perf_counter()
    if cfg.structure == "di":
        pt = solve_thresholds(_point(cfg), n, cfg.K, cfg.success_const)
        tree = filter_tree.build(Ps, pt, cfg.seed)
        stored = tree.stored_points
        params = {k: v for k, v in asdict(pt).items()}
    else:
        base = _point(cfg)
        prm = dd_tree.DDParams(eps=cfg.eps, delta=cfg.delta, cluster_tau=cfg.cluster_tau,
                               K=cfg.K, rho_q=base.rho_q, rho_u=base.rho_u,
                               success_const=cfg.success_const)
        tree = dd_tree.dd_build(Ps, c, r, prm, cfg.seed)
        stored = None
        params = asdict(prm)
    timing["build_seconds"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    hits, planted, nodes, scanned = 0, 0, [], []
    for j, i in truth.planted_pairs:
        q = Qs.data[j]
        if cfg.structure == "di":
            # far distance is sqrt(2) on the sphere for every instance kind
            found, st = filter_tree.query(tree, q, math.sqrt(2.0), stop_at_first=not exhaustive)
            if cfg.planted:
                planted += filter_tree.reaches(tree, q, i)
        else:
            found, st = dd_tree.dd_query(tree, q, c, r)
            if cfg.planted:
                planted += dd_tree.dd_reaches(tree, q, i)
        if found is not None and _within(truth, P, Q, j, found):
            hits += 1
        nodes.append(st.nodes_visited)
        scanned.append(st.points_scanned)
    timing["query_seconds"] = time.perf_counter() - t0
    if stored is None:
        stored = dd_tree.node_counts(tree)["stored"]
    m = len(truth.planted_pairs)
    return dict(recall=hits / m, planted_recall=(planted / m if cfg.planted else None),
                nodes=nodes, scanned=scanned, stored=int(stored), params=params,
                timing=timing)


def run_bench(cfg: BenchConfig) -> BenchReport:
    main = _run_one(cfg, cfg.n, exhaustive=False)
    series, fit = [], None
    timing = dict(main["timing"])
    if cfg.series:
        if cfg.structure != "di":
            raise ValueError("exponent series are only supported for the di structure")
        sub = BenchConfig(**{**asdict(cfg), "planted": False})
        for n in cfg.series:
            res = _run_one(sub, int(n), exhaustive=True)
            series.append((int(n), float(np.mean(res["scanned"])), res["stored"]))
            timing[f"series_{n}_seconds"] = res["timing"]["build_seconds"] + res["timing"]["query_seconds"]
        fit = fit_exponent([(n, s) for n, s, _ in series])
    return BenchReport(
        config=asdict(cfg), recall=main["recall"], planted_recall=main["planted_recall"],
        nodes_mean=float(np.mean(main["nodes"])), nodes_median=float(np.median(main["nodes"])),
        scanned_mean=float(np.mean(main["scanned"])),
        scanned_median=float(np.median(main["scanned"])),
        stored=main["stored"], params=main["params"], series=series, fit=fit, timing=timing)
