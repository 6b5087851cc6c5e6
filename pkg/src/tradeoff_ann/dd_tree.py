"""Data-dependent partition tree: cluster carving plus Gaussian caps.

Coordinates inside the tree are in units of the near distance ``r``
(so the top-level near threshold is 1). Points are optionally projected
with a JL map, split by the shifted grid and lifted onto a sphere per cube;
each cube gets its own root built by :func:`process_sphere`.

Ball nodes build their ``(annulus i, query distance j)`` children on first
use. A child depends only on its key and inputs, so the tree answers every
query exactly as an eagerly built one would; ``materialize_all`` forces the
full build.
"""
from __future__ import annotations

import math
import threading
from dataclasses import asdict, dataclass, field

import numpy as np

from .caps import alpha_beta
from .filter_tree import gaussian_block
from .reductions import GridLift, grid_lift, jl_matrix
from .seb import smallest_enclosing_ball
from .solver import InfeasibleError, curve_point, solve_thresholds

# key tags separating cluster and annulus children from cap slots
CLUSTER_TAG = 1 << 40
ANNULUS_TAG = 2 << 40
CUBE_TAG = 3 << 40


class BallDepthExceeded(RuntimeError):
    """More nested ball nodes on one path than ``ball_depth_cap`` allows."""


@dataclass(frozen=True)
class DDParams:
    eps: float = 0.15
    delta: float = 0.005
    cluster_tau: float = 0.02
    K: int | None = None
    ball_depth_cap: int = 8
    rho_q: float | None = None  # None: balanced point of the random-instance curve
    rho_u: float | None = None
    success_const: float = 100.0
    eps_cover: float = 0.05
    condition_slack: float = 1e-9  # relative; carve only if lhs < rhs (1 - slack)
    seb_tol: float = 1e-4
    jl_dim: int | None = None
    lift_R: float | None = None

    def __post_init__(self):
        for name in ("eps", "delta", "cluster_tau"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.ball_depth_cap < 1:
            raise ValueError("ball_depth_cap must be at least 1")


def project_distance(R1: float, R2: float, r: float) -> float:
    """Distance from p1 on sphere R1 to the point of sphere R1 nearest to p2,
    where p2 lies on the concentric sphere R2 with ||p1 - p2|| = r."""
    if R1 <= 0 or R2 <= 0:
        raise ValueError("radii must be positive")
    gap = abs(R1 - R2)
    if r < gap - 1e-12 * max(1.0, gap):
        raise ValueError(f"no configuration: r={r} < |R1 - R2|={gap}")
    return math.sqrt(max(0.0, R1 * (r * r - gap * gap) / R2))


def tradeoff_lhs_rhs(r: float, cr: float, rho_q: float, rho_u: float) -> tuple[float, float]:
    ar, br = alpha_beta(r)
    acr, bcr = alpha_beta(cr)
    lhs = (1 - ar * acr) * math.sqrt(rho_q) + (ar - acr) * math.sqrt(rho_u)
    return lhs, br * bcr


@dataclass
class Node:
    kind: str  # "sphere", "ball", "leaf", "single"
    key: tuple
    r1: float
    r2: float
    l: int
    ball_depth: int
    o: np.ndarray | None = None
    R: float = 0.0
    idx: np.ndarray | None = None  # original dataset indices (leaf, single, ball)
    # sphere payload
    r_star: float = 0.0
    clusters: list = field(default_factory=list)
    eta_u: float = 0.0
    eta_q: float = 0.0
    T: int = 0
    cap_slots: np.ndarray | None = None
    cap_children: list = field(default_factory=list)
    # ball payload
    coords: np.ndarray | None = None  # rounded point coordinates
    ring: np.ndarray | None = None  # annulus index per point
    children: dict = field(default_factory=dict)  # (i, j) -> Node
    radial_err: float = 0.0
    remainder: bool = False  # explicit list for a remainder caps cannot split

    @property
    def n_points(self) -> int:
        return 0 if self.idx is None else len(self.idx)


@dataclass
class DDQueryStats:
    nodes_visited: int = 0
    leaves_visited: int = 0
    points_scanned: int = 0
    balls_rejected: int = 0
    cluster_fanout: int = 0


class Builder:
    def __init__(self, params: DDParams, n_total: int, seed: int, K: int):
        self.params = params
        self.n_total = max(2, n_total)
        self.seed = seed
        self.K = K
        self.rho_q, self.rho_u = params.rho_q, params.rho_u
        self.lock = threading.RLock()
        self.log: list[str] = []

    # -- sphere -----------------------------------------------------------
    def sphere(self, X, idx, r1, r2, o, R, l, key, ball_depth) -> Node:
        p = self.params
        node = Node("sphere", key, r1, r2, l, ball_depth, o=o, R=R)
        if l == self.K:
            return Node("leaf", key, r1, r2, l, ball_depth, o=o, R=R, idx=idx)
        if r2 >= 2 * R:
            return Node("single", key, r1, r2, l, ball_depth, o=o, R=R, idx=idx[:1])
        node.idx = idx
        node.radial_err = float(np.max(np.abs(np.linalg.norm(X - o, axis=1) - R)))
        r_star = r2
        carve = True
        if r1 < 2 * R:
            lhs, rhs = tradeoff_lhs_rhs(r1 / R, r2 / R, self.rho_q, self.rho_u)
            carve = lhs < rhs * (1.0 - p.condition_slack)
        if carve:
            X, idx = self._carve(node, X, idx, r1, r2, o, R, l, key, ball_depth)
            r_star = math.sqrt(2.0) * R
        node.r_star = r_star
        if len(idx) == 0:
            node.cap_slots = np.zeros(0, dtype=np.int64)
            return node
        try:
            pt = self._cap_params(r1 / R, r_star / r1)
        except (InfeasibleError, ValueError):
            # caps cannot separate near from far at this geometry; store the
            # remainder explicitly
            self.log.append(f"explicit remainder at key={key} r1/R={r1 / R:.4g}")
            leaf = Node("leaf", key + (0,), r1, r2, l, ball_depth, o=o, R=R, idx=idx,
                        remainder=True)
            node.T = 0
            node.cap_slots = np.zeros(0, dtype=np.int64)
            node.clusters.append(leaf)
            return node
        node.eta_u, node.eta_q, node.T = pt.eta_u, pt.eta_q, pt.T
        z = gaussian_block(self.seed, key, pt.T, X.shape[1])
        hit = ((X - o) @ z.T) >= pt.eta_u * R
        kept = np.flatnonzero(hit.any(axis=0))
        node.cap_slots = kept
        for s in kept:
            sel = hit[:, s]
            node.cap_children.append(
                self.sphere(X[sel], idx[sel], r1, r2, o, R, l + 1, key + (int(s),), ball_depth))
        return node

    def _cap_params(self, r_loc: float, c_loc: float):
        if not c_loc > 1.0:
            raise InfeasibleError("far radius does not exceed near radius")
        try:
            pt = curve_point(c_loc, r_loc, rho_q=self.rho_q)
        except InfeasibleError:
            # requested query exponent beyond this curve: use its rho_u = 0 end
            pt = curve_point(c_loc, r_loc, rho_u=0.0)
        return solve_thresholds(pt, self.n_total, self.K, self.params.success_const)

    def _carve(self, node, X, idx, r1, r2, o, R, l, key, ball_depth):
        p = self.params
        m = len(idx)
        R_hat = (math.sqrt(2.0) - p.eps) * R * (1.0 + p.eps_cover)
        Y = X - o
        # ||x - y||^2 = 2 R^2 - 2 <x - o, y - o> for points on the sphere
        near = (2.0 * R * R - 2.0 * (Y @ Y.T)) <= R_hat * R_hat
        alive = np.ones(m, dtype=bool)
        need = p.cluster_tau * m
        k = 0
        while True:
            counts = (near[:, alive]).sum(axis=1)
            cand = np.flatnonzero(alive & (counts >= need))
            if len(cand) == 0:
                break
            members = np.flatnonzero(near[cand[0]] & alive)
            center, radius = smallest_enclosing_ball(X[members], tol=p.seb_tol)
            node.clusters.append(self.ball(X[members], idx[members], r1, r2, center, radius,
                                           l, key + (CLUSTER_TAG, k), ball_depth + 1))
            alive[members] = False
            k += 1
        return X[alive], idx[alive]

    # -- ball -------------------------------------------------------------
    def ball(self, X, idx, r1, r2, o, R, l, key, ball_depth) -> Node:
        if ball_depth > self.params.ball_depth_cap:
            raise BallDepthExceeded(
                f"{ball_depth} nested ball nodes exceed ball_depth_cap="
                f"{self.params.ball_depth_cap} at key {key}")
        if r1 + 2 * R <= r2:
            return Node("single", key, r1, r2, l, ball_depth, o=o, R=R, idx=idx[:1])
        coords, ring = snap_to_annuli(X, o, self.params.delta * r1)
        return Node("ball", key, r1, r2, l, ball_depth, o=o, R=R, idx=idx,
                    coords=coords, ring=ring)

    def ball_child(self, node: Node, i: int, j: int) -> Node:
        with self.lock:
            hit = node.children.get((i, j))
            if hit is not None:
                return hit
            step = self.params.delta * node.r1
            sel = node.ring == i
            Ri, Rj = step * i, step * j
            r1t = project_distance(Ri, Rj, node.r1 + 2 * step)
            r2t = project_distance(Ri, Rj, node.r2 - 2 * step)
            child = self.sphere(node.coords[sel], node.idx[sel], r1t, r2t, node.o, Ri, node.l,
                                node.key + (ANNULUS_TAG, i, j), node.ball_depth)
            node.children[(i, j)] = child
            return child

    def admissible(self, node: Node, i: int, j: int) -> bool:
        return abs(i - j) * self.params.delta <= 1.0 + 2.0 * self.params.delta


def snap_to_annuli(X: np.ndarray, o: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Round each point's distance from ``o`` up to a multiple of ``step``."""
    Y = X - o
    rad = np.linalg.norm(Y, axis=1)
    ring = np.maximum(1, np.ceil(rad / step - 1e-12)).astype(np.int64)
    safe = np.where(rad > 0, rad, 1.0)
    direction = Y / safe[:, None]
    direction[rad == 0] = np.eye(X.shape[1])[0]
    return o + direction * (ring * step)[:, None], ring


@dataclass
class DDTree:
    params: DDParams
    c: float
    r: float
    seed: int
    K: int
    n_points: int
    dim: int
    roots: dict  # cube key -> Node
    lift: GridLift
    jl: np.ndarray | None
    builder: Builder
    points: np.ndarray | None = None

    def transform(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return q @ self.jl.T if self.jl is not None else q

    def iter_nodes(self):
        stack = list(self.roots.values())
        while stack:
            v = stack.pop()
            yield v
            stack.extend(v.clusters)
            stack.extend(v.cap_children)
            stack.extend(v.children.values())

    def materialize_all(self) -> None:
        """Build every admissible ball child (can be very large)."""
        stack = list(self.roots.values())
        while stack:
            v = stack.pop()
            if v.kind == "ball":
                top = int(math.ceil((v.R + v.r1 + 2 * self.params.delta * v.r1)
                                    / (self.params.delta * v.r1)))
                for i in np.unique(v.ring):
                    for j in range(1, top + 1):
                        if self.builder.admissible(v, int(i), j):
                            self.builder.ball_child(v, int(i), j)
            stack.extend(v.clusters)
            stack.extend(v.cap_children)
            stack.extend(v.children.values())


def dd_build(points, c: float, r: float, params: DDParams = DDParams(), seed: int = 0) -> DDTree:
    """Build the data-dependent tree for (c, r)-ANN over ``points``."""
    x = np.asarray(getattr(points, "data", points), dtype=float)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("dd_build needs a non-empty 2-D point array")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    if not c > 1.0 or not r > 0:
        raise ValueError("need c > 1 and r > 0")
    n, d = x.shape
    K = params.K if params.K is not None else max(1, round(math.sqrt(math.log(max(n, 2)))))
    if params.rho_q is None and params.rho_u is None:
        bal = curve_point(c, math.sqrt(2.0) / c, which="balanced")
        params = DDParams(**{**asdict(params), "rho_q": bal.rho_q, "rho_u": bal.rho_u})
    elif params.rho_q is None or params.rho_u is None:
        raise ValueError("give both rho_q and rho_u, or neither")
    jl = None
    y = x
    if params.jl_dim is not None:
        jl = jl_matrix(d, params.jl_dim, seed).matrix
        y = x @ jl.T
    from .pointset import PointSet
    gl = grid_lift(PointSet(y, "euclidean"), r, seed, R=params.lift_R, n=n)
    builder = Builder(params, n, seed, K)
    roots = {}
    origin = np.zeros(y.shape[1] + 1)
    for ordinal, cube in enumerate(sorted(gl.cubes)):
        members = gl.cubes[cube]
        roots[cube] = builder.sphere(gl.lifted[members], members.astype(np.int64), 1.0, c,
                                     origin, gl.R, 0, (CUBE_TAG, ordinal), 0)
    return DDTree(params=params, c=c, r=r, seed=seed, K=K, n_points=n, dim=d, roots=roots,
                  lift=gl, jl=jl, builder=builder, points=x)


def process_sphere(X, r1, r2, o, R, l, params: DDParams, seed: int = 0, n_total=None,
                   K: int | None = None, key: tuple = (), idx=None) -> Node:
    """Run the sphere procedure directly on points lying on ``dB(o, R)``."""
    X = np.asarray(X, dtype=float)
    n_total = len(X) if n_total is None else n_total
    K = params.K if K is None else K
    if K is None:
        K = max(1, round(math.sqrt(math.log(max(n_total, 2)))))
    if params.rho_q is None or params.rho_u is None:
        raise ValueError("process_sphere needs explicit rho_q and rho_u")
    idx = np.arange(len(X)) if idx is None else np.asarray(idx)
    return Builder(params, n_total, seed, K).sphere(X, idx, r1, r2, np.asarray(o, dtype=float),
                                                    R, l, key, 0)


def process_ball(X, r1, r2, o, R, l, params: DDParams, seed: int = 0, n_total=None,
                 K: int | None = None, key: tuple = (), idx=None):
    """Run the ball procedure directly; returns ``(node, builder)`` so lazy
    children can be requested via ``builder.ball_child``."""
    X = np.asarray(X, dtype=float)
    n_total = len(X) if n_total is None else n_total
    K = params.K if K is None else K
    if K is None:
        K = max(1, round(math.sqrt(math.log(max(n_total, 2)))))
    idx = np.arange(len(X)) if idx is None else np.asarray(idx)
    b = Builder(params, n_total, seed, K)
    return b.ball(X, idx, r1, r2, np.asarray(o, dtype=float), R, l, key, 1), b


def dd_query(tree: DDTree, q: np.ndarray, c: float | None = None, r: float | None = None,
             stats: DDQueryStats | None = None) -> tuple[int | None, DDQueryStats]:
    """First dataset point within ``c * r`` of ``q`` in the original space."""
    if tree.points is None:
        raise ValueError("tree has no dataset attached")
    c = tree.c if c is None else c
    r = tree.r if r is None else r
    st = DDQueryStats() if stats is None else stats
    q0 = np.asarray(q, dtype=float)
    y = tree.transform(q0)
    cube = tree.lift.cube_of(y)
    root = tree.roots.get(cube)
    if root is None:
        return None, st
    _, v = tree.lift.lift(y, cube)
    limit2 = (c * r) ** 2
    return _walk(tree, root, v, q0, limit2, st), st


def _check(tree, idx, q0, limit2, st):
    st.points_scanned += len(idx)
    if isinstance(limit2, _Target):
        ok = np.flatnonzero(idx == limit2.index)
    else:
        diff = tree.points[idx] - q0
        ok = np.flatnonzero(np.einsum("ij,ij->i", diff, diff) <= limit2)
    return int(idx[ok[0]]) if len(ok) else None


@dataclass(frozen=True)
class _Target:
    index: int


def dd_reaches(tree: DDTree, q: np.ndarray, index: int) -> bool:
    """Whether the query walk reaches a leaf storing dataset point ``index``."""
    y = tree.transform(np.asarray(q, dtype=float))
    cube = tree.lift.cube_of(y)
    root = tree.roots.get(cube)
    if root is None:
        return False
    _, v = tree.lift.lift(y, cube)
    return _walk(tree, root, v, None, _Target(int(index)), DDQueryStats()) is not None


def _holds(node: Node, limit2) -> bool:
    # a reachability walk can skip subtrees that never stored the target
    if not isinstance(limit2, _Target) or node.idx is None:
        return True
    return bool(np.any(node.idx == limit2.index))


def _walk(tree: DDTree, node: Node, v: np.ndarray, q0, limit2, st) -> int | None:
    if not _holds(node, limit2):
        return None
    st.nodes_visited += 1
    if node.kind in ("leaf", "single"):
        st.leaves_visited += 1
        return _check(tree, node.idx, q0, limit2, st)
    if node.kind == "sphere":
        st.cluster_fanout += len(node.clusters)
        for ch in node.clusters:
            hit = _walk(tree, ch, v, q0, limit2, st)
            if hit is not None:
                return hit
        if node.T and len(node.cap_slots):
            z = gaussian_block(tree.seed, node.key, node.T, len(v))[node.cap_slots]
            ok = np.flatnonzero(z @ (v - node.o) >= node.eta_q * node.R)
            for k in ok:
                hit = _walk(tree, node.cap_children[k], v, q0, limit2, st)
                if hit is not None:
                    return hit
        return None
    # ball
    w = v - node.o
    dist = float(np.linalg.norm(w))
    if dist > node.R + node.r1:
        st.balls_rejected += 1
        return None
    step = tree.params.delta * node.r1
    j = max(1, int(math.ceil(dist / step - 1e-12)))
    unit = w / dist if dist > 0 else np.eye(len(v))[0]
    rings = np.unique(node.ring)
    if isinstance(limit2, _Target):
        rings = np.unique(node.ring[node.idx == limit2.index])
    for i in rings:
        i = int(i)
        if not tree.builder.admissible(node, i, j):
            continue
        child = tree.builder.ball_child(node, i, j)
        hit = _walk(tree, child, node.o + unit * (step * i), q0, limit2, st)
        if hit is not None:
            return hit
    return None


def check_invariants(tree: DDTree, tol: float = 0.05) -> list[str]:
    """Violations of the distance-ratio and ball-depth invariants among the
    nodes built so far (empty list when all hold)."""
    c = tree.c
    bad = []
    for v in tree.iter_nodes():
        if v.r2 / v.r1 < c * (1 - tol) - 1e-12:
            bad.append(f"{v.kind} {v.key}: r2/r1={v.r2 / v.r1:.6g} < {c * (1 - tol):.6g}")
        if v.r2 > c * (1 + tol) + 1e-12:
            bad.append(f"{v.kind} {v.key}: r2={v.r2:.6g} > {c * (1 + tol):.6g}")
        if v.ball_depth > tree.params.ball_depth_cap:
            bad.append(f"{v.kind} {v.key}: ball depth {v.ball_depth}")
        if v.kind == "leaf" and v.l != tree.K and not v.remainder:
            bad.append(f"leaf {v.key} at level {v.l} != K")
        if v.kind == "sphere" and v.radial_err > 1e-6 * max(1.0, v.R):
            bad.append(f"sphere {v.key}: points off the sphere by {v.radial_err:.3g}")
    return bad


def node_counts(tree: DDTree) -> dict:
    out = {"sphere": 0, "ball": 0, "leaf": 0, "single": 0, "stored": 0, "max_ball_depth": 0}
    for v in tree.iter_nodes():
        out[v.kind] += 1
        if v.kind in ("leaf", "single"):
            out["stored"] += v.n_points
        out["max_ball_depth"] = max(out["max_ball_depth"], v.ball_depth)
    return out
