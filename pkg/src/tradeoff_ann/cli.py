"""Command-line interface.

Exit codes: 0 success, 2 usage or file-format error, 3 infeasible parameters.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import dd_tree, filter_tree
from .bench import BenchConfig, run_bench
from .instances import gen_clustered, gen_hamming, gen_sphere
from .io import FormatError, read_dataset, write_dataset
from .lower_bounds import (list_of_points_max_rho_u, list_of_points_rho_q,
                           one_probe_schedule_exponent, one_probe_space_exponent)
from .reductions import hamming_to_sphere
from .solver import (InfeasibleError, curve_point, random_curve, solve_thresholds,
                     worst_case_curve)

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _geometry(regime: str, c: float, r: float | None) -> tuple[float, float]:
    if r is not None:
        return c, r
    if regime in ("random", "sphere"):
        return c, math.sqrt(2.0) / c
    raise InfeasibleError("the worst-case regime has no finite r; use `solve --curve worst`")


def _select(args) -> dict:
    picked = [x for x in (args.rho_q, args.rho_u) if x is not None]
    if args.balanced or not picked:
        return {"which": "balanced"}
    if len(picked) == 2:
        raise SystemExit("give at most one of --rho-q / --rho-u")
    return {"rho_q": args.rho_q} if args.rho_q is not None else {"rho_u": args.rho_u}


def cmd_solve(args) -> int:
    if args.curve:
        fn = random_curve if args.curve == "random" else worst_case_curve
        print("rho_q,rho_u,space_exponent")
        for rq, ru in fn(args.c, args.grid):
            print(f"{rq:.12g},{ru:.12g},{1 + ru:.12g}")
        return 0
    if args.regime == "worst":
        from .solver import worst_case_rho_u
        if args.rho_q is not None:
            rq, ru = args.rho_q, worst_case_rho_u(args.c, args.rho_q)
        else:
            raise InfeasibleError("worst regime needs --rho-q")
        print(f"c = {args.c:.12g}\nrho_q = {rq:.12g}\nrho_u = {ru:.12g}\n"
              f"space_exponent = {1 + ru:.12g}")
        return 0
    c, r = _geometry(args.regime, args.c, args.r)
    pt = curve_point(c, r, **_select(args))
    if args.n is not None:
        pt = solve_thresholds(pt, args.n, args.K, args.success_const)
    for k, v in asdict(pt).items():
        if v is not None:
            print(f"{k} = {v:.12g}" if isinstance(v, float) else f"{k} = {v}")
    print(f"space_exponent = {pt.space_exponent:.12g}")
    return 0


def cmd_lb(args) -> int:
    if args.list_of_points:
        if args.rho_u is not None:
            print(f"rho_q = {list_of_points_rho_q(args.c, args.rho_u):.12g}")
            return 0
        top = list_of_points_max_rho_u(args.c)
        print("rho_u,rho_q")
        for k in range(args.grid):
            ru = top * k / (args.grid - 1)
            print(f"{ru:.12g},{list_of_points_rho_q(args.c, ru):.12g}")
        return 0
    if args.one_probe:
        print(f"space_exponent = {one_probe_space_exponent(args.c):.12g}")
        if args.n is not None:
            print(f"schedule_exponent_at_n = {one_probe_schedule_exponent(args.c, args.n):.12g}")
        return 0
    raise SystemExit("choose --list-of-points or --one-probe")


def cmd_gen(args) -> int:
    if args.kind == "sphere":
        P, Q, truth = gen_sphere(args.n, args.d, args.c, args.queries, args.seed)
    elif args.kind == "hamming":
        P, Q, truth = gen_hamming(args.n, args.d, args.c, args.queries, args.seed)
    else:
        P, Q, truth = gen_clustered(args.n, args.d, args.c, args.clusters, args.radius_factor,
                                    args.seed, q_count=args.queries)
    out = Path(args.out)
    write_dataset(out.with_suffix(".data"), P)
    write_dataset(out.with_suffix(".queries"), Q)
    t = asdict(truth)
    t["planted_pairs"] = [list(p) for p in truth.planted_pairs]
    out.with_suffix(".truth.json").write_text(json.dumps(t, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out.with_suffix('.data')}, {out.with_suffix('.queries')}, "
          f"{out.with_suffix('.truth.json')}")
    return 0


def _sphere_data(ps):
    return hamming_to_sphere(ps) if ps.space == "hamming" else ps


def _normalize(x: np.ndarray) -> np.ndarray:
    # float32 storage loses ~1e-7 of norm; restore exact unit length
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def cmd_build(args) -> int:
    P = _sphere_data(read_dataset(args.data))
    if args.structure != "di":
        raise SystemExit("build/query files are supported for --structure di only; "
                         "use `bench --structure dd` for the data-dependent tree")
    c, r = _geometry("random", args.c, args.r)
    pt = solve_thresholds(curve_point(c, r, **_select(args)), P.n, args.K, args.success_const)
    tree = filter_tree.build(_normalize(P.data), pt, args.seed)
    filter_tree.save(tree, args.out)
    print(f"nodes = {tree.n_nodes}\nstored = {tree.stored_points}\nT = {pt.T}\nK = {pt.K}")
    return 0


def cmd_query(args) -> int:
    P = _sphere_data(read_dataset(args.data))
    Q = _sphere_data(read_dataset(args.queries))
    tree = filter_tree.load(args.tree, _normalize(P.data))
    cr = args.cr if args.cr is not None else math.sqrt(2.0)
    print("query,index,distance,nodes_visited,points_scanned")
    for j, q in enumerate(_normalize(Q.data)):
        idx, st = filter_tree.query(tree, q, cr)
        dist = "" if idx is None else f"{np.linalg.norm(tree.points[idx] - q):.9g}"
        print(f"{j},{'' if idx is None else idx},{dist},{st.nodes_visited},{st.points_scanned}")
    return 0


def cmd_bench(args) -> int:
    cfg = BenchConfig(structure=args.structure, kind=args.kind, n=args.n, d=args.d, c=args.c,
                      queries=args.queries, seed=args.seed, regime=args.regime, rho=args.rho,
                      K=args.K, success_const=args.success_const,
                      series=tuple(args.series or ()), clusters=args.clusters,
                      radius_factor=args.radius_factor, delta=args.delta,
                      planted=not args.no_planted)
    text = run_bench(cfg).to_text(timing=not args.no_timing)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tradeoff-ann", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a trade-off point or print a curve")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--r", type=float)
    s.add_argument("--regime", choices=["random", "sphere", "worst"], default="random")
    s.add_argument("--rho-q", type=float)
    s.add_argument("--rho-u", type=float)
    s.add_argument("--balanced", action="store_true")
    s.add_argument("--n", type=int)
    s.add_argument("--K", type=int)
    s.add_argument("--success-const", type=float, default=100.0)
    s.add_argument("--curve", choices=["random", "worst"])
    s.add_argument("--grid", type=int, default=21)
    s.set_defaults(fn=cmd_solve)

    lb = sub.add_parser("lb", help="lower-bound exponents")
    lb.add_argument("--c", type=float, required=True)
    lb.add_argument("--list-of-points", action="store_true")
    lb.add_argument("--one-probe", action="store_true")
    lb.add_argument("--rho-u", type=float)
    lb.add_argument("--n", type=float)
    lb.add_argument("--grid", type=int, default=21)
    lb.set_defaults(fn=cmd_lb)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", choices=["sphere", "hamming", "clustered"], default="sphere")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--c", type=float, required=True)
    g.add_argument("--queries", type=int, default=100)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--clusters", type=int, default=4)
    g.add_argument("--radius-factor", type=float, default=1.0)
    g.add_argument("--out", required=True, help="output prefix")
    g.set_defaults(fn=cmd_gen)

    b = sub.add_parser("build", help="build and save a cap tree")
    b.add_argument("--structure", choices=["di", "dd"], default="di")
    b.add_argument("--data", required=True)
    b.add_argument("--c", type=float, required=True)
    b.add_argument("--r", type=float)
    b.add_argument("--rho-q", type=float)
    b.add_argument("--rho-u", type=float)
    b.add_argument("--balanced", action="store_true")
    b.add_argument("--K", type=int)
    b.add_argument("--success-const", type=float, default=3.0)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(fn=cmd_build)

    q = sub.add_parser("query", help="answer a query file with a saved tree")
    q.add_argument("--tree", required=True)
    q.add_argument("--data", required=True)
    q.add_argument("--queries", required=True)
    q.add_argument("--cr", type=float)
    q.set_defaults(fn=cmd_query)

    be = sub.add_parser("bench", help="generate, build, query and report")
    be.add_argument("--structure", choices=["di", "dd"], required=True)
    be.add_argument("--kind", choices=["sphere", "hamming", "clustered"], default="sphere")
    be.add_argument("--n", type=int, default=4096)
    be.add_argument("--d", type=int, default=128)
    be.add_argument("--c", type=float, default=2.0)
    be.add_argument("--queries", type=int, default=200)
    be.add_argument("--seed", type=int, required=True)
    be.add_argument("--regime", choices=["balanced", "rho_q", "rho_u"], default="balanced")
    be.add_argument("--rho", type=float, default=0.0)
    be.add_argument("--K", type=int, default=3)
    be.add_argument("--success-const", type=float, default=3.0)
    be.add_argument("--series", type=int, nargs="*")
    be.add_argument("--clusters", type=int, default=4)
    be.add_argument("--radius-factor", type=float, default=1.0)
    be.add_argument("--delta", type=float, default=0.005)
    be.add_argument("--no-planted", action="store_true")
    be.add_argument("--no-timing", action="store_true")
    be.add_argument("--out")
    be.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FormatError as e:
        print(f"format error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        if isinstance(e.code, str):
            print(e.code, file=sys.stderr)
            return EXIT_USAGE
        raise


if __name__ == "__main__":
    sys.exit(main())
