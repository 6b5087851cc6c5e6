"""Exhaustive query work of the cap tree against n, with a log-log fit."""
import argparse

from tradeoff_ann.bench import BenchConfig, run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=64)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--queries", type=int, default=50)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--K", type=int, default=3)
    ap.add_argument("--success-const", type=float, default=3.0)
    ap.add_argument("--log2n", type=int, nargs=2, default=[10, 16], metavar=("LO", "HI"))
    args = ap.parse_args()
    ns = tuple(2 ** k for k in range(args.log2n[0], args.log2n[1] + 1))
    cfg = BenchConfig(structure="di", n=ns[0], d=args.d, c=args.c, queries=args.queries,
                      seed=args.seed, K=args.K, success_const=args.success_const, series=ns,
                      planted=False)
    rep = run_bench(cfg)
    print(rep.to_text())
    print(f"balanced rho_q = {rep.params['rho_q']:.6f}, fitted slope = {rep.fit[0]:.4f}")


if __name__ == "__main__":
    main()
