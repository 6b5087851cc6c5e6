"""Data-dependent tree on a clustered instance: recall, planted-neighbour
reachability, invariant check and node counts."""
import argparse
import time

import numpy as np

from tradeoff_ann import dd_tree as dd
from tradeoff_ann.instances import gen_clustered


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--d", type=int, default=512)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--clusters", type=int, default=4)
    ap.add_argument("--radius-factor", type=float, default=1.0)
    ap.add_argument("--queries", type=int, default=500)
    ap.add_argument("--planted", type=int, default=100,
                    help="queries checked for planted-neighbour reachability")
    ap.add_argument("--K", type=int, default=2)
    ap.add_argument("--success-const", type=float, default=3.0)
    ap.add_argument("--delta", type=float, default=0.005)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()
    P, Q, truth = gen_clustered(args.n, args.d, args.c, args.clusters, args.radius_factor,
                                args.seed, q_count=args.queries)
    t0 = time.perf_counter()
    tree = dd.dd_build(P, args.c, truth.r, dd.DDParams(K=args.K, delta=args.delta,
                                                       success_const=args.success_const),
                       seed=args.seed)
    print(f"build_seconds = {time.perf_counter() - t0:.2f}")
    t0 = time.perf_counter()
    hits = false_pos = 0
    for j, _ in truth.planted_pairs:
        idx, _ = dd.dd_query(tree, Q.data[j])
        if idx is not None:
            ok = np.linalg.norm(P.data[idx] - Q.data[j]) <= truth.cr
            hits += ok
            false_pos += not ok
    print(f"query_seconds = {time.perf_counter() - t0:.2f}")
    print(f"recall = {hits / len(truth.planted_pairs):.4f}")
    print(f"false_positives = {false_pos}")
    m = min(args.planted, len(truth.planted_pairs))
    if m:
        reach = sum(dd.dd_reaches(tree, Q.data[j], i) for j, i in truth.planted_pairs[:m])
        print(f"planted_recall = {reach / m:.4f} (first {m} queries)")
    bad = dd.check_invariants(tree)
    print(f"invariant_violations = {len(bad)}")
    for line in bad[:10]:
        print("  " + line)
    for k, v in dd.node_counts(tree).items():
        print(f"{k} = {v}")
    for line in tree.builder.log[:10]:
        print("log: " + line)


if __name__ == "__main__":
    main()
