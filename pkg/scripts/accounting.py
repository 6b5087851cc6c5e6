"""Stored points and scanned far points of the cap tree against their
expectations, over several seeds."""
import argparse
import math

import numpy as np

from tradeoff_ann import filter_tree as ft
from tradeoff_ann.instances import gen_sphere
from tradeoff_ann.solver import curve_point, solve_thresholds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--d", type=int, default=128)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--queries", type=int, default=50)
    ap.add_argument("--K", type=int, default=3)
    ap.add_argument("--success-const", type=float, default=3.0)
    args = ap.parse_args()
    cr = math.sqrt(2.0)
    pt = solve_thresholds(curve_point(args.c, cr / args.c, which="balanced"), args.n,
                          args.K, args.success_const)
    e_store = ft.expected_stored(pt, args.n)
    e_far = ft.expected_far_scanned(pt, args.n, cr)
    print(f"T = {pt.T}, K = {pt.K}, expected stored = {e_store:.1f}, "
          f"expected far scanned = {e_far:.2f}")
    print("seed,stored,far_scanned_mean")
    stored, far = [], []
    for s in range(args.seeds):
        P, Q, truth = gen_sphere(args.n, args.d, args.c, args.queries, s)
        tree = ft.build(P, pt, s)
        f = [ft.query(tree, Q.data[j], cr, stop_at_first=False)[1].far_scanned
             for j, _ in truth.planted_pairs]
        stored.append(tree.stored_points)
        far.append(float(np.mean(f)))
        print(f"{s},{stored[-1]},{far[-1]:.2f}", flush=True)
    print(f"mean stored / expected = {np.mean(stored) / e_store:.3f}")
    print(f"mean far scanned / expected = {np.mean(far) / e_far:.3f}")


if __name__ == "__main__":
    main()
