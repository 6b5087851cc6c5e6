"""Print trade-off curves (random and worst-case geometry) next to the
list-of-points lower bound, as CSV."""
import argparse
import math

from tradeoff_ann.lower_bounds import list_of_points_max_rho_u, list_of_points_rho_q
from tradeoff_ann.solver import curve_point, random_curve, worst_case_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--grid", type=int, default=11)
    args = ap.parse_args()
    print("c,curve,rho_q,rho_u,space_exponent")
    for c in args.c:
        for name, fn in (("random", random_curve), ("worst", worst_case_curve)):
            for rq, ru in fn(c, args.grid):
                print(f"{c},{name},{rq:.9f},{ru:.9f},{1 + ru:.9f}")
        top = list_of_points_max_rho_u(c)
        for k in range(args.grid):
            ru = top * k / (args.grid - 1)
            print(f"{c},list_of_points,{list_of_points_rho_q(c, ru):.9f},{ru:.9f},{1 + ru:.9f}")
        bal = curve_point(c, math.sqrt(2) / c, which="balanced")
        print(f"# c={c}: balanced rho = {bal.rho_q:.9f}")


if __name__ == "__main__":
    main()
