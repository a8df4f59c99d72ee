"""Hill-climbing search for bad instances, compared with the upper bounds.

The search only produces lower estimates.  Seeding it with a constructed
instance shows how far random restarts are from the worst case.

    python demos/search_vs_bounds.py [--budget 2000]
"""

import argparse
from fractions import Fraction as F

from psdistortion.constructions import gen_plurality_lb, utilities_at_n
from psdistortion.distortion import theoretical_bounds, worst_case_search

parser = argparse.ArgumentParser()
parser.add_argument("--budget", type=int, default=2000)
parser.add_argument("--seed", type=int, default=7)
args = parser.parse_args()

n, m = 8, 4
print(f"random restarts only, n={n} m={m}, budget {args.budget}")
print(f"{'rule':<10}{'gamma':>7}{'found':>10}{'upper':>10}")
for rule in ("plurality", "borda", "copeland", "maximin"):
    for g in (F(1, 4), F(1, 2), F(3, 4)):
        res = worst_case_search(rule, g, n, m, args.budget, seed=args.seed)
        b = theoretical_bounds(rule, g, m)
        print(f"{rule:<10}{str(g):>7}{float(res.value):>10.3f}{float(b.upper):>10.3f}")

spec = gen_plurality_lb(F(1, 2), m, 0)
start = utilities_at_n(spec, 20)
res = worst_case_search("plurality", F(1, 2), 20, m, args.budget, seed=args.seed, seeds=[start])
print(f"\nplurality seeded with the constructed instance (n=20): {float(res.value):.3f}"
      f" against closed form {float(spec.closed_form):.3f}")
