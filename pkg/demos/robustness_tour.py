"""Misestimated utilities and voters who drop public spirit entirely.

    python demos/robustness_tour.py
"""

from fractions import Fraction as F

from psdistortion.robustness import (
    robust_instance_distortion,
    robust_tightness_target,
    robust_upper_bound,
    tightness_instance,
    zeroed_gamma_experiment,
)

g, m = F(1, 2), 4
print("Plurality with utility error delta* and welfare error eta*:")
for ds, es in ((1, 1), (2, 1), (2, F(3, 2)), (3, 3)):
    U, err, pred = tightness_instance(g, m, ds, es)
    got = robust_instance_distortion("plurality", g, U, err).value
    print(f"  delta*={ds} eta*={es}: instance {float(got):.3f} (target {float(robust_tightness_target(g, m, ds, es)):.3f}),"
          f" upper {float(robust_upper_bound('plurality', g, m, ds, es)):.3f}")

print("\nA fraction c of voters ignores welfare altogether (copeland, gamma=1/2):")
for c in (F(0), F(1, 8), F(1, 4), F(3, 8), F(1, 2)):
    rep = zeroed_gamma_experiment("copeland", g, c, 8, 3, budget=30, seed=1)
    status = "unbounded" if rep.divergent else f"bound {float(rep.bound):.2f}"
    print(f"  c={str(c):<4} zeroed voters {rep.zeroed}, worst seen {float(rep.observed):.3f}, {status}")
