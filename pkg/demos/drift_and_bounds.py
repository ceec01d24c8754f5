"""
Drift of the height function
============================

Exact one-step drift by solving for exit laws, compared with Monte Carlo,
and the tail bounds that turn a positive drift into fast hitting.
"""

import math
from fractions import Fraction

from erosion_lab import make_initial
from erosion_lab.rng import RngStream
from erosion_lab.stats import BoundParams, azuma_bounds, drift_exact, drift_mc, hitstation_bound

n = 8
for kind in ("slab", "vertical", "bernoulli"):
    s = make_initial(kind, n, Fraction(1, 2), rng=1)
    ex = drift_exact(s).mean
    mc = drift_mc(s, 20_000, RngStream(5))
    print(f"{kind:9s} exact {ex:+.4f}   mc {mc.mean:+.4f} +- {mc.stderr:.4f}   floor {-1 / n:+.4f}")

#%%
# A vertical stripe on a larger cylinder drifts strongly upwards
s = make_initial("vertical", 30, Fraction(1, 2))
d = drift_mc(s, 10_000, RngStream(6))
print(f"n=30 stripe: {d.mean:.3f} +- {d.stderr:.4f}")

#%%
# Plugging a drift a1 into the martingale tail bound
n, a1 = 30, d.mean
p = BoundParams(A2=1, a1=a1, a2=n * n, T=2 * n * n / a1)
print("P(no hit by 2n^2/a1) <=", azuma_bounds(p, "i"), "=", math.exp(-a1 * n * n / 8))
print("hitstation example:", hitstation_bound(BoundParams(t1=n * n, t2=math.exp(n),
                                                          p1=math.exp(-n * n), p2=math.exp(-n * n))))
