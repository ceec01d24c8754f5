"""
Interface formation on the cylinder
===================================

Start from a random colouring of the 30 x 30 cylinder with about a third of
the sites blue and watch a flat blue/red interface appear.
"""

from fractions import Fraction

from erosion_lab import classify, make_initial, run_chain
from erosion_lab.formats import render_snapshot
from erosion_lab.rng import RngStream

n, alpha, eps = 30, Fraction(1, 3), Fraction(1, 5)
rng = RngStream(7).generator()

# each site blue with probability 0.33, then repaired to exactly k blue sites
state = make_initial("bernoulli(0.33)", n, alpha, rng=rng)
print(render_snapshot(state, 0))
print("t=0  ", classify(state, eps))

# a few hundred steps are enough for the interface to form
state, traj = run_chain(state, 325, rng)
print(render_snapshot(state, 325))
print("t=325", classify(state, eps))

# the height function climbs towards its maximum, reached by the slab
h_max = make_initial("slab", n, alpha).height_numerator() / n
print(f"h: {traj.h[0]:.1f} -> {traj.h[-1]:.1f}   (slab {h_max:.1f})")

# first time the state sits in each good set
flags = traj.flags(eps)
for name in ("A", "G", "Gamma", "Omega"):
    hits = flags[name].nonzero()[0]
    print(f"first t in {name:5s}: {hits[0] + 1 if hits.size else None}")
