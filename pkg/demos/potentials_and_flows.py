"""
Exit heights, Green functions and flows
=======================================

The blue walker of one erosion step exits the blue region at an expected
height H_A.  Its Green function G_A = H_A - y defines a unit flow from the
bottom row, and that flow has the least energy among all such flows.
"""

from fractions import Fraction

import numpy as np

from erosion_lab import Coloring, make_initial, run_chain
from erosion_lab.cylinder import heights
from erosion_lab.potential import (bend_energy_terms, construct_bend_spec, bend_flow,
                                   expected_exit_height, optimal_flow, predict_interface,
                                   satisfies_divergence, trivial_flow)
from erosion_lab.regions import column_profiles, reach_regions

n = 12
# a state after some erosion steps, so the blue region is substantial
state, _ = run_chain(make_initial("bernoulli", n, Fraction(2, 5), rng=3), 200, 3, record=False)
reg = reach_regions(state)
prof = column_profiles(state, reg)
A = reg.R1_trunc

#%%
# Expected exit height from every bottom site, and the random-walk flow
H = expected_exit_height(A, n)
f = optimal_flow(A, n)
print("mean exit height from row 0:", H[:n].mean())
print("energy of the walk flow    :", f.energy())
print("divergence conditions hold :", satisfies_divergence(f, A, tol=1e-9))

#%%
# Pushing mass straight up each column is admissible too, but costs more
triv = trivial_flow(prof, A, n)
print("energy of the column flow  :", triv.energy())

#%%
# Tall thin pillars can be drained sideways; the bent flow shows the saving
pillars = np.zeros((n + 1, n), dtype=bool)
pillars[:2] = True
pillars[:9, ::3] = True
pil = Coloring(n, pillars.ravel(), Fraction(int(pillars.sum()), n * (n + 1)))
preg = reach_regions(pil)
pprof = column_profiles(pil, preg)
spec = construct_bend_spec(pil, Fraction(1, 2), Fraction(1, 4))
terms = bend_energy_terms(spec, pprof, n)
print("pillars: column flow", terms["trivial"], " bent flow", bend_flow(spec, pprof, preg.R1_trunc, n).energy())

#%%
# The level set of the Poisson potential predicts a flat interface
pred = predict_interface(n, Fraction(1, 3))
print("predicted blue rows:", sorted(set((np.flatnonzero(pred) // n).tolist())))
print("heights of row 0..2:", heights(n)[[0, n, 2 * n]])
