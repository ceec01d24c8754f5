"""
Internal DLA on the cylinder
============================

Particles released on the bottom row walk until they find an empty site.
After k n^2 particles the cluster fills roughly k n rows.
"""

import numpy as np

from erosion_lab import make_initial
from erosion_lab.idla import containment_event, coupled_containment_run, idla_run, normalize_cluster
from erosion_lab.rng import RngStream

n, k, eps = 50, 0.5, 0.2
t = int(k * n * n)

cluster = idla_run(n, (), t, RngStream(1))
A = normalize_cluster(cluster)
full = int(np.argmin(A.all(axis=1)))
print(f"{t} particles: rows 0..{full - 1} full, highest particle on row {cluster.max_row}")
print("contained (low, high):", containment_event(A, n, k, eps))

#%%
# Rate over a few seeds
rate = np.mean([all(containment_event(normalize_cluster(idla_run(n, (), t, RngStream(1, s))),
                                      n, k, eps)) for s in range(20)])
print("containment rate over 20 seeds:", rate)

#%%
# Driving erosion and IDLA with the same walks keeps each erosion colour
# inside the matching IDLA cluster
state = make_initial("bernoulli", 10, 0.4, rng=0)
print(coupled_containment_run(state, 500, RngStream(2)))
