"""
Diffusive sorting
=================

A labeling of the cylinder by 1..N evolves by label-swapping walks.  Every
level set {label <= k} runs its own copy of competitive erosion, so the
labels end up roughly increasing with height.
"""

from erosion_lab.rng import RngStream
from erosion_lab.sorting import label_deviation, level_projection, random_labeling, run_sorting

n = 20
lab = random_labeling(n, RngStream(3))
print("deviation of a random labeling:", round(label_deviation(lab), 3))

# record the deviation every n^2 steps
run = run_sorting(lab, 30 * n * n, RngStream(4), check=True, deviation_every=n * n)
print("invariants held:", run.invariants_held)
print("deviation every n^2 steps:", run.deviations.round(3).tolist())

#%%
# Level sets are erosion states; the k = N/3 set should look like a slab
s = level_projection(run.final, run.final.N // 3)
print("blue per row, bottom first:", s.row_counts().tolist())
