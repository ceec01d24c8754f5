"""Diffusive sorting: a label-swapping chain whose sublevel sets all perform
competitive erosion at once.

A labeling is a bijection from the N = n(n+1) sites onto 1..N.  In the first
half step a walker enters uniformly on row 0 carrying label 0 and swaps with
every site whose label beats the one it carries, stopping once it holds N;
then every label goes up by one.  The second half step mirrors this from row
n with label N+1, swapping downwards and stopping on 1, then every label
goes down by one.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .cylinder import check_size, neighbor_table, num_sites, row_of
from .erosion import Coloring
from .errors import WalkCapExceeded
from .rng import as_generator, kernel_seed

DEFAULT_CAP = 10**9


@dataclass
class Labeling:
    n: int
    labels: np.ndarray

    def __post_init__(self):
        self.n = check_size(self.n)
        lab = np.asarray(self.labels, dtype=np.int64)
        N = num_sites(self.n)
        if lab.shape != (N,):
            raise ValueError("labels have the wrong shape")
        if not np.array_equal(np.sort(lab), np.arange(1, N + 1)):
            raise ValueError("labels are not a bijection onto 1..N")
        self.labels = lab

    @property
    def N(self) -> int:
        return num_sites(self.n)

    def copy(self) -> "Labeling":
        return Labeling(self.n, self.labels.copy())

    def __eq__(self, other):
        return isinstance(other, Labeling) and self.n == other.n and np.array_equal(self.labels, other.labels)


def sorted_labeling(n: int) -> Labeling:
    """Labels increasing with row, ties by column."""
    return Labeling(n, np.arange(1, num_sites(n) + 1))


def reverse_sorted_labeling(n: int) -> Labeling:
    N = num_sites(n)
    return Labeling(n, np.arange(N, 0, -1))


def random_labeling(n: int, rng=None) -> Labeling:
    g = as_generator(rng)
    return Labeling(n, g.permutation(num_sites(n)) + 1)


def _half(lab, nbr, start, carried, stop, ascending, g, cap):
    v = start
    steps = 0
    while True:
        lv = lab[v]
        if (lv > carried) if ascending else (lv < carried):
            lab[v], carried = carried, lv
        if carried == stop:
            return
        v = nbr[v, g.integers(4)]
        steps += 1
        if steps > cap:
            raise WalkCapExceeded(f"sorting walker exceeded {cap} steps")


def sorting_step(lab: Labeling, rng=None, cap: int = DEFAULT_CAP, return_half: bool = False):
    """One full step; with `return_half` also returns the half-step labeling."""
    g = as_generator(rng)
    n, N = lab.n, lab.N
    nbr = neighbor_table(n)
    work = lab.labels.copy()
    _half(work, nbr, int(g.integers(n)), 0, N, True, g, cap)
    work += 1
    half = Labeling(n, work.copy())
    _half(work, nbr, n * n + int(g.integers(n)), N + 1, 1, False, g, cap)
    work -= 1
    out = Labeling(n, work)
    return (out, half) if return_half else out


def level_projection(lab: Labeling, k: int) -> Coloring:
    """Blue = sites labeled at most k (alpha = k/N, so exactly k blue)."""
    if not 0 <= k <= lab.N:
        raise ValueError(f"k must lie in 0..{lab.N}")
    return Coloring(lab.n, lab.labels <= k, Fraction(k, lab.N))


def label_deviation(lab: Labeling) -> float:
    """max over sites of |label/n^2 - row/n|."""
    n = lab.n
    return float(np.max(np.abs(lab.labels / (n * n) - row_of(n) / n)))


@dataclass
class SortingRun:
    final: Labeling
    invariants_held: bool
    deviations: np.ndarray


def run_sorting(lab: Labeling, steps: int, rng=None, check: bool = True,
                deviation_every: int = 0, cap: int = DEFAULT_CAP) -> SortingRun:
    """Many steps with the compiled kernel.

    With `check`, bijectivity and the sublevel-set nesting across each half
    step are verified after every half step.  With ``deviation_every = m``
    the label deviation is recorded every m steps.
    """
    n = lab.n
    work = lab.labels.copy()
    ndev = steps // deviation_every if deviation_every > 0 else 0
    dev = np.zeros(ndev)
    status, ok, done = _kernels.sorting_run(work, neighbor_table(n), n, steps,
                                            kernel_seed(rng), cap, check,
                                            deviation_every, dev)
    if status != _kernels.OK:
        raise WalkCapExceeded(f"sorting walker exceeded {cap} steps at step {done}")
    return SortingRun(Labeling(n, work), bool(ok), dev)
