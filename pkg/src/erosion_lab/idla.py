"""Internal DLA on the half-infinite cylinder C_n x Z>=0.

Particles start uniformly on row 0 and walk with the reflected kernel (from
row 0 the walker moves up with probability 1/2) until they reach an empty
site.  The initial cluster is a union of full rows; ``phi`` squeezes those
rows out so clusters with different initial rows can be compared.

The coupling part runs competitive erosion and IDLA on the finite Cyl_n with
the erosion walk kernel, driving every process with the same per-walker
random stream.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

import numpy as np

from . import _kernels
from .cylinder import check_size, neighbor_table
from .errors import WalkCapExceeded
from .rng import RngStream, kernel_seed

DEFAULT_CAP = 10**9


class PhiMap:
    """Order-preserving bijection from Z>=0 onto Z>=0 minus the initial rows."""

    def __init__(self, initial_rows):
        self.initial_rows = tuple(sorted(set(int(r) for r in initial_rows)))

    def forward(self, i: int) -> int:
        r = int(i)
        for j in self.initial_rows:
            if j <= r:
                r += 1
            else:
                break
        return r

    def inverse(self, row: int) -> int:
        row = int(row)
        if row in self.initial_rows:
            raise ValueError(f"row {row} is an initial row and has no preimage")
        return row - sum(1 for j in self.initial_rows if j < row)


@dataclass
class IdlaCluster:
    n: int
    initial_rows: tuple
    grid: np.ndarray            # (rows, n) bool, row-major from row 0
    particles_placed: int
    killed: int = 0
    kill_row: int | None = None

    @property
    def occupied(self) -> set:
        rr, cc = np.nonzero(self.grid)
        return {(int(c), int(r)) for r, c in zip(rr, cc)}

    @property
    def max_row(self) -> int:
        rows = np.flatnonzero(self.grid.any(axis=1))
        return int(rows[-1]) if rows.size else -1

    def __len__(self):
        return int(self.grid.sum())


def _check_rows(n, initial_rows):
    rows = tuple(sorted(set(int(r) for r in initial_rows)))
    if any(r < 0 for r in rows):
        raise ValueError("initial rows must be non-negative")
    if len(rows) > n:
        raise ValueError(f"at most n = {n} initial rows are allowed, got {len(rows)}")
    return rows


def idla_run(n: int, initial_rows=(), t: int = 0, rng=None, kill_row=None,
             cap: int = DEFAULT_CAP) -> IdlaCluster:
    """Release `t` particles one at a time.

    With `kill_row`, a particle that reaches that row (or beyond) before
    settling is discarded and counted in ``killed``.
    """
    n = check_size(n)
    rows = _check_rows(n, initial_rows)
    if t < 0:
        raise ValueError("particle count must be non-negative")
    # a walker settles before climbing two rows past the cluster
    height = (rows[-1] if rows else 0) + t + 2
    grid = np.zeros((height, n), dtype=np.bool_)
    for r in rows:
        grid[r] = True
    placed = np.empty(t, dtype=np.int64)
    status = _kernels.idla_run(grid, n, t, kernel_seed(rng),
                               -1 if kill_row is None else int(kill_row), cap, placed)
    if status != _kernels.OK:
        raise WalkCapExceeded(f"IDLA walker exceeded {cap} steps")
    return IdlaCluster(n, rows, grid, t, int((placed < 0).sum()),
                       None if kill_row is None else int(kill_row))


def normalize_cluster(cluster: IdlaCluster) -> np.ndarray:
    """A(t) = phi^{-1}(I(t) minus I(0)) as an ``(rows, n)`` bool grid."""
    g = cluster.grid
    for r in cluster.initial_rows:
        if r >= g.shape[0] or not g[r].all():
            raise ValueError(f"initial row {r} is not fully occupied")
    keep = np.ones(g.shape[0], dtype=bool)
    keep[list(cluster.initial_rows)] = False
    return g[keep]


def containment_event(A: np.ndarray, n: int, k, eps) -> tuple[bool, bool]:
    """(lower, upper) halves of the two-sided containment event for ``A(k n^2)``.

    lower: every row up to (1-eps) k n is full; upper: nothing above
    (1+eps) k n.  Rows are integers, compared exactly.
    """
    k, eps = Fraction(k).limit_denominator(10**6), Fraction(eps).limit_denominator(10**6)
    lo = floor((1 - eps) * k * n)
    hi = floor((1 + eps) * k * n)
    A = np.asarray(A, dtype=bool)
    lower = A.shape[0] > lo and bool(A[:lo + 1].all())
    rows = np.flatnonzero(A.any(axis=1))
    upper = rows.size == 0 or int(rows[-1]) <= hi
    return lower, upper


# ---- coupling on the finite cylinder --------------------------------------

@dataclass
class CoupledReport:
    steps: int
    erosion_blue_in_idla: bool
    erosion_red_in_idla: bool
    killed_in_unkilled: bool
    killed_below_line: bool
    monotone_pair: bool | None = None

    @property
    def all_hold(self) -> bool:
        flags = [self.erosion_blue_in_idla, self.erosion_red_in_idla,
                 self.killed_in_unkilled, self.killed_below_line]
        if self.monotone_pair is not None:
            flags.append(self.monotone_pair)
        return all(flags)


def _stream(rng):
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, np.random.Generator):
        return RngStream(int(rng.integers(0, 2**63)))
    return RngStream(0 if rng is None else int(rng))


def coupled_containment_run(state, steps: int, rng=None, kill_row=None,
                            dominating=None, cap: int = DEFAULT_CAP) -> CoupledReport:
    """Erosion, IDLA and killed IDLA driven by shared walks.

    At time t the blue walkers of every process use stream
    ``(master, replica, 2t)`` and the red walkers ``(master, replica, 2t+1)``.
    Blue IDLA starts from the blue set, red IDLA from the red set; killed
    blue walkers die at rows >= `kill_row` (default n//2), killed red walkers
    at rows <= n - kill_row.  With `dominating` (a colouring whose blue set
    contains the state's), killed blue IDLA from both initial sets is
    compared as well.  Clusters that fill Cyl_n stop growing.
    """
    if not state.in_omega:
        raise ValueError("coupled run needs a state in Omega")
    n = state.n
    nbr = neighbor_table(n)
    kb = n // 2 if kill_row is None else int(kill_row)
    kr = n - kb
    base = _stream(rng)
    blue = state.blue.copy()
    I1, I2 = blue.copy(), ~blue
    K1, K2 = blue.copy(), ~blue
    pair = None
    if dominating is not None:
        if np.any(state.blue & ~dominating.blue):
            raise ValueError("dominating colouring must contain the blue set")
        pair = [blue.copy(), dominating.blue.copy()]
    ok = dict(b=True, r=True, k=True, line=True, pair=True)

    def settle(mask, from_top, seed, kill):
        v = _kernels.shared_walk(mask, nbr, n, from_top, seed, kill, cap)
        if v == -1:
            raise WalkCapExceeded(f"shared walker exceeded {cap} steps")
        if v >= 0:
            mask[v] = True
        return v

    for t in range(steps):
        sb = RngStream(base.master_seed, base.replica, 2 * t).kernel_seed()
        sr = RngStream(base.master_seed, base.replica, 2 * t + 1).kernel_seed()
        x = _kernels.shared_walk(blue, nbr, n, False, sb, -1, cap)
        if x < 0:
            raise WalkCapExceeded("erosion blue walker failed")
        blue[x] = True
        settle(I1, False, sb, -1)
        settle(K1, False, sb, kb)
        if pair is not None:
            settle(pair[0], False, sb, kb)
            settle(pair[1], False, sb, kb)
        red = ~blue
        y = _kernels.shared_walk(red, nbr, n, True, sr, -1, cap)
        if y < 0:
            raise WalkCapExceeded("erosion red walker failed")
        blue[y] = False
        settle(I2, True, sr, -1)
        settle(K2, True, sr, kr)
        ok["b"] &= not np.any(blue & ~I1)
        ok["r"] &= not np.any(~blue & ~I2)
        ok["k"] &= not np.any(K1 & ~I1) and not np.any(K2 & ~I2)
        new1 = K1 & ~state.blue
        new2 = K2 & state.blue
        ok["line"] &= not new1[kb * n:].any() and not new2[:(kr + 1) * n].any()
        if pair is not None:
            ok["pair"] &= not np.any(pair[0] & ~pair[1])
    return CoupledReport(steps, ok["b"], ok["r"], ok["k"], ok["line"],
                         None if pair is None else ok["pair"])
