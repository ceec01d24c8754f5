"""Competitive erosion on Cyl_n.

A state is a 2-colouring of the n(n+1) sites with a fixed number of blue
sites.  One step releases a blue walker uniformly on row 0 which converts the
first red site it visits, then a red walker uniformly on row n which converts
the first blue site it visits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

import numpy as np

from . import _kernels
from .cylinder import (Site, check_size, index, neighbor_table, num_sites,
                       row_of, site_of)
from .errors import WalkCapExceeded
from .rng import as_generator, kernel_seed

DEFAULT_CAP = 10**9

INIT_KINDS = ("slab", "antislab", "vertical", "checkerboard", "bernoulli")


def as_fraction(x) -> Fraction:
    """Exact rational from a Fraction, int, decimal string or float.

    Floats are snapped to the nearest fraction with denominator <= 10**6, so
    ``1/3`` computed in floating point becomes exactly 1/3.
    """
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(float(x)).limit_denominator(10**6)


def blue_count(n: int, alpha) -> int:
    """floor(alpha * |Cyl_n|), the size of the blue set on Omega."""
    return floor(as_fraction(alpha) * num_sites(n))


@dataclass
class Coloring:
    """Blue/red colouring of Cyl_n; ``blue`` is a flat bool array."""

    n: int
    blue: np.ndarray
    alpha: Fraction

    def __post_init__(self):
        self.n = check_size(self.n)
        self.alpha = as_fraction(self.alpha)
        self.blue = np.asarray(self.blue, dtype=bool)
        if self.blue.shape != (num_sites(self.n),):
            raise ValueError("blue mask has the wrong shape")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def k(self) -> int:
        return blue_count(self.n, self.alpha)

    @property
    def count(self) -> int:
        return int(self.blue.sum())

    @property
    def in_omega(self) -> bool:
        return self.count == self.k

    @property
    def in_omega_prime(self) -> bool:
        return self.count == self.k + 1

    def copy(self) -> "Coloring":
        return Coloring(self.n, self.blue.copy(), self.alpha)

    def blue_sites(self) -> set[Site]:
        return {site_of(int(i), self.n) for i in np.flatnonzero(self.blue)}

    def is_blue(self, site) -> bool:
        return bool(self.blue[index(site, self.n)])

    def row_counts(self) -> np.ndarray:
        return np.bincount(row_of(self.n)[self.blue], minlength=self.n + 1)

    def height_numerator(self) -> int:
        """n * h(sigma), an integer."""
        return int((self.n - row_of(self.n)[self.blue]).sum())

    def grid(self) -> np.ndarray:
        """``(n+1, n)`` bool array indexed ``[row, col]``."""
        return self.blue.reshape(self.n + 1, self.n)

    def __eq__(self, other):
        if not isinstance(other, Coloring):
            return NotImplemented
        return (self.n == other.n and self.alpha == other.alpha
                and np.array_equal(self.blue, other.blue))


@dataclass
class StepTrace:
    blue_walk: list[Site]
    blue_convert: Site
    red_walk: list[Site]
    red_convert: Site
    intermediate: Coloring


@dataclass
class GoodSetFlags:
    in_A: bool
    in_G: bool
    in_Gamma: bool
    in_Omega_eps: bool
    epsilon: Fraction
    sym_diff: int = 0


def _check_alpha(n, alpha):
    k = blue_count(n, alpha)
    if not 1 <= k <= num_sites(n) - 1:
        raise ValueError(f"alpha={alpha} gives {k} blue sites on Cyl_{n}; "
                         f"need 1..{num_sites(n) - 1}")
    return k


def _repair(blue, k, rng):
    have = int(blue.sum())
    if have > k:
        idx = rng.choice(np.flatnonzero(blue), have - k, replace=False)
        blue[idx] = False
    elif have < k:
        idx = rng.choice(np.flatnonzero(~blue), k - have, replace=False)
        blue[idx] = True
    return blue


def make_initial(kind: str, n: int, alpha, rng=None, p=None) -> Coloring:
    """Initial colouring with exactly floor(alpha n(n+1)) blue sites.

    kind is one of ``slab`` (lowest sites, ties by column), ``antislab``
    (highest sites), ``vertical`` (whole columns from col 0), ``checkerboard``
    or ``bernoulli`` (each site blue with probability `p`, default alpha).
    ``"bernoulli(0.33)"`` is also accepted.  The last two are repaired to the
    exact count by recolouring uniformly chosen sites of the surplus colour.
    """
    n = check_size(n)
    alpha = as_fraction(alpha)
    k = _check_alpha(n, alpha)
    N = num_sites(n)
    kind = kind.strip().lower()
    if kind.startswith("bernoulli(") and kind.endswith(")"):
        p = float(kind[len("bernoulli("):-1])
        kind = "bernoulli"
    blue = np.zeros(N, dtype=bool)
    if kind == "slab":
        blue[:k] = True
    elif kind == "antislab":
        blue[N - k:] = True
    elif kind == "vertical":
        # column-major fill: col 0 bottom to top, then col 1, ...
        order = np.arange(N).reshape(n + 1, n).T.ravel()
        blue[order[:k]] = True
    elif kind == "checkerboard":
        idx = np.arange(N)
        blue[(idx % n + idx // n) % 2 == 0] = True
        _repair(blue, k, as_generator(rng))
    elif kind == "bernoulli":
        g = as_generator(rng)
        prob = float(alpha) if p is None else float(p)
        if not 0 <= prob <= 1:
            raise ValueError(f"bernoulli probability {prob} outside [0, 1]")
        blue = g.random(N) < prob
        _repair(blue, k, g)
    else:
        raise ValueError(f"unknown initial state kind {kind!r}; expected one of {INIT_KINDS}")
    return Coloring(n, blue, alpha)


def _walk(inside, want, nbr, start, g, cap):
    path = [start]
    v = start
    while inside[v] == want:
        for d in g.integers(0, 4, size=64):
            v = int(nbr[v, d])
            path.append(v)
            if inside[v] != want:
                break
        if len(path) > cap:
            raise WalkCapExceeded(f"walk from site {start} exceeded {cap} steps")
    return path


def erosion_step(state: Coloring, rng=None, cap: int = DEFAULT_CAP):
    """One full step of the chain; returns the new state and a `StepTrace`."""
    if not state.in_omega:
        raise ValueError("erosion_step needs a state in Omega")
    if state.k >= num_sites(state.n):
        raise ValueError("no red site left for the blue walker")
    g = as_generator(rng)
    n = state.n
    nbr = neighbor_table(n)
    half = state.copy()
    bpath = _walk(half.blue, True, nbr, int(g.integers(n)), g, cap)
    half.blue[bpath[-1]] = True
    nxt = half.copy()
    rpath = _walk(nxt.blue, False, nbr, n * n + int(g.integers(n)), g, cap)
    nxt.blue[rpath[-1]] = False
    trace = StepTrace([site_of(v, n) for v in bpath], site_of(bpath[-1], n),
                      [site_of(v, n) for v in rpath], site_of(rpath[-1], n), half)
    return nxt, trace


def height(state: Coloring) -> float:
    """h(sigma) = sum over blue sites of (1 - y)."""
    return state.height_numerator() / state.n


def max_height(n: int, alpha) -> float:
    """h of the bottom slab, the maximum over Omega."""
    k = blue_count(n, alpha)
    rows = np.arange(k) // n
    return float((n - rows).sum()) / n


# ---- good sets ------------------------------------------------------------

def flags_from_rows(row_counts, hnum, n, alpha, epsilon):
    """Vectorised good-set membership from per-row blue counts.

    `row_counts` is ``(..., n+1)`` and `hnum` the matching height numerators.
    Returns a dict of bool arrays ``A, G, Gamma, Omega`` and int ``sym_diff``.
    Boundaries are compared in exact rational arithmetic.
    """
    alpha = as_fraction(alpha)
    eps = as_fraction(epsilon)
    rc = np.asarray(row_counts)
    hnum = np.asarray(hnum)
    rows = np.arange(n + 1)
    y = [Fraction(int(r), n) for r in rows]
    low_band = np.array([yy <= alpha - eps for yy in y])
    high_band = np.array([yy > alpha + eps for yy in y])
    at_or_below = np.array([yy <= alpha for yy in y])
    below = np.array([yy < alpha for yy in y])
    above = np.array([yy > alpha for yy in y])

    in_A = np.all(rc[..., low_band] == n, axis=-1) & np.all(rc[..., high_band] == 0, axis=-1)
    sym = (n - rc[..., at_or_below]).sum(axis=-1) + rc[..., ~at_or_below].sum(axis=-1)
    in_G = sym * 1 <= _floor_frac(eps * n * n)
    # h > (alpha(1 - alpha/2) - eps) n^2  <=>  hnum > n^3 (alpha(1-alpha/2) - eps)
    thresh = (alpha * (1 - alpha / 2) - eps) * n**3
    in_Gamma = hnum > _floor_frac(thresh)
    bad_low = ((rc < n) & below).sum(axis=-1)
    bad_high = ((rc > 0) & above).sum(axis=-1)
    lim = _floor_frac(eps * n)
    in_Omega = (bad_low <= lim) & (bad_high <= lim)
    return {"A": in_A, "G": in_G, "Gamma": in_Gamma, "Omega": in_Omega, "sym_diff": sym}


def _floor_frac(q: Fraction) -> int:
    return q.numerator // q.denominator


def classify(state: Coloring, epsilon) -> GoodSetFlags:
    """Membership in A_eps, G_eps, Gamma_eps and Omega_eps."""
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    f = flags_from_rows(state.row_counts(), state.height_numerator(),
                        state.n, state.alpha, eps)
    return GoodSetFlags(bool(f["A"]), bool(f["G"]), bool(f["Gamma"]),
                        bool(f["Omega"]), eps, int(f["sym_diff"]))


def detect_blue_over_red_blocking(state: Coloring) -> bool:
    """True iff a blue blocking set lies over a red blocking set.

    A set counts as blocking when no path avoiding it joins the uncovered
    parts of the bottom and top rows; a set covering a whole boundary row
    therefore qualifies.  Such states cannot be reached from the slab.
    """
    return bool(_kernels.blue_over_red(state.blue.copy(), state.n, neighbor_table(state.n)))


# ---- long runs ------------------------------------------------------------

@dataclass
class Trajectory:
    """Per-step records of a chain run (times 1..steps)."""

    n: int
    alpha: Fraction
    hnum: np.ndarray
    row_counts: np.ndarray
    blocking: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def h(self) -> np.ndarray:
        return self.hnum / self.n

    def flags(self, epsilon) -> dict:
        return flags_from_rows(self.row_counts, self.hnum, self.n, self.alpha, epsilon)


def run_chain(state: Coloring, steps: int, rng=None, record: bool = True,
              check_blocking: bool = False, cap: int = DEFAULT_CAP):
    """Run `steps` full steps with the compiled kernel.

    Returns the final state and a `Trajectory` (empty arrays if not
    `record`).  The input state is left untouched.
    """
    if not state.in_omega:
        raise ValueError("run_chain needs a state in Omega")
    n = state.n
    cur = state.copy()
    rows = cur.row_counts().astype(np.int64)
    T = steps if record else 0
    h_out = np.empty(T, dtype=np.int64)
    rows_out = np.empty((T, n + 1), dtype=np.int32)
    blk = np.zeros(steps if check_blocking else 0, dtype=np.bool_)
    status, _, done = _kernels.erosion_run(
        cur.blue, rows, cur.height_numerator(), neighbor_table(n), n, steps,
        kernel_seed(rng), cap, h_out, rows_out, check_blocking,
        blk if check_blocking else np.zeros(1, dtype=np.bool_))
    if status != _kernels.OK:
        raise WalkCapExceeded(f"walk cap {cap} exceeded at step {done}")
    return cur, Trajectory(n, cur.alpha, h_out, rows_out, blk)
