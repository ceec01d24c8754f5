"""Drift, hitting times, ergodic occupancy and closed-form tail bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .cylinder import heights, neighbor_table
from .erosion import Coloring, DEFAULT_CAP, as_fraction, classify, run_chain
from .errors import ResourceLimitError, WalkCapExceeded
from .potential import exit_distribution, expected_exit_height, uniform_row
from .regions import reach_regions
from .rng import kernel_seed

PREDICATES = ("A", "G", "Gamma", "Omega")
EXACT_MAX_N = 20


@dataclass
class RunningStats:
    """Count, sum and sum of squares; merging is associative."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, x):
        x = np.asarray(x, dtype=float).ravel()
        self.count += x.size
        self.total += float(x.sum())
        self.total_sq += float((x * x).sum())
        return self

    def merge(self, other: "RunningStats") -> "RunningStats":
        return RunningStats(self.count + other.count, self.total + other.total,
                            self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def std(self) -> float:
        if self.count < 2:
            return 0.0
        var = (self.total_sq - self.count * self.mean**2) / (self.count - 1)
        return math.sqrt(max(var, 0.0))

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.count)


@dataclass
class DriftEstimate:
    mean: float
    stderr: float
    samples: int
    method: str


def drift_mc(state: Coloring, samples: int, rng=None, cap: int = DEFAULT_CAP) -> DriftEstimate:
    """Monte Carlo mean of h(sigma_1) - h(sigma_0) from a fixed state."""
    if samples < 100:
        raise ValueError("drift_mc needs at least 100 samples")
    if not state.in_omega:
        raise ValueError("drift needs a state in Omega")
    out = np.empty(samples, dtype=np.int64)
    status = _kernels.one_step_increments(state.blue.copy(), neighbor_table(state.n),
                                          state.n, samples, kernel_seed(rng), cap, out)
    if status != _kernels.OK:
        raise WalkCapExceeded(f"walk cap {cap} exceeded")
    st = RunningStats().add(out / state.n)
    return DriftEstimate(st.mean, st.stderr, samples, "monte_carlo")


def _half_step_law(state):
    n = state.n
    return exit_distribution(state.blue, uniform_row(n, 0), n)


def _check_exact(state):
    if state.n > EXACT_MAX_N:
        raise ResourceLimitError(f"exact computation limited to n <= {EXACT_MAX_N}")
    if not state.in_omega:
        raise ValueError("exact computation needs a state in Omega")


def drift_exact(state: Coloring) -> DriftEstimate:
    """Exact one-step drift by enumerating where both walkers stop.

    The blue walker's stopping law is the exit law from the blue set started
    uniformly on row 0; for each stopping site the red walker's law is the
    exit law from the red set of the half-step state started on row n.
    """
    _check_exact(state)
    n = state.n
    y = heights(n)
    px = _half_step_law(state)
    top = uniform_row(n, n)
    drift = -float(px @ y)
    for x in np.flatnonzero(px > 0):
        half = state.blue.copy()
        half[x] = True
        py = exit_distribution(~half, top, n)
        drift += px[x] * float(py @ y)
    return DriftEstimate(drift, 0.0, 0, "exact")


def drift_from_exit_heights(state: Coloring) -> float:
    """The same drift written with expected exit heights of R1 and R2.

    (1/n) E[sum_top H_{R2(sigma_1/2)}] - (1/n) sum_bottom H_{R1(sigma_0)}.
    """
    _check_exact(state)
    n = state.n
    R1 = reach_regions(state).R1.mask
    first = expected_exit_height(R1, n)[:n].sum() / n
    px = _half_step_law(state)
    second = 0.0
    for x in np.flatnonzero(px > 0):
        half = Coloring(n, state.blue.copy(), state.alpha)
        half.blue[x] = True
        R2 = reach_regions(half).R2.mask
        second += px[x] * expected_exit_height(R2, n)[-n:].sum() / n
    return float(second - first)


def exact_step_kernel(state: Coloring) -> dict:
    """Law of the next state as ``{tuple of blue flat indices: probability}``."""
    _check_exact(state)
    n = state.n
    px = _half_step_law(state)
    top = uniform_row(n, n)
    law = {}
    for x in np.flatnonzero(px > 0):
        half = state.blue.copy()
        half[x] = True
        py = exit_distribution(~half, top, n)
        for yv in np.flatnonzero(py > 0):
            nxt = half.copy()
            nxt[yv] = False
            key = tuple(np.flatnonzero(nxt).tolist())
            law[key] = law.get(key, 0.0) + px[x] * py[yv]
    return law


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical_law(keys) -> dict:
    out = {}
    for k in keys:
        out[k] = out.get(k, 0) + 1
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}


# ---- hitting times and occupancy ------------------------------------------

@dataclass
class HitResult:
    time: int | None
    timed_out: bool
    cap: int


def _flags(traj, epsilon):
    f = traj.flags(epsilon)
    return {name: np.asarray(f[name], dtype=bool) for name in PREDICATES}


def hitting_time(start: Coloring, target: str, epsilon, cap: int, rng=None,
                 chunk: int = 2000) -> HitResult:
    """First t <= cap with sigma_t in the good set `target` (one of
    ``A, G, Gamma, Omega``); a timeout is reported separately from a hit."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if target not in PREDICATES:
        raise ValueError(f"target must be one of {PREDICATES}")
    attr = {"A": "in_A", "G": "in_G", "Gamma": "in_Gamma", "Omega": "in_Omega_eps"}[target]
    if getattr(classify(start, epsilon), attr):
        return HitResult(0, False, cap)
    from .rng import as_generator
    g = as_generator(rng)
    state, t = start, 0
    while t < cap:
        m = min(chunk, cap - t)
        state, traj = run_chain(state, m, g)
        hit = np.flatnonzero(_flags(traj, epsilon)[target])
        if hit.size:
            return HitResult(t + int(hit[0]) + 1, False, cap)
        t += m
    return HitResult(None, True, cap)


@dataclass
class OccupancyReport:
    fractions: dict
    burn_in: int
    steps: int
    seeds: list = field(default_factory=list)
    epsilon: float = 0.0


def occupancy(start: Coloring, predicates, epsilon, burn_in: int, steps: int,
              rng=None, chunk: int = 10000) -> OccupancyReport:
    """Fraction of t in (burn_in, burn_in + steps] with sigma_t in each set.

    Predicate names are ``A, G, Gamma, Omega`` or ``all`` (whole space).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    preds = list(predicates)
    for p in preds:
        if p not in PREDICATES + ("all",):
            raise ValueError(f"unknown predicate {p!r}")
    from .rng import as_generator
    g = as_generator(rng)
    state = start
    if burn_in > 0:
        state, _ = run_chain(state, burn_in, g, record=False)
    counts = {p: 0 for p in preds}
    done = 0
    while done < steps:
        m = min(chunk, steps - done)
        state, traj = run_chain(state, m, g)
        fl = _flags(traj, epsilon)
        for p in preds:
            counts[p] += m if p == "all" else int(fl[p].sum())
        done += m
    return OccupancyReport({p: counts[p] / steps for p in preds}, burn_in, steps,
                           epsilon=float(as_fraction(epsilon)))


# ---- closed-form bounds -----------------------------------------------------

@dataclass
class BoundParams:
    t1: float | None = None
    t2: float | None = None
    p1: float | None = None
    p2: float | None = None
    A1: float | None = None
    A2: float | None = None
    a1: float | None = None
    a2: float | None = None
    a4: float | None = None
    T: float | None = None


def _need(p, *names):
    missing = [k for k in names if getattr(p, k) is None]
    if missing:
        raise ValueError(f"missing parameters: {', '.join(missing)}")


def hitstation_bound(p: BoundParams) -> float:
    """t1/t2 + p1 + p2."""
    _need(p, "t1", "t2", "p1", "p2")
    if p.t2 == 0:
        raise ValueError("t2 must be positive")
    return p.t1 / p.t2 + p.p1 + p.p2


def azuma_bounds(p: BoundParams, part: str):
    """Part ``i``: exp(-(a2 - a1 T)^2 / (4 A2^2 T)).

    Part ``ii``: ``(failure, T')`` with failure
    exp(-a4^2/(32 A2^2 T)) + exp(-a1^2 T^2/(32 A2^2 T)) and
    T' = exp(min(a4^2, a1^2 T^2)/(32 A2^2 T)).
    """
    if part == "i":
        _need(p, "A2", "a1", "a2", "T")
        if not p.a2 - p.a1 * p.T < 0:
            raise ValueError("part i needs a2 - a1*T < 0")
        return math.exp(-((p.a2 - p.a1 * p.T) ** 2) / (4 * p.A2**2 * p.T))
    if part == "ii":
        _need(p, "A2", "a1", "a4", "T")
        if not p.a4 > 2 * p.A2:
            raise ValueError("part ii needs a4 > 2*A2")
        if not p.T > 2 * p.A2 / p.a1:
            raise ValueError("part ii needs T > 2*A2/a1")
        den = 32 * p.A2**2 * p.T
        a, b = p.a4**2, p.a1**2 * p.T**2
        return math.exp(-a / den) + math.exp(-b / den), math.exp(min(a, b) / den)
    raise ValueError("part must be 'i' or 'ii'")
