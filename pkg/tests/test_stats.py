import math
from fractions import Fraction

import numpy as np
import pytest

from erosion_lab import make_initial, run_chain
from erosion_lab.errors import ResourceLimitError
from erosion_lab.regions import column_profiles
from erosion_lab.rng import RngStream
from erosion_lab.stats import (BoundParams, RunningStats, azuma_bounds, drift_exact,
                               drift_from_exit_heights, drift_mc, exact_step_kernel,
                               hitstation_bound, hitting_time, occupancy)


def random_states(n, count, seed):
    g = np.random.default_rng(seed)
    out = []
    for i in range(count):
        s = make_initial("bernoulli", n, Fraction(int(g.integers(2, 9)), 10), rng=g)
        if i % 3 == 0:
            s, _ = run_chain(s, int(g.integers(1, 3 * n)), g, record=False)
        out.append(s)
    return out


def test_running_stats_merge():
    x = np.random.default_rng(0).normal(size=1000)
    whole = RunningStats().add(x)
    parts = RunningStats().add(x[:300]).merge(RunningStats().add(x[300:]))
    assert parts.count == whole.count
    assert parts.mean == pytest.approx(x.mean())
    assert parts.std == pytest.approx(x.std(ddof=1))
    assert whole.stderr == pytest.approx(x.std(ddof=1) / math.sqrt(1000))


def test_exact_kernel_is_a_law():
    for s in random_states(4, 20, 1):
        law = exact_step_kernel(s)
        assert sum(law.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(len(k) == s.k for k in law)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_drift_exact_lower_bound(n):
    for s in random_states(n, 200, 10 + n):
        assert drift_exact(s).mean >= -1 / n - 1e-8


def test_slab_drift_bound():
    s = make_initial("slab", 4, Fraction(1, 2))
    d = drift_exact(s)
    assert d.method == "exact" and d.stderr == 0
    assert d.mean >= -1 / 4 - 1e-8
    mc = drift_mc(s, 20_000, RngStream(3))
    assert mc.mean >= -1 / 4 - 3 * mc.stderr


@pytest.mark.parametrize("n", [4, 6, 8])
def test_two_drift_formulas_agree(n):
    for s in random_states(n, 25, 20 + n):
        assert drift_from_exit_heights(s) == pytest.approx(drift_exact(s).mean, abs=1e-9)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_drift_exceeds_profile_gap(n):
    for s in random_states(n, 60, 30 + n):
        prof = column_profiles(s)
        gap = (prof.y_star_star.sum() - prof.y_star.sum()) / n
        assert drift_exact(s).mean >= gap - 1e-9


def test_exact_matches_monte_carlo():
    misses = []
    for i, s in enumerate(random_states(8, 50, 77)):
        ex = drift_exact(s).mean
        mc = drift_mc(s, 4000, RngStream(40, i))
        assert mc.samples == 4000 and mc.method == "monte_carlo"
        misses.append(abs(mc.mean - ex) / mc.stderr)
    assert max(misses) <= 3


def test_vertical_stripe_drift_positive():
    s = make_initial("vertical", 30, Fraction(1, 2))
    d = drift_mc(s, 10_000, RngStream(41))
    assert d.mean > 3 * d.stderr


def test_drift_preconditions():
    s = make_initial("slab", 21, 0.5)
    with pytest.raises(ResourceLimitError):
        drift_exact(s)
    with pytest.raises(ValueError):
        drift_mc(make_initial("slab", 4, 0.5), 50)


def test_hitting_time_start_in_target():
    s = make_initial("slab", 10, Fraction(4, 11))
    r = hitting_time(s, "A", Fraction(1, 5), 5, 0)
    assert r.time == 0 and not r.timed_out


def test_hitting_time_timeout():
    s = make_initial("antislab", 20, Fraction(1, 3))
    r = hitting_time(s, "A", Fraction(1, 20), 3, RngStream(1))
    assert r.timed_out and r.time is None and r.cap == 3
    with pytest.raises(ValueError):
        hitting_time(s, "A", 0.1, 0)
    with pytest.raises(ValueError):
        hitting_time(s, "B", 0.1, 10)


def test_hitting_time_reproducible_and_ordered():
    s = make_initial("antislab", 12, Fraction(1, 3))
    eps = Fraction(1, 5)
    for seed in range(10):
        a = hitting_time(s, "Gamma", eps, 5000, RngStream(2, seed))
        b = hitting_time(s, "Omega", eps, 5000, RngStream(2, seed))
        assert a == hitting_time(s, "Gamma", eps, 5000, RngStream(2, seed))
        assert not a.timed_out and not b.timed_out
        assert a.time <= b.time


def test_occupancy_reports():
    s = make_initial("bernoulli", 10, Fraction(4, 11), rng=0)
    rep = occupancy(s, ["all", "A", "G", "Gamma", "Omega"], Fraction(1, 5), 200, 3000, RngStream(3))
    f = rep.fractions
    assert f["all"] == 1.0
    assert all(0 <= v <= 1 for v in f.values())
    assert f["Gamma"] >= f["Omega"] and f["Gamma"] >= f["G"]
    assert rep.steps == 3000 and rep.burn_in == 200
    with pytest.raises(ValueError):
        occupancy(s, ["X"], 0.1, 0, 10)
    with pytest.raises(ValueError):
        occupancy(s, ["A"], 0.1, 0, 0)


def test_hitstation_examples():
    assert hitstation_bound(BoundParams(t1=1, t2=10, p1=0, p2=0)) == pytest.approx(0.1, abs=1e-12)
    assert hitstation_bound(BoundParams(t1=0, t2=7, p1=0.2, p2=0.3)) == pytest.approx(0.5, abs=1e-12)
    n = 30
    p = BoundParams(t1=n * n, t2=math.exp(n), p1=math.exp(-n * n), p2=math.exp(-n * n))
    assert hitstation_bound(p) == pytest.approx(900 * math.exp(-30) + 2 * math.exp(-900), rel=1e-12)
    with pytest.raises(ValueError):
        hitstation_bound(BoundParams(t1=1, t2=0, p1=0, p2=0))
    with pytest.raises(ValueError):
        hitstation_bound(BoundParams(t1=1, t2=2))


def test_azuma_examples():
    assert azuma_bounds(BoundParams(A2=1, a1=1, a2=0, T=4), "i") == pytest.approx(math.exp(-1), abs=1e-12)
    fail, T2 = azuma_bounds(BoundParams(A2=1, a1=1, a4=4, T=3), "ii")
    assert fail == pytest.approx(math.exp(-16 / 96) + math.exp(-9 / 96), abs=1e-12)
    assert T2 == pytest.approx(math.exp(9 / 96), abs=1e-12)


def test_azuma_preconditions():
    with pytest.raises(ValueError):
        azuma_bounds(BoundParams(A2=1, a1=1, a2=5, T=4), "i")
    with pytest.raises(ValueError):
        azuma_bounds(BoundParams(A2=1, a1=1, a4=2, T=3), "ii")
    with pytest.raises(ValueError):
        azuma_bounds(BoundParams(A2=1, a1=1, a4=4, T=2), "ii")
    with pytest.raises(ValueError):
        azuma_bounds(BoundParams(A2=1, a1=1, a2=0, T=4), "iii")


@pytest.mark.parametrize("a1", [0.05, 0.3, 0.86])
def test_azuma_drift_sanity(a1):
    n = 30
    p = BoundParams(A1=n * n, A2=1, a1=a1, a2=n * n, T=2 * n * n / a1)
    bound = azuma_bounds(p, "i")
    target = math.exp(-a1 * n * n / 8)
    assert bound <= target * (1 + 1e-12)
    assert bound == pytest.approx(target, rel=1e-12)
