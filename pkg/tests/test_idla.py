import math
import random
from fractions import Fraction

import numpy as np
import pytest

from erosion_lab import Coloring, make_initial
from erosion_lab.cylinder import num_sites
from erosion_lab.idla import (PhiMap, containment_event, coupled_containment_run, idla_run,
                              normalize_cluster)
from erosion_lab.rng import RngStream

# containment rate of an independent pure-Python IDLA over 100 seeds (n=50, k=0.5, eps=0.2)
REFERENCE_RATE = 1.00


def python_idla(n, t, rnd, initial_rows=()):
    """Hash-set IDLA with the reflected walk; independent of the compiled kernel."""
    occ = {(c, r) for r in initial_rows for c in range(n)}
    for _ in range(t):
        c, r = rnd.randrange(n), 0
        while (c, r) in occ:
            u = rnd.random()
            if u < 0.25:
                c = (c - 1) % n
            elif u < 0.5:
                c = (c + 1) % n
            elif u < 0.75:
                r = r - 1 if r > 0 else 1
            else:
                r += 1
        occ.add((c, r))
    return occ


def test_phi_map():
    phi = PhiMap((1, 3))
    assert [phi.forward(i) for i in range(5)] == [0, 2, 4, 5, 6]
    assert phi.inverse(4) == 2 and phi.inverse(0) == 0
    with pytest.raises(ValueError):
        phi.inverse(3)
    assert PhiMap((0,)).forward(0) == 1
    ident = PhiMap(())
    assert all(ident.forward(i) == i == ident.inverse(i) for i in range(10))


def test_zero_particles():
    cl = idla_run(6, (0, 2), 0, 1)
    assert cl.occupied == {(c, r) for r in (0, 2) for c in range(6)}
    assert normalize_cluster(cl).sum() == 0


def test_two_particles_on_small_cylinder():
    cl = idla_run(2, (), 2, 5)
    assert len(cl) == 2 and cl.particles_placed == 2


def test_second_particle_law_on_small_cylinder():
    # first particle sits at (c,0); the second fills row 0 w.p. 1/2 + 1/2 * 1/2
    hits = sum(idla_run(2, (), 2, RngStream(8, 0, i)).grid[0].all() for i in range(20_000))
    p = hits / 20_000
    assert abs(p - 0.75) <= 3 * math.sqrt(0.75 * 0.25 / 20_000)


@pytest.mark.parametrize("rows", [(), (0,), (1, 3), (0, 1, 2)])
def test_counts_and_normalisation(rows):
    n, t = 7, 60
    cl = idla_run(n, rows, t, RngStream(3, len(rows)))
    assert len(cl) == t + n * len(rows)
    for r in rows:
        assert cl.grid[r].all()
    A = normalize_cluster(cl)
    assert A.sum() == t
    phi = PhiMap(rows)
    for c, r in cl.occupied:
        if r in rows:
            continue
        assert A[phi.inverse(r), c]


def test_normalise_shift_examples():
    cl = idla_run(4, (0,), 0, 0)
    cl.grid[1, 2] = True
    assert normalize_cluster(cl)[0, 2]
    cl = idla_run(4, (1, 3), 0, 0)
    cl.grid[4, 1] = True
    A = normalize_cluster(cl)
    assert A[2, 1] and A.sum() == 1


def test_normalise_detects_missing_initial_row():
    cl = idla_run(4, (1,), 3, 0)
    cl.grid[1, 0] = False
    with pytest.raises(ValueError):
        normalize_cluster(cl)


def test_clusters_grow_monotonically():
    n = 6
    prev = idla_run(n, (2,), 0, 11).grid
    for t in range(1, 40):
        cur = idla_run(n, (2,), t, 11).grid
        h = prev.shape[0]
        assert not (prev & ~cur[:h]).any()
        assert cur.sum() == prev.sum() + 1
        prev = cur


def test_killed_cluster_stays_below_line():
    n = 8
    for seed in range(20):
        cl = idla_run(n, (), 200, RngStream(4, seed), kill_row=5)
        assert cl.max_row < 5
        assert len(cl) + cl.killed == 200 and cl.killed > 0


def test_too_many_initial_rows():
    with pytest.raises(ValueError):
        idla_run(3, (0, 1, 2, 3), 1, 0)
    with pytest.raises(ValueError):
        idla_run(3, (-1,), 1, 0)


def test_agrees_with_independent_implementation():
    n, t, runs = 6, 40, 3000
    ours = [idla_run(n, (1,), t, RngStream(21, 0, i)).max_row for i in range(runs)]
    rnd = random.Random(77)
    theirs = [max(r for _, r in python_idla(n, t, rnd, (1,))) for _ in range(runs)]
    a, b = np.array(ours, float), np.array(theirs, float)
    se = math.sqrt(a.var(ddof=1) / runs + b.var(ddof=1) / runs)
    assert abs(a.mean() - b.mean()) <= 4 * se


def test_containment_event_edges():
    n, k, eps = 10, Fraction(1, 2), Fraction(1, 5)
    A = np.zeros((8, n), dtype=bool)
    A[:5] = True  # rows 0..4; lower needs rows 0..4, upper allows up to row 6
    assert containment_event(A, n, k, eps) == (True, True)
    A[6, 3] = True
    assert containment_event(A, n, k, eps) == (True, True)
    A[7, 3] = True
    assert containment_event(A, n, k, eps) == (True, False)
    A[4, 0] = False
    assert containment_event(A, n, k, eps) == (False, False)


def test_containment_rate_matches_reference():
    n, k, eps = 50, 0.5, 0.2
    t = int(k * n * n)
    hits = 0
    for seed in range(100):
        cl = idla_run(n, (), t, RngStream(12345, seed))
        hits += all(containment_event(normalize_cluster(cl), n, k, eps))
    assert abs(hits / 100 - REFERENCE_RATE) <= 0.05


def test_containment_with_initial_rows():
    n, k, eps = 30, 0.5, 0.25
    t = int(k * n * n)
    hits = 0
    for seed in range(40):
        cl = idla_run(n, (0, 4, 9, 10), t, RngStream(6, seed))
        hits += all(containment_event(normalize_cluster(cl), n, k, eps))
    assert hits >= 36


@pytest.mark.parametrize("seed", range(5))
def test_coupled_containments(seed):
    s = make_initial("bernoulli", 10, 0.4, rng=seed)
    rep = coupled_containment_run(s, 500, RngStream(seed))
    assert rep.all_hold and rep.monotone_pair is None


def test_coupled_monotone_initial_condition():
    n = 10
    s = make_initial("slab", n, Fraction(3, 10))
    bigger = s.blue.copy()
    bigger[np.flatnonzero(~s.blue)[:7]] = True
    dom = Coloring(n, bigger, Fraction(int(bigger.sum()), num_sites(n)))
    for seed in range(5):
        rep = coupled_containment_run(s, 500, RngStream(seed, 1), dominating=dom)
        assert rep.all_hold and rep.monotone_pair


def test_coupled_rejects_bad_dominating():
    s = make_initial("slab", 6, 0.5)
    other = make_initial("antislab", 6, 0.5)
    with pytest.raises(ValueError):
        coupled_containment_run(s, 3, 0, dominating=other)


def test_coupled_run_is_reproducible():
    s = make_initial("bernoulli", 8, 0.5, rng=2)
    a = coupled_containment_run(s, 100, RngStream(4))
    b = coupled_containment_run(s, 100, RngStream(4))
    assert a == b
