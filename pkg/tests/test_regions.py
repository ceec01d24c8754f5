from fractions import Fraction

import numpy as np
import pytest

from erosion_lab import Coloring, erosion_step, make_initial, run_chain
from erosion_lab.cylinder import is_star_connected, num_sites
from erosion_lab.regions import Region, column_profiles, outer_boundary, reach_regions


def sample_states(n, count, seed):
    """Mix of Bernoulli colourings and states taken along chain runs."""
    g = np.random.default_rng(seed)
    out = []
    for i in range(count):
        alpha = Fraction(int(g.integers(2, 9)), 10)
        s = make_initial("bernoulli", n, alpha, rng=g)
        if i % 2:
            s, _ = run_chain(s, int(g.integers(1, 4 * n)), g, record=False)
        out.append(s)
    return out


def test_slab_regions():
    s = make_initial("slab", 4, Fraction(2, 5))
    reg = reach_regions(s)
    assert np.array_equal(reg.R1.mask, s.blue)
    assert np.array_equal(reg.R2.mask, ~s.blue)
    assert np.array_equal(reg.R1_trunc.mask, s.blue)
    prof = column_profiles(s, reg)
    assert prof.y_star_rows.tolist() == [2, 2, 2, 2]
    assert prof.y_star_star_rows.tolist() == [1, 1, 1, 1]
    assert np.allclose(prof.y_star, 0.5)


def test_partial_slab_profile():
    s = make_initial("slab", 4, Fraction(1, 2))  # 10 blue: rows 0, 1 and (0,2), (1,2)
    prof = column_profiles(s)
    assert prof.y_star_rows.tolist() == [3, 3, 2, 2]
    assert prof.y_star_star_rows.tolist() == [2, 2, 1, 1]


def test_islands_excluded():
    n = 8
    g = np.zeros((n + 1, n), dtype=bool)
    g[:3] = True
    g[6, 2] = True                 # blue island inside the red part
    g[5, 5:7] = True               # second blue island
    g[1, 4] = False                # red island inside the blue part
    g[0, 0] = False
    s = Coloring(n, g.ravel(), Fraction(int(g.sum()), num_sites(n)))
    reg = reach_regions(s)
    assert (2, 6) not in reg.R1 and (5, 5) not in reg.R1
    assert (4, 1) not in reg.R2 and (4, 1) not in reg.R1
    assert (0, 0) not in reg.R2  # red, but cut off from the top
    assert len(reg.R1) == 3 * n - 2 and len(reg.R2) == int((~g).sum()) - 2


def test_blue_column_touching_top():
    n = 6
    g = np.zeros((n + 1, n), dtype=bool)
    g[:2] = True
    g[:, 3] = True
    s = Coloring(n, g.ravel(), Fraction(int(g.sum()), num_sites(n)))
    reg = reach_regions(s)
    assert (3, n) in reg.R1
    assert (3, n) not in reg.R1_trunc
    assert (3, n - 1) in reg.R1_trunc
    prof = column_profiles(s, reg)
    assert prof.y_star_rows[3] == n
    # column 3 is blue at the top, so the red region misses it entirely
    assert prof.y_star_star_rows[3] == n


def test_region_validation():
    with pytest.raises(ValueError):
        Region(4, np.zeros(7, dtype=bool))
    r = Region.from_sites({(1, 2), (0, 0)}, 3)
    assert len(r) == 2 and (1, 2) in r and (5, 0) not in r
    assert r.members == {(1, 2), (0, 0)}


@pytest.mark.parametrize("n", [2, 5, 9])
def test_region_relations(n):
    for s in sample_states(n, 200, n):
        reg = reach_regions(s)
        assert not (reg.R1_trunc.mask & ~reg.R1.mask).any()
        assert not (reg.R2_trunc.mask & ~reg.R2.mask).any()
        assert not (reg.R1_trunc.mask & reg.R2_trunc.mask).any()
        assert not reg.R1_trunc.grid()[n].any() and not reg.R2_trunc.grid()[0].any()
        assert not (reg.R1.mask & ~s.blue).any() and not (reg.R2.mask & s.blue).any()


@pytest.mark.parametrize("n", [3, 6, 10])
def test_profile_gap_at_most_one_row(n):
    for s in sample_states(n, 300, 100 + n):
        prof = column_profiles(s)
        assert (prof.y_star_star_rows - prof.y_star_rows >= -1).all()


def test_half_step_raises_y_star_star():
    g = np.random.default_rng(4)
    for s in sample_states(7, 300, 9):
        before = column_profiles(s).y_star_star_rows
        _, tr = erosion_step(s, g)
        after = column_profiles(tr.intermediate).y_star_star_rows
        assert (after >= before).all()


def test_outer_boundary_slab():
    s = make_initial("slab", 6, Fraction(3, 7))  # 18 blue sites, rows 0..2
    ob = outer_boundary(reach_regions(s).R1_trunc)
    assert ob.sites == frozenset((c, 3) for c in range(6))
    assert ob.heights == (3,)
    assert (ob.y_low_rows == 3).all() and (ob.y_high_rows == 3).all()


def test_outer_boundary_empty_region():
    # every bottom site red: the phantom row makes row 0 the boundary
    n = 4
    g = np.zeros((n + 1, n), dtype=bool)
    g[2:4] = True
    s = Coloring(n, g.ravel(), Fraction(8, 20))
    ob = outer_boundary(reach_regions(s).R1_trunc)
    assert ob.sites == frozenset((c, 0) for c in range(n))


@pytest.mark.parametrize("n", [6, 10, 16])
def test_outer_boundary_properties(n):
    for s in sample_states(n, 10_000, 7 * n):
        reg = reach_regions(s)
        ob = outer_boundary(reg.R1_trunc)
        assert is_star_connected(ob.sites, n)
        rows = ob.heights
        assert rows == tuple(range(rows[0], rows[-1] + 1))
        prof = column_profiles(s, reg)
        assert (prof.y_star_rows <= ob.y_low_rows).all()
        yss = prof.y_star_star_rows
        best = np.maximum(np.maximum(np.roll(yss, 1), yss), np.roll(yss, -1))
        assert (ob.y_high_rows - 1 <= best).all()


def test_outer_boundary_rejects_top_row():
    with pytest.raises(ValueError):
        outer_boundary(Region(3, np.ones(12, dtype=bool)))
