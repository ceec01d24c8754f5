import numpy as np
import pytest

from erosion_lab.cylinder import (Site, all_sites, index, is_star_connected, neighbor_table,
                                  neighbors, site_of, star_neighbors, transition_matrix)


def test_interior_neighbors():
    assert sorted(neighbors((1, 2), 4)) == sorted([(0, 2), (2, 2), (1, 1), (1, 3)])


def test_bottom_corner_has_self_loop():
    assert sorted(neighbors((0, 0), 4)) == sorted([(3, 0), (1, 0), (0, 1), (0, 0)])


def test_top_row_self_loop():
    assert (2, 4) in neighbors((2, 4), 4)
    assert len(neighbors((2, 4), 4)) == 4


def test_wraparound():
    assert (0, 2) in neighbors((3, 2), 4)


@pytest.mark.parametrize("bad", [(4, 0), (0, 5), (-1, 2), (0, -1)])
def test_invalid_site(bad):
    with pytest.raises(ValueError):
        neighbors(bad, 4)


def test_size_below_two_rejected():
    with pytest.raises(ValueError):
        neighbors((0, 0), 1)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_symmetric_with_multiplicity(n):
    for v in all_sites(n):
        for w in set(neighbors(v, n)):
            assert neighbors(v, n).count(w) == neighbors(w, n).count(v)


@pytest.mark.parametrize("n", [2, 3, 7])
def test_transition_rows_sum_to_one(n):
    P = transition_matrix(n)
    assert np.allclose(np.asarray(P.sum(axis=1)).ravel(), 1.0)
    # symmetric kernel, so uniform measure is stationary
    assert abs(P - P.T).max() < 1e-15


def test_neighbor_table_matches_neighbors():
    n = 5
    nbr = neighbor_table(n)
    for v in all_sites(n):
        got = sorted(site_of(int(w), n) for w in nbr[index(v, n)])
        assert got == sorted(neighbors(v, n))


def test_star_neighbors_counts():
    assert len(star_neighbors((1, 2), 4)) == 8
    assert len(star_neighbors((0, 0), 4)) == 5


def test_star_neighbors_small_cylinder():
    # on C_2 the left and right neighbours coincide, so only 5 distinct sites remain
    got = set(star_neighbors((0, 1), 2))
    assert got == {(1, 1), (0, 0), (0, 2), (1, 0), (1, 2)}
    assert len(star_neighbors((0, 1), 2)) == len(got)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_star_contains_lattice_neighbors(n):
    for v in all_sites(n):
        assert set(neighbors(v, n)) - {v} <= set(star_neighbors(v, n))
        assert v not in star_neighbors(v, n)


def test_star_connectivity():
    assert is_star_connected({(0, 0), (1, 1)}, 4)
    assert not is_star_connected({(0, 0), (2, 0)}, 4)
    assert is_star_connected(set(), 4)
    assert is_star_connected({(3, 0), (0, 1)}, 4)  # diagonal across the seam


def test_site_fields():
    s = Site(2, 3)
    assert s.col == 2 and s.row == 3
    assert site_of(index(s, 5), 5) == s
