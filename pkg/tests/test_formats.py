import json
from fractions import Fraction

import numpy as np
import pytest

from erosion_lab import make_initial
from erosion_lab.formats import (comment_line, parse_cluster, parse_labeling_csv, parse_region,
                                 parse_snapshot, render_cluster, render_labeling_csv,
                                 render_region, render_snapshot, render_timeseries_csv)
from erosion_lab.idla import idla_run
from erosion_lab.sorting import random_labeling


def test_small_slab_snapshot():
    s = make_initial("slab", 2, 0.5)
    assert render_snapshot(s, 0) == "n=2 alpha=0.5 t=0\nRR\nBR\nBB\n"


@pytest.mark.parametrize("n", [2, 5, 13])
def test_snapshot_round_trip(n):
    g = np.random.default_rng(n)
    for _ in range(20):
        s = make_initial("bernoulli", n, Fraction(int(g.integers(3, 8)), 10), rng=g)
        t = int(g.integers(0, 10**6))
        back, t2 = parse_snapshot(render_snapshot(s, t) + comment_line({"seed": 1}))
        assert t2 == t and back.n == n and back.alpha == s.alpha
        assert np.array_equal(back.blue, s.blue)


def test_snapshot_alpha_from_string():
    s = make_initial("slab", 30, "0.3333")
    back, _ = parse_snapshot(render_snapshot(s, 5))
    assert back.alpha == Fraction(3333, 10000) and back.k == s.k


def test_snapshot_rejects_bad_grids():
    with pytest.raises(ValueError):
        parse_snapshot("n=2 alpha=0.5 t=0\nRR\nBB\n")
    with pytest.raises(ValueError):
        parse_snapshot("n=2 alpha=0.5 t=0\nRR\nBX\nBB\n")
    with pytest.raises(ValueError):
        parse_snapshot("alpha=0.5 t=0\nRR\nBR\nBB\n")
    with pytest.raises(ValueError):
        parse_snapshot("")


def test_region_round_trip():
    g = np.random.default_rng(3)
    for n in (2, 4, 9):
        mask = g.random(n * (n + 1)) < 0.4
        for header in (True, False):
            n2, back = parse_region(render_region(mask, n, header=header))
            assert n2 == n and np.array_equal(back, mask)
    assert render_region(np.arange(6) < 2, 2, header=False) == "00\n00\n11\n"
    with pytest.raises(ValueError):
        parse_region("n=3\n000\n000\n")


def test_cluster_round_trip():
    c = idla_run(5, (0, 2), 30, 4)
    text = render_cluster(c.grid, 30, True, False, extra={"seed": 4})
    meta, grid = parse_cluster(text)
    assert meta["t"] == 30 and meta["seed"] == 4 and meta["max_row"] == c.max_row
    assert meta["contained_low"] is True and meta["contained_high"] is False
    assert np.array_equal(grid, c.grid[: c.max_row + 1])
    meta, grid = parse_cluster(render_cluster(np.zeros((3, 4), dtype=bool), 0))
    assert meta["max_row"] == -1 and grid.size == 0


def test_labeling_csv_round_trip():
    lab = random_labeling(4, 2)
    text = render_labeling_csv(lab)
    lines = text.splitlines()
    assert lines[0] == "col,row,label" and len(lines) == 21
    assert lines[1].startswith("0,0,") and lines[5].startswith("0,1,")
    assert parse_labeling_csv(comment_line({"x": 1}) + text) == lab


def test_timeseries_columns():
    flags = {"A": [1, 0], "G": [1, 1], "Gamma": [0, 1], "Omega": [1, 1], "sym_diff": [0, 4]}
    text = render_timeseries_csv([0, 1], [30, 27], 3, flags)
    assert text.splitlines() == ["t,h,in_A,in_G,in_Gamma,in_Omega,sym_diff",
                                 "0,10.0,1,1,0,1,0", "1,9.0,0,1,1,1,4"]


def test_comment_line_is_json():
    line = comment_line({"b": 2, "a": [1]})
    assert line.startswith("# ") and json.loads(line[2:]) == {"a": [1], "b": 2}
