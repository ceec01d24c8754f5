"""Monochromatic reachability regions and the interface profiles built on them.

R1 is the blue cluster of the bottom row, R2 the red cluster of the top row.
The truncated versions forbid paths that touch the opposite boundary row.
Column profiles record, per column, the lowest row that leaves the truncated
blue region (``y_star``) and the highest row that leaves the truncated red
region (``y_star_star``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cylinder import Site, check_size, is_star_connected, neighbor_table, num_sites, sites_from_mask


@dataclass(frozen=True)
class Region:
    """A site subset of Cyl_n, stored as a flat bool mask."""

    n: int
    mask: np.ndarray

    def __post_init__(self):
        check_size(self.n)
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (num_sites(self.n),):
            raise ValueError("region mask has the wrong shape")
        object.__setattr__(self, "mask", m)

    @classmethod
    def from_sites(cls, sites, n):
        from .cylinder import mask_from_sites
        return cls(n, mask_from_sites(sites, n))

    @property
    def members(self) -> set[Site]:
        return sites_from_mask(self.mask, self.n)

    def __contains__(self, site):
        c, r = site
        return 0 <= c < self.n and 0 <= r <= self.n and bool(self.mask[r * self.n + c])

    def __len__(self):
        return int(self.mask.sum())

    def grid(self) -> np.ndarray:
        return self.mask.reshape(self.n + 1, self.n)


@dataclass(frozen=True)
class Regions:
    R1: Region
    R2: Region
    R1_trunc: Region
    R2_trunc: Region


@dataclass(frozen=True)
class ColumnProfile:
    """Per-column interface rows (integers; divide by n for heights).

    ``y_star_rows[k]`` is the lowest row of column k outside the truncated
    blue region, ``y_star_star_rows[k]`` the highest row outside the
    truncated red region.  The truncated regions never contain row n (blue)
    or row 0 (red), so both are always defined.
    """

    n: int
    y_star_rows: np.ndarray
    y_star_star_rows: np.ndarray

    @property
    def y_star(self) -> np.ndarray:
        return self.y_star_rows / self.n

    @property
    def y_star_star(self) -> np.ndarray:
        return self.y_star_star_rows / self.n


@dataclass(frozen=True)
class OuterBoundary:
    n: int
    sites: frozenset
    y_low_rows: np.ndarray
    y_high_rows: np.ndarray
    heights: tuple

    @property
    def y_low(self):
        return self.y_low_rows / self.n

    @property
    def y_high(self):
        return self.y_high_rows / self.n


def _row_mask(n, r):
    m = np.zeros(num_sites(n), dtype=bool)
    m[r * n:(r + 1) * n] = True
    return m


def reach_regions(state) -> Regions:
    """R1, R2 and their truncated versions for a colouring."""
    n = state.n
    nbr = neighbor_table(n)
    blue = np.ascontiguousarray(state.blue)
    red = ~blue
    bottom, top = _row_mask(n, 0), _row_mask(n, n)
    r1 = _kernels.reach(blue, bottom, nbr)
    r2 = _kernels.reach(red, top, nbr)
    r1t = _kernels.reach(blue & ~top, bottom, nbr)
    r2t = _kernels.reach(red & ~bottom, top, nbr)
    return Regions(Region(n, r1), Region(n, r2), Region(n, r1t), Region(n, r2t))


def column_profiles(state, regions: Regions | None = None) -> ColumnProfile:
    """y*_k and y**_k for every column."""
    n = state.n
    reg = regions if regions is not None else reach_regions(state)
    g1 = reg.R1_trunc.grid()
    g2 = reg.R2_trunc.grid()
    # first False going up / last False going down
    ystar = np.argmin(g1, axis=0)
    ystarstar = n - np.argmin(g2[::-1], axis=0)
    return ColumnProfile(n, ystar.astype(np.int64), ystarstar.astype(np.int64))


def boundary_mask(r1_trunc: Region) -> np.ndarray:
    """Vertex boundary of ``R~1`` plus the phantom row below row 0."""
    n = r1_trunc.n
    inside = r1_trunc.mask
    nbr = neighbor_table(n)
    touches = inside[nbr].any(axis=1)
    out = touches & ~inside
    out[:n] |= ~inside[:n]
    return out


def outer_boundary(r1_trunc: Region, n: int | None = None) -> OuterBoundary:
    """Part of the boundary of ``R~1`` visible from the top row.

    Visibility uses ordinary adjacency inside ``Cyl_n \\ R~1``.  The result
    is checked to be *-connected.
    """
    n = r1_trunc.n if n is None else check_size(n)
    if n != r1_trunc.n:
        raise ValueError("region size does not match n")
    inside = r1_trunc.mask
    if inside[-n:].any():
        raise ValueError("truncated blue region touches the top row")
    visible = _kernels.reach(~inside, _row_mask(n, n), neighbor_table(n))
    bmask = boundary_mask(r1_trunc) & visible
    sites = sites_from_mask(bmask, n)
    grid = bmask.reshape(n + 1, n)
    if not grid.any(axis=0).all():
        raise AssertionError("outer boundary misses a column")
    y_low = np.argmax(grid, axis=0)
    y_high = n - np.argmax(grid[::-1], axis=0)
    rows = np.flatnonzero(grid.any(axis=1))
    if not is_star_connected(sites, n):
        raise AssertionError("outer boundary is not *-connected")
    return OuterBoundary(n, frozenset(sites), y_low.astype(np.int64),
                         y_high.astype(np.int64), tuple(int(r) for r in rows))
