"""The discrete cylinder C_n x P_n and its diagonal-augmented variant.

Sites are integer pairs ``(col, row)`` with ``0 <= col < n`` (circular) and
``0 <= row <= n``; the real coordinates are ``x = col/n`` and ``y = row/n``.
Rows 0 and n carry a self-loop so every site has exactly four neighbour
slots.

Array-based code uses the flat index ``row * n + col``.
"""
from __future__ import annotations

from collections import deque
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np


class Site(NamedTuple):
    col: int
    row: int


# neighbour slot order in the flat tables
LEFT, RIGHT, DOWN, UP = 0, 1, 2, 3


def check_size(n) -> int:
    if int(n) != n or n < 2:
        raise ValueError(f"cylinder size must be an integer >= 2, got {n!r}")
    return int(n)


def check_site(site, n: int) -> Site:
    n = check_size(n)
    col, row = site
    if not (0 <= col < n and 0 <= row <= n):
        raise ValueError(f"site {tuple(site)} is not on Cyl_{n}")
    return Site(int(col), int(row))


def num_sites(n: int) -> int:
    return n * (n + 1)


def index(site, n: int) -> int:
    return site[1] * n + site[0]


def site_of(idx: int, n: int) -> Site:
    return Site(idx % n, idx // n)


def all_sites(n: int) -> list[Site]:
    """Every site of Cyl_n, ordered by ``(row, col)``."""
    return [Site(c, r) for r in range(n + 1) for c in range(n)]


def neighbors(site, n: int) -> list[Site]:
    """The four neighbour slots of `site`, self-loops included.

    Boundary rows replace the missing vertical neighbour by the site itself,
    so the uniform choice among the returned list is the walk kernel.
    """
    col, row = check_site(site, n)
    down = Site(col, row - 1) if row > 0 else Site(col, row)
    up = Site(col, row + 1) if row < n else Site(col, row)
    return [Site((col - 1) % n, row), Site((col + 1) % n, row), down, up]


def star_neighbors(site, n: int) -> list[Site]:
    """Distinct neighbours of `site` in Cyl*_n (lattice plus diagonal edges).

    No self-loops. For ``n = 2`` wrap-around duplicates collapse, so an
    interior site has 5 rather than 8 neighbours.
    """
    col, row = check_site(site, n)
    out: list[Site] = []
    for dc, dr in ((-1, 0), (1, 0), (0, -1), (0, 1),
                   (-1, -1), (1, -1), (-1, 1), (1, 1)):
        r = row + dr
        if not 0 <= r <= n:
            continue
        s = Site((col + dc) % n, r)
        if s != (col, row) and s not in out:
            out.append(s)
    return out


def is_star_connected(sites: Iterable, n: int) -> bool:
    """True iff `sites` induce a single component of Cyl*_n (empty -> True)."""
    members = {Site(*s) for s in sites}
    if not members:
        return True
    start = next(iter(members))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in star_neighbors(v, n):
            if w in members and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(members)


@lru_cache(maxsize=None)
def neighbor_table(n: int) -> np.ndarray:
    """``(N, 4)`` int64 table of flat neighbour indices (left, right, down, up)."""
    n = check_size(n)
    N = num_sites(n)
    idx = np.arange(N)
    col, row = idx % n, idx // n
    tab = np.empty((N, 4), dtype=np.int64)
    tab[:, LEFT] = row * n + (col - 1) % n
    tab[:, RIGHT] = row * n + (col + 1) % n
    tab[:, DOWN] = np.where(row > 0, idx - n, idx)
    tab[:, UP] = np.where(row < n, idx + n, idx)
    tab.setflags(write=False)
    return tab


@lru_cache(maxsize=None)
def transition_matrix(n: int):
    """Sparse (CSR) transition matrix of simple random walk on Cyl_n."""
    from scipy import sparse

    tab = neighbor_table(n)
    N = tab.shape[0]
    rows = np.repeat(np.arange(N), 4)
    P = sparse.csr_matrix((np.full(4 * N, 0.25), (rows, tab.ravel())), shape=(N, N))
    P.sum_duplicates()
    return P


def row_of(n: int) -> np.ndarray:
    """Row index of every flat site."""
    return np.arange(num_sites(n)) // n


def heights(n: int) -> np.ndarray:
    """``y = row/n`` for every flat site."""
    return row_of(n) / n


def mask_from_sites(sites: Iterable, n: int) -> np.ndarray:
    mask = np.zeros(num_sites(n), dtype=bool)
    for s in sites:
        mask[index(check_site(s, n), n)] = True
    return mask


def sites_from_mask(mask: np.ndarray, n: int) -> set[Site]:
    return {site_of(int(i), n) for i in np.flatnonzero(mask)}
