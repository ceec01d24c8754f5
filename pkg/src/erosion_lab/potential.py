"""Discrete potential theory on Cyl_n and on general regular graphs.

Conventions
-----------
Cylinder Laplacian: ``(Delta F)(v) = F(v) - (1/4) sum_{w~v} F(w)`` with the
self-loop counted as a neighbour.  General graphs use
``(Delta g)(x) = (1/r) sum_{y~x} (g(x) - g(y))``; the two agree on Cyl_n.

Flows are stored per undirected edge with a fixed orientation:

* ``horizontal[r, c] = f((c, r), (c+1, r))``, shape ``(n+1, n)``
* ``vertical[r, c] = f((c, r), (c, r+1))``, shape ``(n, n)``

so antisymmetry is structural and self-loops carry nothing.  ``f(v, w)``
is minus the mass sent from v to w; divergence is ``sum_w f(w, v)``.

All solves are sparse direct factorisations with an explicit residual check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu

from .cylinder import (check_size, heights, neighbor_table, num_sites,
                       transition_matrix)
from .errors import SolverError
from .regions import ColumnProfile, Region, column_profiles, reach_regions

RESIDUAL_TOL = 1e-10


def _mask(A, n):
    if isinstance(A, Region):
        if A.n != n:
            raise ValueError("region size does not match n")
        return A.mask
    m = np.asarray(A, dtype=bool)
    if m.shape != (num_sites(n),):
        raise ValueError("region mask has the wrong shape")
    return m


def _killed_system(m, n):
    """``I - P_AA`` and ``P_{A, A^c}`` for the walk killed on leaving A."""
    P = transition_matrix(n)
    inside = np.flatnonzero(m)
    outside = np.flatnonzero(~m)
    if outside.size == 0:
        raise ValueError("region is the whole cylinder; the walk never exits")
    PA = P[inside]
    M = sparse.identity(inside.size, format="csc") - PA[:, inside].tocsc()
    return M, PA[:, outside], inside, outside


def _solve(M, b, transpose=False):
    lu = splu(M.tocsc())
    x = lu.solve(b, trans="T" if transpose else "N")
    res = (M.T @ x if transpose else M @ x) - b
    r = float(np.max(np.abs(res))) if res.size else 0.0
    if not np.all(np.isfinite(x)) or r > RESIDUAL_TOL:
        raise SolverError("linear solve missed the residual target", r)
    return x


def expected_exit_height(A, n: int) -> np.ndarray:
    """H_A(v) = E_v[y at the first exit from A], per flat site."""
    n = check_size(n)
    m = _mask(A, n)
    y = heights(n)
    H = y.copy()
    if not m.any():
        return H
    M, PAc, inside, outside = _killed_system(m, n)
    H[inside] = _solve(M, PAc @ y[outside])
    return H


def _check_avoids_top(m, n):
    if m[-n:].any():
        raise ValueError("region must not meet the top row")


def stopped_green(A, n: int) -> np.ndarray:
    """G_A = H_A - y for a region avoiding the top row."""
    n = check_size(n)
    m = _mask(A, n)
    _check_avoids_top(m, n)
    G = expected_exit_height(m, n) - heights(n)
    G[~m] = 0.0
    return G


def green_by_visits(A, n: int) -> np.ndarray:
    """G_A from its definition: (1/4n) E_v[# visits to row 0 before exit]."""
    n = check_size(n)
    m = _mask(A, n)
    G = np.zeros(num_sites(n))
    if not m.any():
        return G
    M, _, inside, _ = _killed_system(m, n)
    G[inside] = _solve(M, (inside < n) / (4.0 * n))
    return G


def exit_distribution(A, start, n: int) -> np.ndarray:
    """Law of the first site outside A for a walk started from `start`.

    `start` is a probability vector over flat sites or a single site.  Mass
    that starts outside A exits immediately where it stands.
    """
    n = check_size(n)
    m = _mask(A, n)
    N = num_sites(n)
    if isinstance(start, tuple) and len(start) == 2:
        mu = np.zeros(N)
        mu[start[1] * n + start[0]] = 1.0
    else:
        mu = np.asarray(start, dtype=float)
        if mu.shape != (N,):
            raise ValueError("start distribution has the wrong shape")
    out = np.where(m, 0.0, mu)
    if m.any() and mu[m].any():
        M, PAc, inside, outside = _killed_system(m, n)
        x = _solve(M, mu[inside], transpose=True)
        out[outside] += PAc.T @ x
    return out


def uniform_row(n: int, row: int) -> np.ndarray:
    mu = np.zeros(num_sites(n))
    mu[row * n:(row + 1) * n] = 1.0 / n
    return mu


def laplacian(F, n: int) -> np.ndarray:
    """Cylinder Laplacian with the 1/4 normalisation (self-loops included)."""
    F = np.asarray(F, dtype=float)
    return F - F[neighbor_table(n)].mean(axis=1)


# ---- flows ----------------------------------------------------------------

@dataclass
class Flow:
    n: int
    horizontal: np.ndarray = None
    vertical: np.ndarray = None

    def __post_init__(self):
        n = self.n = check_size(self.n)
        if self.horizontal is None:
            self.horizontal = np.zeros((n + 1, n))
        if self.vertical is None:
            self.vertical = np.zeros((n, n))
        self.horizontal = np.asarray(self.horizontal, dtype=float)
        self.vertical = np.asarray(self.vertical, dtype=float)
        if self.horizontal.shape != (n + 1, n) or self.vertical.shape != (n, n):
            raise ValueError("flow arrays have the wrong shape")

    @classmethod
    def from_directed(cls, values: dict, n: int) -> "Flow":
        """Build a flow from ``{(v, w): value}`` over directed edges.

        Both orientations may be given; they must be antisymmetric.  Self-loop
        entries must be zero.  Needs ``n >= 3`` (for n = 2 the two horizontal
        edges between a pair of sites are parallel and cannot be told apart).
        """
        n = check_size(n)
        if n < 3:
            raise ValueError("directed-edge input is ambiguous for n = 2")
        f = cls(n)
        seen = {}
        for (v, w), val in values.items():
            (c1, r1), (c2, r2) = v, w
            if (c1, r1) == (c2, r2):
                if val != 0:
                    raise ValueError(f"self-loop at {v} carries {val}")
                continue
            if r1 == r2 and (c2 - c1) % n == 1:
                key, sign = ("h", r1, c1), 1.0
            elif r1 == r2 and (c1 - c2) % n == 1:
                key, sign = ("h", r1, c2), -1.0
            elif c1 == c2 and r2 == r1 + 1:
                key, sign = ("v", r1, c1), 1.0
            elif c1 == c2 and r1 == r2 + 1:
                key, sign = ("v", r2, c1), -1.0
            else:
                raise ValueError(f"{v} -> {w} is not an edge of Cyl_{n}")
            canon = sign * float(val)
            if key in seen and abs(seen[key] - canon) > 1e-12:
                raise ValueError(f"antisymmetry fails on edge {v} -> {w}")
            seen[key] = canon
            arr = f.horizontal if key[0] == "h" else f.vertical
            arr[key[1], key[2]] = canon
        return f

    def value(self, v, w) -> float:
        """f(v, w) for adjacent sites (zero on self-loops)."""
        (c1, r1), (c2, r2) = v, w
        n = self.n
        if (c1, r1) == (c2, r2):
            return 0.0
        if r1 == r2 and (c2 - c1) % n == 1:
            return float(self.horizontal[r1, c1])
        if r1 == r2 and (c1 - c2) % n == 1:
            return -float(self.horizontal[r1, c2])
        if c1 == c2 and r2 == r1 + 1:
            return float(self.vertical[r1, c1])
        if c1 == c2 and r1 == r2 + 1:
            return -float(self.vertical[r2, c1])
        raise ValueError(f"{v} -> {w} is not an edge of Cyl_{n}")

    def divergence(self) -> np.ndarray:
        """div f(v) = sum_{w~v} f(w, v), flat."""
        h, v = self.horizontal, self.vertical
        d = np.roll(h, 1, axis=1) - h
        d[1:] += v
        d[:-1] -= v
        return d.ravel()

    def energy(self) -> float:
        """Half the sum of squares over directed edges."""
        return float(np.sum(self.horizontal**2) + np.sum(self.vertical**2))

    def reflect(self) -> "Flow":
        """Image under the row reflection r -> n - r."""
        return Flow(self.n, self.horizontal[::-1].copy(), -self.vertical[::-1].copy())

    def __add__(self, other):
        return Flow(self.n, self.horizontal + other.horizontal, self.vertical + other.vertical)

    def __sub__(self, other):
        return Flow(self.n, self.horizontal - other.horizontal, self.vertical - other.vertical)


def flow_metrics(f: Flow):
    """(energy, divergence) of a flow."""
    div = f.divergence()
    if abs(div.sum()) > 1e-12 * max(1.0, np.abs(div).sum()):
        raise ValueError("flow divergence does not sum to zero")
    return f.energy(), div


def gradient_flow(G, n: int) -> Flow:
    """f(v, w) = G(w) - G(v)."""
    n = check_size(n)
    g = np.asarray(G, dtype=float).reshape(n + 1, n)
    if not np.all(np.isfinite(g)):
        raise ValueError("potential has non-finite values")
    return Flow(n, np.roll(g, -1, axis=1) - g, g[1:] - g[:-1])


def source_divergence(A, n: int, source_row: int = 0) -> np.ndarray:
    """Target divergence inside A: 1/n on `source_row`, 0 elsewhere in A."""
    m = _mask(A, n)
    target = np.zeros(num_sites(n))
    target[source_row * n:(source_row + 1) * n] = 1.0 / n
    return np.where(m, target, np.nan)


def satisfies_divergence(f: Flow, A, source_row: int = 0, tol: float = 1e-12) -> bool:
    """Divergence is 1/n on A's source-row sites and 0 on the rest of A."""
    m = _mask(A, f.n)
    target = source_divergence(m, f.n, source_row)
    return bool(np.all(np.abs(f.divergence()[m] - target[m]) <= tol))


def optimal_flow(A, n: int, source: str = "bottom") -> Flow:
    """Random-walk flow on A, the energy minimiser among admissible flows.

    ``source="top"`` handles regions avoiding row 0 with sources on row n, by
    reflecting, solving and reflecting back.
    """
    n = check_size(n)
    m = _mask(A, n)
    if source == "bottom":
        return gradient_flow(stopped_green(m, n), n)
    if source == "top":
        mr = m.reshape(n + 1, n)[::-1].ravel()
        return gradient_flow(stopped_green(mr, n), n).reflect()
    raise ValueError("source must be 'bottom' or 'top'")


def _check_profile(profile: ColumnProfile, r1_trunc: Region, n: int):
    if profile.n != n or r1_trunc.n != n:
        raise ValueError("profile/region size does not match n")
    if r1_trunc.mask[-n:].any():
        raise ValueError("truncated blue region touches the top row")
    ystar = np.argmin(r1_trunc.grid(), axis=0)
    if not np.array_equal(ystar, profile.y_star_rows):
        raise ValueError("profile does not match the region")


def trivial_flow(profile: ColumnProfile, r1_trunc: Region, n: int) -> Flow:
    """Straight-up flow of 1/n through every column below y*_k."""
    n = check_size(n)
    _check_profile(profile, r1_trunc, n)
    f = Flow(n)
    rows = np.arange(n)[:, None]
    f.vertical[rows < profile.y_star_rows[None, :]] = -1.0 / n
    return f


@dataclass
class BendSpec:
    """Which columns bend, where, and by how much.

    ``pairing[l] = (j_l, y_l)`` gives the row ``y_l`` (an integer) on which
    column ``l`` diverts mass ``(1 - d[l]) / n`` sideways to the boundary site
    ``(j_l, y_l)``.
    """

    m: Fraction
    c: Fraction
    W1: tuple
    W2: tuple
    pairing: dict = field(default_factory=dict)
    d: dict = field(default_factory=dict)


def optimal_split(ystar_row: int, y_row: int, n: int) -> float:
    """d = 1/(1 + y* - y)."""
    return 1.0 / (1.0 + (ystar_row - y_row) / n)


def _nearest_outside(row_inside, col):
    """Nearest column not in the region on a row, ties to the right."""
    n = row_inside.size
    for step in range(n):
        for j in ((col + step) % n, (col - step) % n):
            if not row_inside[j]:
                return j
    return None


def _path(col, j, n):
    right = (j - col) % n
    left = (col - j) % n
    return (1, right) if right <= left else (-1, left)


def construct_bend_spec(state, m, c) -> BendSpec:
    """Columns, levels and splits following the bending construction.

    W collects columns with ``y** >= m``; W1 is its first ``ceil(cn/6)``
    members, each paired with a distinct row at or below ``m - c/4`` that
    leaves the truncated blue region.  W2 keeps the columns of W1 whose
    ``y* >= m - c/8``.  Raises ValueError when the hypotheses fail or when
    fewer than half of W1 survive into W2 (no bending is needed then).
    """
    from .erosion import as_fraction

    n = state.n
    m, c = as_fraction(m), as_fraction(c)
    if not (0 < m < 1 and c > 0):
        raise ValueError("need 0 < m < 1 and c > 0")
    reg = reach_regions(state)
    prof = column_profiles(state, reg)
    inside = reg.R1_trunc.grid()
    W = [k for k in range(n) if Fraction(int(prof.y_star_star_rows[k]), n) >= m]
    size = ceil(c * n / 6)
    if len(W) < size:
        raise ValueError(f"|W| = {len(W)} is below cn/6 = {float(c * n / 6):.3f}")
    W1 = W[:size]
    lines = [r for r in range(n + 1)
             if Fraction(r, n) <= m - c / 4 and not inside[r].all()]
    if len(lines) < size:
        raise ValueError(f"only {len(lines)} rows below m - c/4 leave the region")
    pairing = {}
    for ell, r in zip(W1, lines):
        pairing[ell] = (_nearest_outside(inside[r], ell), r)
    W2 = tuple(ell for ell in W1 if Fraction(int(prof.y_star_rows[ell]), n) >= m - c / 8)
    if 2 * len(W2) < len(W1):
        raise ValueError("fewer than half of W1 lie in W2")
    d = {ell: optimal_split(int(prof.y_star_rows[ell]), pairing[ell][1], n) for ell in W2}
    return BendSpec(m, c, tuple(W1), W2, {ell: pairing[ell] for ell in W2}, d)


def _check_spec(spec, profile, r1_trunc, n):
    rows = [spec.pairing[ell][1] for ell in spec.W2]
    if len(set(rows)) != len(rows):
        raise ValueError("bent columns must use distinct rows")
    for ell in spec.W2:
        j, yr = spec.pairing[ell]
        if not 0 <= yr < profile.y_star_rows[ell]:
            raise ValueError(f"column {ell}: level {yr} is not below y* = {profile.y_star_rows[ell]}")
        if r1_trunc.grid()[yr, j]:
            raise ValueError(f"column {ell}: ({j}, {yr}) lies inside the region")
        if not 0 < spec.d[ell] < 1:
            raise ValueError(f"column {ell}: split {spec.d[ell]} outside (0, 1)")


def bend_flow(spec: BendSpec, profile: ColumnProfile, r1_trunc: Region, n: int) -> Flow:
    """Trivial flow with columns in W2 bent sideways at their paired row."""
    f = trivial_flow(profile, r1_trunc, n)
    _check_spec(spec, profile, r1_trunc, n)
    for ell in spec.W2:
        j, yr = spec.pairing[ell]
        d = spec.d[ell]
        f.vertical[yr:profile.y_star_rows[ell], ell] = -d / n
        direction, length = _path(ell, j, n)
        for s in range(length):
            if direction > 0:
                f.horizontal[yr, (ell + s) % n] = -(1 - d) / n
            else:
                f.horizontal[yr, (ell - s - 1) % n] = (1 - d) / n
    return f


def bend_energy_terms(spec: BendSpec, profile: ColumnProfile, n: int) -> dict:
    """Energy bookkeeping for a bent flow.

    Returns ``trivial`` = (1/n) sum y*, ``bound`` (every sideways path counted
    as n edges), ``exact`` (true path lengths) and ``closed_form`` = trivial
    minus (1/n) sum delta^2/(1+delta), which equals ``bound`` when every d is
    the optimal split.
    """
    ys = profile.y_star_rows / n
    trivial = float(ys.sum()) / n
    bound = exact = trivial
    drop = 0.0
    for ell in spec.W2:
        j, yr = spec.pairing[ell]
        d = spec.d[ell]
        y = yr / n
        delta = ys[ell] - y
        _, length = _path(ell, j, n)
        base = y + d * d * delta
        bound += (base + (1 - d) ** 2 - ys[ell]) / n
        exact += (base + (length / n) * (1 - d) ** 2 - ys[ell]) / n
        drop += delta * delta / (1 + delta) / n
    return {"trivial": trivial, "bound": bound, "exact": exact,
            "closed_form": trivial - drop, "drop": drop}


# ---- general graphs -------------------------------------------------------

class GeneralGraph:
    """Connected r-regular graph given by adjacency lists (loops allowed)."""

    def __init__(self, adjacency):
        adj = [list(map(int, a)) for a in adjacency]
        if not adj:
            raise ValueError("graph has no vertices")
        r = len(adj[0])
        if r == 0 or any(len(a) != r for a in adj):
            raise ValueError("graph is not regular")
        V = len(adj)
        if any(not 0 <= w < V for a in adj for w in a):
            raise ValueError("adjacency refers to a missing vertex")
        self.adjacency = adj
        self.r = r
        rows = np.repeat(np.arange(V), r)
        self._A = sparse.csr_matrix((np.ones(V * r), (rows, np.concatenate(adj))), shape=(V, V))
        self._A.sum_duplicates()
        if (abs(self._A - self._A.T) > 0).nnz:
            raise ValueError("adjacency is not symmetric")

    @property
    def num_vertices(self) -> int:
        return len(self.adjacency)

    @classmethod
    def cylinder(cls, n: int) -> "GeneralGraph":
        return cls(neighbor_table(check_size(n)).tolist())

    @classmethod
    def path(cls, length: int) -> "GeneralGraph":
        """Path on `length` vertices with loops padding the ends (2-regular);
        a single edge for ``length == 2`` is 1-regular and returned as such."""
        if length == 2:
            return cls([[1], [0]])
        adj = [[max(v - 1, 0) if v > 0 else v, min(v + 1, length - 1)] for v in range(length)]
        return cls(adj)

    def laplacian(self):
        """I - A/r as a sparse matrix."""
        V = self.num_vertices
        return (sparse.identity(V, format="csr") - self._A / self.r).tocsr()

    def is_connected(self) -> bool:
        k, _ = csgraph.connected_components(self._A, directed=False)
        return k == 1


def solve_poisson(graph: GeneralGraph, mu1, mu2) -> np.ndarray:
    """g with Delta g = mu1 - mu2 and sum(g) = 0."""
    if not graph.is_connected():
        raise ValueError("graph is disconnected")
    V = graph.num_vertices
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    for mu in (mu1, mu2):
        if mu.shape != (V,) or np.any(mu < 0) or abs(mu.sum() - 1) > 1e-12:
            raise ValueError("sources must be probability vectors on the vertices")
    L = graph.laplacian()
    ones = np.ones((V, 1))
    K = sparse.bmat([[L, ones], [ones.T, None]], format="csc")
    rhs = np.concatenate([mu1 - mu2, [0.0]])
    sol = splu(K).solve(rhs)
    g = sol[:V]
    res = float(np.max(np.abs(L @ g - (mu1 - mu2))))
    if not np.all(np.isfinite(g)) or res > RESIDUAL_TOL:
        raise SolverError("Poisson solve missed the residual target", res)
    return g


def level_set_partition(g, k: int, quantum: float = 1e-9) -> np.ndarray:
    """Bool mask of the k vertices with the largest g.

    g is rounded to `quantum` before ranking so that values equal up to
    solver noise tie; ties go to the lower vertex index (on the cylinder
    that is the ``(row, col)`` order).
    """
    g = np.asarray(g, dtype=float)
    V = g.size
    if not 0 <= k <= V:
        raise ValueError(f"k must lie in 0..{V}")
    q = np.round(g / quantum)
    order = np.lexsort((np.arange(V), -q))
    out = np.zeros(V, dtype=bool)
    out[order[:k]] = True
    return out


def predict_interface(n: int, alpha) -> np.ndarray:
    """Level-set prediction of the blue territory on Cyl_n for blue fraction alpha."""
    from .erosion import blue_count

    n = check_size(n)
    g = solve_poisson(GeneralGraph.cylinder(n), uniform_row(n, 0), uniform_row(n, n))
    return level_set_partition(g, blue_count(n, alpha))


__all__ = [
    "Flow", "BendSpec", "GeneralGraph", "expected_exit_height", "stopped_green",
    "green_by_visits", "exit_distribution", "flow_metrics", "gradient_flow",
    "trivial_flow", "bend_flow", "construct_bend_spec", "bend_energy_terms",
    "optimal_flow", "solve_poisson", "level_set_partition", "predict_interface",
    "laplacian", "uniform_row", "satisfies_divergence", "optimal_split",
]
