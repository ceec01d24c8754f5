"""Plain-text file formats.

Snapshot::

    n=<n> alpha=<decimal> t=<t>
    <row n>       one character per column, B blue / R red
    ...
    <row 0>

Region files use the same grid with ``1``/``0`` and an optional ``n=<n>``
header.  Cluster snapshots put a JSON line first, then rows top first with
``#`` occupied and ``.`` empty.  Lines starting with ``#`` after a snapshot or
region grid are comments (the CLI stores run metadata there); cluster files
keep metadata in their JSON line instead.
"""
from __future__ import annotations

import csv
import io
import json

import numpy as np

from .cylinder import check_size, num_sites
from .erosion import Coloring, as_fraction


def _alpha_text(alpha) -> str:
    return repr(float(alpha))


def render_snapshot(state: Coloring, t: int) -> str:
    g = state.grid()
    lines = [f"n={state.n} alpha={_alpha_text(state.alpha)} t={int(t)}"]
    for r in range(state.n, -1, -1):
        lines.append("".join("B" if b else "R" for b in g[r]))
    return "\n".join(lines) + "\n"


def _header(line):
    out = {}
    for tok in line.split():
        key, _, val = tok.partition("=")
        if not val:
            raise ValueError(f"bad header token {tok!r}")
        out[key] = val
    return out


def _content_lines(text):
    lines = text.splitlines()
    while lines and (not lines[-1].strip() or lines[-1].startswith("#")):
        lines.pop()
    return lines


def parse_snapshot(text: str):
    """Inverse of `render_snapshot`: returns ``(Coloring, t)``."""
    lines = _content_lines(text)
    if not lines:
        raise ValueError("empty snapshot")
    h = _header(lines[0])
    try:
        n, t = int(h["n"]), int(h["t"])
        alpha = as_fraction(float(h["alpha"]))
    except KeyError as e:
        raise ValueError(f"snapshot header lacks {e}") from None
    n = check_size(n)
    rows = lines[1:]
    if len(rows) != n + 1 or any(len(r) != n or set(r) - {"B", "R"} for r in rows):
        raise ValueError("snapshot grid does not match n")
    blue = np.array([[ch == "B" for ch in r] for r in reversed(rows)], dtype=bool).ravel()
    return Coloring(n, blue, alpha), t


def render_region(mask, n: int, header: bool = True) -> str:
    n = check_size(n)
    g = np.asarray(mask, dtype=bool).reshape(n + 1, n)
    lines = [f"n={n}"] if header else []
    lines += ["".join("1" if b else "0" for b in g[r]) for r in range(n, -1, -1)]
    return "\n".join(lines) + "\n"


def parse_region(text: str):
    """Returns ``(n, mask)``; the header line is optional."""
    lines = [ln for ln in _content_lines(text) if ln.strip()]
    n = None
    if lines and "=" in lines[0]:
        h = _header(lines[0])
        n = int(h["n"])
        lines = lines[1:]
    if n is None:
        n = len(lines[0]) if lines else 0
    n = check_size(n)
    if len(lines) != n + 1 or any(len(r) != n or set(r) - {"0", "1"} for r in lines):
        raise ValueError("region grid does not match n")
    mask = np.array([[ch == "1" for ch in r] for r in reversed(lines)], dtype=bool).ravel()
    assert mask.size == num_sites(n)
    return n, mask


def render_cluster(grid, t: int, contained_low=None, contained_high=None, extra=None) -> str:
    """JSON line then rows ``max_row .. 0`` of an IDLA grid.

    `extra` adds keys to the JSON line (the CLI stores its config there).
    """
    g = np.asarray(grid, dtype=bool)
    rows = np.flatnonzero(g.any(axis=1))
    max_row = int(rows[-1]) if rows.size else -1
    meta = {"t": int(t), "max_row": max_row,
            "contained_low": contained_low, "contained_high": contained_high}
    meta.update(extra or {})
    lines = [json.dumps(meta, sort_keys=True)]
    lines += ["".join("#" if b else "." for b in g[r]) for r in range(max_row, -1, -1)]
    return "\n".join(lines) + "\n"


def parse_cluster(text: str):
    """Returns ``(meta dict, grid)`` with grid rows ordered from row 0."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta = json.loads(lines[0])
    rows = lines[1:]
    if not rows:
        return meta, np.zeros((0, 0), dtype=bool)
    grid = np.array([[ch == "#" for ch in r] for r in reversed(rows)], dtype=bool)
    return meta, grid


def render_labeling_csv(lab) -> str:
    n = lab.n
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["col", "row", "label"])
    for i, label in enumerate(lab.labels):
        w.writerow([i % n, i // n, int(label)])
    return buf.getvalue()


def parse_labeling_csv(text: str):
    from .sorting import Labeling

    rows = list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))
    cols = np.array([int(r["col"]) for r in rows])
    rr = np.array([int(r["row"]) for r in rows])
    n = int(cols.max()) + 1
    labels = np.zeros(num_sites(n), dtype=np.int64)
    labels[rr * n + cols] = [int(r["label"]) for r in rows]
    return Labeling(n, labels)


TIMESERIES_COLUMNS = ("t", "h", "in_A", "in_G", "in_Gamma", "in_Omega", "sym_diff")


def render_timeseries_csv(t, hnum, n, flags) -> str:
    """Per-step good-set membership; `flags` as returned by ``flags_from_rows``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TIMESERIES_COLUMNS)
    for i in range(len(t)):
        w.writerow([int(t[i]), repr(float(hnum[i]) / n), int(flags["A"][i]), int(flags["G"][i]),
                    int(flags["Gamma"][i]), int(flags["Omega"][i]), int(flags["sym_diff"][i])])
    return buf.getvalue()


def comment_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True) + "\n"
