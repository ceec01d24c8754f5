"""Command-line front end.

Subcommands: erode, idla, sort, drift, stationary, potential, predict.
Every output file carries the resolved configuration and seed; reruns with
the same arguments produce byte-identical files.

Exit codes: 0 success, 1 usage error, 2 numeric/solver failure, 3 the
majority of replicas timed out.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .erosion import INIT_KINDS, as_fraction, blue_count, make_initial, run_chain
from .errors import SolverError
from .formats import (comment_line, render_cluster, render_labeling_csv, render_region,
                      render_snapshot, render_timeseries_csv, parse_region)
from .rng import GENERATOR_FAMILY, RngStream

__all__ = ["RunConfig", "parse_args", "render_snapshot", "main"]

SUBCOMMANDS = ("erode", "idla", "sort", "drift", "stationary", "potential", "predict")
EXIT_USAGE, EXIT_SOLVER, EXIT_TIMEOUT = 1, 2, 3
VERSION = "0.1.0"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    subcommand: str
    n: int | None = None
    alpha: str = "0.5"
    epsilon: float = 0.2
    steps: int | None = None
    burn_in: int = 0
    seed: int = 0
    replicas: int = 1
    init: str = "bernoulli"
    snapshot_every: int = 0
    out: str = "out"
    config: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("config")
        return d


COMMON = {
    "n": dict(type=int), "alpha": dict(type=str), "epsilon": dict(type=float),
    "steps": dict(type=int), "burn_in": dict(type=int), "seed": dict(type=int),
    "replicas": dict(type=int), "init": dict(type=str), "snapshot_every": dict(type=int),
    "out": dict(type=str),
}
EXTRA = {
    "drift": {"exact": dict(action="store_true", default=None), "samples": dict(type=int)},
    "idla": {"k": dict(type=float), "initial_rows": dict(type=str), "kill_row": dict(type=int)},
    "sort": {"threshold": dict(type=float), "record_every": dict(type=int)},
    "potential": {"region": dict(type=str)},
}
DEFAULTS = {"alpha": "0.5", "epsilon": 0.2, "burn_in": 0, "seed": 0, "replicas": 1,
            "init": "bernoulli", "snapshot_every": 0, "out": "out"}
EXTRA_DEFAULTS = {"exact": False, "samples": 10000, "k": 0.5, "initial_rows": "",
                  "kill_row": None, "threshold": 0.25, "record_every": 100, "region": None}
STEP_DEFAULTS = {"erode": 325, "stationary": 100000, "sort": 20000}


def _build_parser():
    p = _Parser(prog="erosion-lab", description="Competitive erosion toolkit")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        for key, kw in COMMON.items():
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None, **kw)
        sp.add_argument("--config", default=None)
        for key, kw in EXTRA.get(name, {}).items():
            kw = dict(kw)
            kw.setdefault("default", None)
            sp.add_argument("--" + key.replace("_", "-"), dest=key, **kw)
    return p


def parse_args(argv) -> RunConfig:
    """Flags override values from ``--config`` JSON, which override defaults."""
    ns = _build_parser().parse_args(list(argv))
    values = {}
    if ns.config:
        try:
            values = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {ns.config}: {e}") from None
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
    known = set(COMMON) | set(EXTRA.get(ns.subcommand, {}))
    unknown = set(values) - known - {"subcommand"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key in known:
        v = getattr(ns, key)
        if v is not None:
            values[key] = v
    base = {k: values.get(k, DEFAULTS.get(k)) for k in COMMON}
    if base["steps"] is None:
        base["steps"] = STEP_DEFAULTS.get(ns.subcommand)
    extra = {k: values.get(k, EXTRA_DEFAULTS[k]) for k in EXTRA.get(ns.subcommand, {})}
    cfg = RunConfig(ns.subcommand, config=ns.config, extra=extra, **base)
    cfg.alpha = str(cfg.alpha)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    sc = cfg.subcommand
    if sc == "potential":
        if not cfg.extra.get("region"):
            raise UsageError("potential: --region is required")
    elif cfg.n is None:
        raise UsageError(f"{sc}: --n is required")
    if cfg.n is not None and cfg.n < 2:
        raise UsageError("--n must be at least 2")
    try:
        a = as_fraction(cfg.alpha)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--alpha {cfg.alpha!r} is not a number") from None
    if not 0 < a < 1:
        raise UsageError("--alpha must lie strictly between 0 and 1")
    if cfg.n is not None and sc in ("erode", "drift", "stationary", "predict"):
        k = blue_count(cfg.n, a)
        if not 1 <= k <= cfg.n * (cfg.n + 1) - 1:
            raise UsageError(f"--alpha gives {k} blue sites; need at least one of each colour")
    if not cfg.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    if cfg.steps is not None and cfg.steps < 0:
        raise UsageError("--steps must be non-negative")
    if sc == "stationary" and cfg.steps < 1:
        raise UsageError("stationary: --steps must be at least 1")
    if cfg.burn_in < 0 or cfg.replicas < 1 or cfg.snapshot_every < 0:
        raise UsageError("--burn-in, --snapshot-every must be >= 0 and --replicas >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    kind = cfg.init.lower()
    sort_inits = ("random", "sorted", "reverse")
    if sc == "sort":
        if kind not in sort_inits:
            raise UsageError(f"sort: --init must be one of {sort_inits}")
    elif not (kind in INIT_KINDS or (kind.startswith("bernoulli(") and kind.endswith(")"))):
        raise UsageError(f"--init must be one of {INIT_KINDS}")
    if sc == "drift":
        if cfg.extra["samples"] < 100:
            raise UsageError("drift: --samples must be at least 100")
        if cfg.extra["exact"] and cfg.n > 20:
            raise UsageError("drift --exact supports n <= 20")
    if sc == "idla":
        try:
            rows = _rows(cfg.extra["initial_rows"])
        except ValueError:
            raise UsageError("--initial-rows must be comma-separated integers") from None
        if len(rows) > cfg.n or any(r < 0 for r in rows):
            raise UsageError("--initial-rows: at most n non-negative rows")
        if not cfg.extra["k"] > 0:
            raise UsageError("--k must be positive")


def _rows(text):
    return tuple(sorted({int(x) for x in str(text).split(",") if x.strip()}))


# ---- runners ----------------------------------------------------------------

def _meta(cfg, replica=None):
    m = {"config": cfg.to_json(), "seed": cfg.seed, "rng": GENERATOR_FAMILY,
         "version": VERSION}
    if replica is not None:
        m["replica"] = replica
    return m


def _stream(cfg, r):
    return RngStream(cfg.seed, r)


def _initial(cfg, gen):
    kind = cfg.init
    return make_initial(kind, cfg.n, as_fraction(cfg.alpha), rng=gen)


def _erode_replica(cfg, r):
    from .erosion import flags_from_rows
    gen = _stream(cfg, r).generator()
    state = _initial(cfg, gen)
    files = {}
    steps = cfg.steps
    n = state.n
    every = cfg.snapshot_every
    snaps = {0: render_snapshot(state, 0)}
    hnum = [state.height_numerator()]
    rows = [state.row_counts()]
    t = 0
    # run in segments so snapshots can be taken
    marks = sorted({m for m in range(every, steps + 1, every)} | {steps}) if every else [steps]
    for mark in marks:
        if mark > t:
            state, traj = run_chain(state, mark - t, gen)
            hnum.extend(traj.hnum.tolist())
            rows.extend(traj.row_counts)
            t = mark
        snaps[t] = render_snapshot(state, t)
    hnum = np.array(hnum)
    rows = np.array(rows)
    flags = flags_from_rows(rows, hnum, n, state.alpha, cfg.epsilon)
    hit = np.flatnonzero(flags["A"])
    hit_t = int(hit[0]) if hit.size else None
    meta = _meta(cfg, r)
    files[f"erode_r{r}.csv"] = comment_line(meta) + render_timeseries_csv(
        np.arange(len(hnum)), hnum, n, flags)
    for ts, text in snaps.items():
        files[f"snapshots/erode_r{r}_t{ts}.txt"] = text + comment_line(meta)
    summary = {"replica": r, "hit_A": hit_t, "final_h": float(hnum[-1]) / n,
               "final_flags": {k: bool(flags[k][-1]) for k in ("A", "G", "Gamma", "Omega")}}
    return files, summary


def _stationary_replica(cfg, r):
    from .stats import occupancy
    gen = _stream(cfg, r).generator()
    state = _initial(cfg, gen)
    rep = occupancy(state, ["A", "G", "Gamma", "Omega"], cfg.epsilon, cfg.burn_in,
                    cfg.steps, gen)
    return {}, {"replica": r, "fractions": rep.fractions}


def _idla_replica(cfg, r):
    from .idla import containment_event, idla_run, normalize_cluster
    k = cfg.extra["k"]
    t = cfg.steps if cfg.steps is not None else int(k * cfg.n * cfg.n)
    c = idla_run(cfg.n, _rows(cfg.extra["initial_rows"]), t, _stream(cfg, r).generator(),
                 kill_row=cfg.extra["kill_row"])
    A = normalize_cluster(c)
    lo, hi = containment_event(A, cfg.n, k, cfg.epsilon)
    text = render_cluster(c.grid, t, lo, hi, extra={"meta": _meta(cfg, r), "killed": c.killed})
    return {f"idla_r{r}.txt": text}, {"replica": r, "contained_low": lo,
                                      "contained_high": hi, "max_row": c.max_row,
                                      "killed": c.killed}


def _sort_replica(cfg, r):
    from .sorting import (random_labeling, reverse_sorted_labeling, run_sorting,
                          sorted_labeling)
    gen = _stream(cfg, r).generator()
    kind = cfg.init.lower()
    lab = {"random": lambda: random_labeling(cfg.n, gen),
           "sorted": lambda: sorted_labeling(cfg.n),
           "reverse": lambda: reverse_sorted_labeling(cfg.n)}[kind]()
    if cfg.burn_in:
        lab = run_sorting(lab, cfg.burn_in, gen, check=False).final
    every = cfg.extra["record_every"]
    res = run_sorting(lab, cfg.steps, gen, check=True, deviation_every=every)
    meta = _meta(cfg, r)
    dev = "t,deviation\n" + "".join(f"{(i + 1) * every},{d!r}\n"
                                    for i, d in enumerate(res.deviations.tolist()))
    frac = float((res.deviations > cfg.extra["threshold"]).mean()) if res.deviations.size else None
    files = {f"labeling_r{r}.csv": comment_line(meta) + render_labeling_csv(res.final),
             f"deviation_r{r}.csv": comment_line(meta) + dev}
    return files, {"replica": r, "invariants_held": res.invariants_held,
                   "fraction_above_threshold": frac}


def _drift_replica(cfg, r):
    from .stats import drift_exact, drift_mc
    gen = _stream(cfg, r).generator()
    state = _initial(cfg, gen)
    out = {"replica": r}
    mc = drift_mc(state, cfg.extra["samples"], gen)
    out["monte_carlo"] = {"mean": mc.mean, "stderr": mc.stderr, "samples": mc.samples}
    if cfg.extra["exact"]:
        out["exact"] = drift_exact(state).mean
    return {}, out


def _run_replicas(cfg, fn):
    threads = int(os.environ.get("EROSION_LAB_THREADS", "1") or 1)
    if threads > 1 and cfg.replicas > 1:
        with ProcessPoolExecutor(max_workers=min(threads, cfg.replicas)) as ex:
            return list(ex.map(fn, [cfg] * cfg.replicas, range(cfg.replicas)))
    return [fn(cfg, r) for r in range(cfg.replicas)]


def _potential(cfg):
    from .potential import (expected_exit_height, flow_metrics, gradient_flow, stopped_green)
    try:
        n, mask = parse_region(Path(cfg.extra["region"]).read_text())
    except OSError as e:
        raise UsageError(f"cannot read region file: {e}") from None
    except ValueError as e:
        raise UsageError(f"bad region file: {e}") from None
    if mask.all():
        raise UsageError("region covers the whole cylinder")
    H = expected_exit_height(mask, n)
    lines = ["col,row,H,G"]
    G = None
    summary = {"n": n, "region_size": int(mask.sum()), "mean_H_bottom": float(H[:n].mean())}
    if not mask[-n:].any():
        G = stopped_green(mask, n)
        energy, _ = flow_metrics(gradient_flow(G, n))
        summary["energy"] = energy
    for i in range(mask.size):
        g = "" if G is None else repr(float(G[i]))
        lines.append(f"{i % n},{i // n},{float(H[i])!r},{g}")
    files = {"potential.csv": comment_line(_meta(cfg)) + "\n".join(lines) + "\n"}
    return files, summary


def _predict(cfg):
    from .potential import predict_interface
    a = as_fraction(cfg.alpha)
    mask = predict_interface(cfg.n, a)
    slab = make_initial("slab", cfg.n, a).blue
    files = {"prediction.txt": render_region(mask, cfg.n) + comment_line(_meta(cfg))}
    return files, {"n": cfg.n, "blue": int(mask.sum()),
                   "matches_slab": bool(np.array_equal(mask, slab))}


RUNNERS = {"erode": _erode_replica, "stationary": _stationary_replica, "idla": _idla_replica,
           "sort": _sort_replica, "drift": _drift_replica}


def execute(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    status = 0
    if cfg.subcommand in RUNNERS:
        results = _run_replicas(cfg, RUNNERS[cfg.subcommand])
        files = {}
        for f, _ in results:
            files.update(f)
        summaries = [s for _, s in results]
        summary = {"replicas": summaries}
        if cfg.subcommand == "erode":
            timeouts = sum(s["hit_A"] is None for s in summaries)
            summary["timeouts"] = timeouts
            if 2 * timeouts > len(summaries):
                status = EXIT_TIMEOUT
        if cfg.subcommand == "stationary":
            keys = summaries[0]["fractions"].keys()
            summary["mean_fractions"] = {k: float(np.mean([s["fractions"][k] for s in summaries]))
                                         for k in keys}
        if cfg.subcommand == "idla":
            summary["containment_rate"] = float(np.mean(
                [s["contained_low"] and s["contained_high"] for s in summaries]))
    elif cfg.subcommand == "potential":
        files, summary = _potential(cfg)
    else:
        files, summary = _predict(cfg)
    summary.update(_meta(cfg))
    files["summary.json"] = json.dumps(summary, sort_keys=True, indent=2) + "\n"
    for name, text in files.items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return status


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
        return execute(cfg)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
