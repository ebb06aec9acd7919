"""Monte Carlo experiment runners with a single CSV row schema.

Every experiment emits rows (experiment, method, trial, iteration, delta_dB,
metric_name, value) plus a JSON summary carrying the config echo, the seed,
aggregate statistics and infeasible-trial counts. Trials run sequentially in
trial order and rows are sorted by (trial, iteration) before writing, so a
fixed seed yields byte-identical output files.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .baseline import run_centralized
from .config import SystemConfig, default_config
from .errors import GlobalInfeasible
from .metrics import (
    CENTRALIZED,
    TSDBA,
    beampattern,
    default_grid_deg,
    fronthaul_load,
)
from .model import draw_channels, sensing_geometry
from .nullspace import project
from .twostage import run_two_stage

CSV_COLUMNS = ("experiment", "method", "trial", "iteration", "delta_dB",
               "metric_name", "value")

CONVERGENCE = "convergence"
BEAMPATTERN = "beampattern"
TRADEOFF = "tradeoff"
FRONTHAUL = "fronthaul"
KINDS = (CONVERGENCE, BEAMPATTERN, TRADEOFF, FRONTHAUL)

DEFAULT_DELTAS = {
    CONVERGENCE: (30.0, 40.0),
    BEAMPATTERN: (40.0, 46.0),
    TRADEOFF: tuple(float(d) for d in range(30, 45, 2)),
    FRONTHAUL: (),
}
CONVERGENCE_ITERATIONS = 10
FRONTHAUL_NTX = tuple(2 ** p for p in range(3, 11))
FRONTHAUL_NETWORKS = ((4, 2), (4, 8), (16, 2), (16, 8))


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment request: what to run and where to write it."""

    kind: str
    config: SystemConfig
    trials: int = 100
    delta_list: tuple = ()
    csv_path: str = "experiment.csv"
    json_path: str = "experiment_summary.json"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind: {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.kind != FRONTHAUL and not self.delta_list:
            raise ValueError(f"{self.kind} needs a nonempty delta_list")


def make_spec(kind: str, config: SystemConfig | None = None,
              trials: int = 100, delta_list=None, csv_path: str | None = None,
              json_path: str | None = None) -> ExperimentSpec:
    """ExperimentSpec with per-kind defaults filled in.

    The convergence study defaults to a ten-iteration exchange when the
    config still carries the stock iteration count; an explicit n_iter
    override is respected.
    """
    cfg = default_config() if config is None else config
    if kind == CONVERGENCE and cfg.n_iter == default_config().n_iter:
        cfg = cfg.with_overrides(n_iter=CONVERGENCE_ITERATIONS)
    deltas = DEFAULT_DELTAS.get(kind, ()) if delta_list is None else tuple(
        float(d) for d in delta_list)
    return ExperimentSpec(
        kind=kind, config=cfg, trials=trials, delta_list=deltas,
        csv_path=csv_path if csv_path is not None else f"{kind}.csv",
        json_path=json_path if json_path is not None else f"{kind}_summary.json")


def _mean(values) -> float:
    return float(sum(values) / len(values))


def _dkey(delta: float) -> str:
    return f"{delta:g}"


def _run_convergence(spec: ExperimentSpec):
    """Per-iteration sum SINR of the exchange, per threshold, over trials."""
    cfg = spec.config
    rows = []
    infeasible = {}
    means = {}
    for delta in spec.delta_list:
        dcfg = cfg.with_overrides(delta_dB=float(delta))
        per_iter = [[] for _ in range(dcfg.n_iter)]
        skipped = 0
        for trial in range(spec.trials):
            try:
                _, rec = run_two_stage(dcfg, trial=trial)
            except GlobalInfeasible:
                skipped += 1
                continue
            for it, r in enumerate(rec.iterations, start=1):
                rows.append((spec.kind, TSDBA, trial, it, float(delta),
                             "sum_sinr", r.sum_sinr))
                per_iter[it - 1].append(r.sum_sinr)
        infeasible[_dkey(delta)] = skipped
        means[_dkey(delta)] = {
            str(it + 1): (_mean(vals) if vals else None)
            for it, vals in enumerate(per_iter)}
    return rows, {"means": means, "infeasible_trials": infeasible}


def _run_beampattern(spec: ExperimentSpec):
    """Per-AP transmit gain over angle for each threshold, one shared draw.

    Scans trials in order for the first channel draw feasible under every
    threshold in delta_list, so the emitted patterns differ only through
    the sensing constraint, not the channel realization.
    """
    cfg = spec.config
    grid = default_grid_deg()
    states = None
    chosen = None
    skipped = 0
    for trial in range(spec.trials):
        try:
            states = {delta: run_two_stage(
                cfg.with_overrides(delta_dB=float(delta)), trial=trial)[0]
                for delta in spec.delta_list}
        except GlobalInfeasible:
            skipped += 1
            continue
        chosen = trial
        break
    if chosen is None:
        raise GlobalInfeasible(
            f"no channel draw feasible under all of {list(spec.delta_list)} dB "
            f"within {spec.trials} trials")
    geometry = sensing_geometry(cfg)
    channels = draw_channels(cfg, chosen)
    data = project(channels, geometry, cfg)
    rows = []
    target_gain = {}
    for delta in spec.delta_list:
        F = states[delta].lift(data)
        gains = []
        for m, Fm in enumerate(F):
            pat = beampattern(Fm, grid)
            rows.extend(
                (spec.kind, TSDBA, chosen, cfg.n_iter, float(delta),
                 f"gain_db_ap{m + 1}_deg{angle:+.2f}", float(val))
                for angle, val in zip(grid, pat))
            gains.append(float(beampattern(Fm, np.array([cfg.theta_deg[m]]))[0]))
        target_gain[_dkey(delta)] = gains
    return rows, {"trial": chosen, "skipped_trials": skipped,
                  "target_gain_db": target_gain}


def _run_tradeoff(spec: ExperimentSpec):
    """Final mean sum SINR against the sensing threshold, both methods."""
    cfg = spec.config
    rows = []
    means = {m: {} for m in (TSDBA, CENTRALIZED)}
    infeasible = {m: {} for m in (TSDBA, CENTRALIZED)}
    for delta in spec.delta_list:
        dcfg = cfg.with_overrides(delta_dB=float(delta))
        finals = {TSDBA: [], CENTRALIZED: []}
        skipped = {TSDBA: 0, CENTRALIZED: 0}
        for trial in range(spec.trials):
            try:
                _, rec = run_two_stage(dcfg, trial=trial)
                rows.append((spec.kind, TSDBA, trial, rec.n_iter, float(delta),
                             "sum_sinr", rec.iterations[-1].sum_sinr))
                finals[TSDBA].append(rec.iterations[-1].sum_sinr)
            except GlobalInfeasible:
                skipped[TSDBA] += 1
            try:
                _, rec = run_centralized(dcfg, trial=trial)
                rows.append((spec.kind, CENTRALIZED, trial, rec.n_iter,
                             float(delta), "sum_sinr",
                             rec.iterations[-1].sum_sinr))
                finals[CENTRALIZED].append(rec.iterations[-1].sum_sinr)
            except GlobalInfeasible:
                skipped[CENTRALIZED] += 1
        for method in (TSDBA, CENTRALIZED):
            means[method][_dkey(delta)] = (
                _mean(finals[method]) if finals[method] else None)
            infeasible[method][_dkey(delta)] = skipped[method]
    return rows, {"means": means, "infeasible_trials": infeasible}


def _run_fronthaul(spec: ExperimentSpec):
    """Closed-form fronthaul load against antenna count and network size."""
    cfg = spec.config
    rows = []
    loads = {m: {} for m in (TSDBA, CENTRALIZED)}
    for M, K in FRONTHAUL_NETWORKS:
        for method in (TSDBA, CENTRALIZED):
            table = {}
            for n_tx in FRONTHAUL_NTX:
                load = fronthaul_load(method, M, K, n_tx, cfg.n_iter)
                rows.append((spec.kind, method, 0, cfg.n_iter, cfg.delta_dB,
                             f"scalars_m{M}_k{K}_ntx{n_tx}", float(load)))
                table[str(n_tx)] = load
            loads[method][f"M{M}_K{K}"] = table
    return rows, {"loads": loads, "n_iter": cfg.n_iter}


_RUNNERS = {
    CONVERGENCE: _run_convergence,
    BEAMPATTERN: _run_beampattern,
    TRADEOFF: _run_tradeoff,
    FRONTHAUL: _run_fronthaul,
}


def run_experiment(spec: ExperimentSpec):
    """Run one experiment and write its CSV and JSON summary files.

    Returns (csv_path, json_path). Infeasible trials are excluded from the
    aggregate statistics and counted in the summary; GlobalInfeasible only
    propagates when an experiment cannot produce its output at all.
    """
    rows, extra = _RUNNERS[spec.kind](spec)
    if not rows:
        raise GlobalInfeasible(
            f"{spec.kind}: no feasible trial produced any data")
    rows.sort(key=lambda r: (r[2], r[3]))
    with open(spec.csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for exp, method, trial, it, delta, name, value in rows:
            writer.writerow([exp, method, trial, it, repr(float(delta)),
                             name, repr(float(value))])
    summary = {
        "experiment": spec.kind,
        "seed": spec.config.seed,
        "trials": spec.trials,
        "delta_list": [float(d) for d in spec.delta_list],
        "config": spec.config.to_dict(),
        "rows": len(rows),
    }
    summary.update(extra)
    with open(spec.json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return spec.csv_path, spec.json_path
