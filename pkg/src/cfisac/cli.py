"""Command line experiment runner: JSON config in, CSV and JSON summary out.

Exit codes: 0 on success, 2 on a configuration error, 3 when the requested
experiment is infeasible (the sensing threshold cannot be met on any usable
draw). Failures print a one-line JSON error object to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .config import SystemConfig, default_config, load_config
from .errors import ConfigError, GlobalInfeasible
from .experiments import ExperimentSpec, KINDS, make_spec, run_experiment

__all__ = ["ExperimentSpec", "build_parser", "main", "run_experiment"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfisac",
        description="Cell-free ISAC beamforming experiments "
                    "(distributed two-stage design vs centralized baseline).")
    parser.add_argument("--experiment", required=True, choices=KINDS,
                        help="which study to run")
    parser.add_argument("--config", metavar="FILE",
                        help="JSON file with SystemConfig fields")
    parser.add_argument("--trials", type=int, default=100,
                        help="number of channel draws (default 100)")
    parser.add_argument("--seed", type=int, default=None,
                        help="root seed override")
    parser.add_argument("--delta", metavar="DB[,DB...]",
                        help="comma-separated sensing thresholds in dB "
                             "(default depends on the experiment)")
    parser.add_argument("--out", metavar="DIR", default=".",
                        help="output directory (default current directory)")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="overrides",
                        help="override any config field, repeatable")
    return parser


def _parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        out[key] = value
    return out


def _parse_delta(text):
    if text is None:
        return None
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"--delta expects numbers, got {text!r}") from exc


def _fail(kind: str, exc: Exception, code: int) -> int:
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _parse_overrides(args.overrides))
        if args.seed is not None:
            config = config.with_overrides(seed=args.seed)
        os.makedirs(args.out, exist_ok=True)
        spec = make_spec(
            args.experiment, config=config, trials=args.trials,
            delta_list=_parse_delta(args.delta),
            csv_path=os.path.join(args.out, f"{args.experiment}.csv"),
            json_path=os.path.join(args.out,
                                   f"{args.experiment}_summary.json"))
    except (ConfigError, ValueError) as exc:
        return _fail("config", exc, 2)
    try:
        csv_path, json_path = run_experiment(spec)
    except GlobalInfeasible as exc:
        return _fail("feasibility", exc, 3)
    print(json.dumps({"csv": csv_path, "summary": json_path}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
