"""Command line entry point: ``isac-hbf {run,sweep,beampattern,convergence}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import SystemConfig, config_from_dict, load_config
from .errors import ConfigError, IsacError
from .runner import (SWEEP_PARAMS, emit_beampattern_csv, emit_convergence_csv, emit_csv,
                     aggregate, design_beampattern, make_context, run_sweep, run_trial, SweepResult)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {text!r} must look like key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def build_config(args) -> SystemConfig:
    base = load_config(args.config).to_dict() if args.config else SystemConfig().to_dict()
    for key, value in (_parse_override(o) for o in args.set or []):
        if key.startswith("solver."):
            base["solver"][key.split(".", 1)[1]] = value
        else:
            base[key] = value
    for attr, key in (("seed", "seed"), ("objective", "objective"), ("trials", "n_trials"),
                      ("snr_db", "snr_db"), ("epsilon_db", "epsilon_db")):
        value = getattr(args, attr, None)
        if value is not None:
            base[key] = value
    return config_from_dict(base)


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be a comma separated list of numbers: {exc}") from exc


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isac-hbf", description="Hybrid ISAC precoder simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (solver.* for solver settings)")
        p.add_argument("--seed", type=int)
        p.add_argument("--snr-db", dest="snr_db", type=float)
        p.add_argument("--epsilon-db", dest="epsilon_db", type=float)
        p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("run", help="single trial, written as a one-row sweep table")
    common(p)
    p.add_argument("--objective", choices=("sum_se", "gm_se"))
    p.add_argument("--trial", type=int, default=0)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over one parameter")
    common(p)
    p.add_argument("--objective", choices=("sum_se", "gm_se"))
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("beampattern", help="normalized transmit beampattern of one design")
    common(p)
    p.add_argument("--trial", type=int, default=0)

    p = sub.add_parser("convergence", help="RF-design cost trace of one design")
    common(p)
    p.add_argument("--trial", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = build_config(args)
        if args.command == "run":
            report = run_trial(config, args.trial, context=make_context(config))
            result = SweepResult("trial", [aggregate(args.trial, [report])], {float(args.trial): [report]})
            emit_csv(result, args.out)
        elif args.command == "sweep":
            progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
            result = run_sweep(config, args.param, _parse_values(args.values), progress=progress)
            emit_csv(result, args.out)
        elif args.command == "beampattern":
            angles, gains, _ = design_beampattern(config, args.trial)
            emit_beampattern_csv(angles, gains, args.out)
        else:
            emit_convergence_csv(config, args.out, args.trial)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IsacError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
