"""Command line front end.

Exit codes: 0 success, 1 failed oracle comparisons, 2 invalid
configuration or guard violation, 3 filesystem failure, 4 observable
integrity violation.
"""

from __future__ import annotations

import argparse
import sys

from .config import (
    ConfigError,
    ExperimentConfig,
    OBSERVABLE_NAMES,
    PRESETS,
    apply_updates,
    parse_config_text,
)
from .observables import IntegrityError
from .runner import ConfigGuardError, oracle_check, run_experiment, worker_count_from_env

__all__ = ["build_parser", "entry", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinnet",
        description=(
            "Estimate fidelity, entropy and pair concurrence for a quantum "
            "excitation spreading over randomly redrawn interaction graphs. "
            "Writes one CSV per parameter value plus a reproducible manifest. "
            "Worker count comes from the SPINNET_WORKERS environment variable."
        ),
    )
    parser.add_argument("--config", help="key = value file; explicit flags override it")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="baked parameter set")
    parser.add_argument("--nodes", help="comma-separated network sizes (default 32)")
    parser.add_argument("--ensemble", choices=["gilbert", "thermal"])
    parser.add_argument("--xi", help="comma-separated edge probabilities in [0, 1]")
    parser.add_argument("--temperature", help="comma-separated thermal parameters > 0")
    parser.add_argument("--dt", type=float, help="time step (default 0.015)")
    parser.add_argument("--steps", type=int, help="number of steps (default 1000)")
    parser.add_argument("--realizations", type=int, help="trajectories per run (default 400)")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument("--coupling-scale", type=float, dest="coupling_scale",
                        help="Hamiltonian scale factor (default 1)")
    parser.add_argument("--observables",
                        help="comma-separated subset of: " + ", ".join(OBSERVABLE_NAMES))
    parser.add_argument("--bootstrap", type=int,
                        help="bootstrap resamples for standard errors (0 = off)")
    parser.add_argument("--out", help="output directory (default 'out')")
    parser.add_argument("--oracle-check", action="store_true", dest="oracle",
                        help="compare the Monte Carlo path against the exact engines (N <= 6)")
    return parser


_FLAG_FIELDS = (
    "nodes", "ensemble", "xi", "temperature", "dt", "steps", "realizations",
    "seed", "coupling_scale", "observables", "bootstrap", "out",
)

_COMMA_FIELDS = {"nodes", "xi", "temperature", "observables"}


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.preset:
        cfg = apply_updates(cfg, PRESETS[args.preset])
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = apply_updates(cfg, parse_config_text(fh.read()))
    updates = {}
    for name in _FLAG_FIELDS:
        value = getattr(args, name)
        if value is None:
            continue
        if name in _COMMA_FIELDS:
            value = parse_config_text(f"{name} = {value}")[name]
        updates[name] = value
    return apply_updates(cfg, updates).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        workers = worker_count_from_env()
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.oracle:
        try:
            checks = oracle_check(cfg, workers=workers)
        except ConfigGuardError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for check in checks:
            print(check.line())
        return 0 if all(c.passed for c in checks) else 1

    try:
        paths = run_experiment(cfg, workers=workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
