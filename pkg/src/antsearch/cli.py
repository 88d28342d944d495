"""Command-line entry point: ``antsearch {plan,loop,bandit,sweep,report}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import ALGORITHMS, ConfigError, load_config, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="antsearch", description=__doc__)
    parser.add_argument("command", choices=["plan", "loop", "bandit", "sweep", "report"])
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--algo", choices=ALGORITHMS, help="planner preset")
    parser.add_argument("--env", help="environment fixture name (chain, grid)")
    parser.add_argument("--seed", type=int, action="append",
                        help="seed to run; repeat for several")
    parser.add_argument("--episodes", type=int, help="episodes per seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--trace-temperature", action="store_true", default=None,
                        help="write the per-step temperature trace")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {
        "algorithm": args.algo,
        "env": args.env,
        "seeds": args.seed,
        "episodes": args.episodes,
        "out": args.out,
        "trace_temperature": args.trace_temperature,
        "workers": args.workers,
    }
    try:
        cfg = load_config(args.config, overrides)
        paths = run_experiment(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
