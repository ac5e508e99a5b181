"""``simulate <experiment> --config <file> --seed <u64> --out <dir>``.

Exit codes: 0 success, 1 configuration error, 2 runtime or numeric
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiments import ConfigError, Experiment, ExperimentConfig, run_experiment
from .lp import SimulationError
from .paths import PriceCsvError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

log = logging.getLogger("everlasting_sim")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    names = [e.value for e in Experiment]
    p = argparse.ArgumentParser(prog="simulate", description="Run everlasting-option LP experiments.")
    p.add_argument("experiment", help=f"one of: {', '.join(names)} (hyphens allowed)")
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
    p.add_argument("--out", type=Path, help="output directory (overrides output_path)")
    p.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    p.add_argument("--csv", help="price CSV for real_data_replay (overrides replay_csv)")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as e:
            raise OSError(f"cannot read config {args.config}: {e.strerror or e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{args.config}: invalid JSON: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
    data["experiment"] = args.experiment.replace("-", "_")
    for key, value in (("seed", args.seed), ("workers", args.workers), ("replay_csv", args.csv)):
        if value is not None:
            data[key] = value
    if args.out is not None:
        data["output_path"] = str(args.out)
    cfg = ExperimentConfig.from_dict(data)
    if cfg.output_path is None:
        raise ConfigError("no output directory: pass --out or set output_path")
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args)
        written = run_experiment(cfg, cfg.output_path)
    except ConfigError as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    except PriceCsvError as e:
        log.error("price data error: %s", e)
        return EXIT_IO
    except OSError as e:
        log.error("I/O error: %s", e)
        return EXIT_IO
    except (SimulationError, ArithmeticError, ValueError) as e:
        log.error("runtime error: %s", e)
        return EXIT_RUNTIME
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
