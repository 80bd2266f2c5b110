"""Command line entry point: ``stack3d <cost|flow|roadmap|pdn|calibrate>``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import explorer
from .artifacts import write_many
from .config import ConfigError, load_config, parse_seeds

log = logging.getLogger("stack3d")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is our config-error code
    # already; only the message prefix is adjusted
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: config error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", default="0", help="seed list, e.g. 7 or 1,2,3 or 0-19")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="stack3d", description="3D integration design-space explorer")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("cost", parents=[common], help="die/stack cost scenarios over an area sweep")
    sub.add_parser("flow", parents=[common], help="2D vs 3D place, timing and power delivery")
    sub.add_parser("roadmap", parents=[common], help="connection pitch vs density table")
    sub.add_parser("pdn", parents=[common], help="2D vs 3D bump current and IR drop")
    sub.add_parser("calibrate", parents=[common], help="fit the shrink wafer-cost ratio")
    return p


def _run(args) -> dict[str, str]:
    cfg = load_config(args.config)
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}", "--jobs")
    seeds = parse_seeds(args.seed)
    fmt = args.format

    def with_pool(fn):
        if args.jobs == 1:
            return fn(map)
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            # Executor.map yields in submission order, so merges are deterministic
            return fn(ex.map)

    if args.command == "roadmap":
        return explorer.roadmap_study(cfg, fmt)
    if args.command == "calibrate":
        return explorer.calibrate_study(cfg, fmt)
    if args.command == "pdn":
        return explorer.pdn_study(cfg, fmt)
    if args.command == "cost":
        return with_pool(lambda m: explorer.cost_study(cfg, fmt, pool_map=m))
    if args.command == "flow":
        return with_pool(lambda m: explorer.flow_study(cfg, fmt, seeds, pool_map=m))
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        files = _run(args)
        write_many({os.path.join(args.out, k): v for k, v in files.items()})
    except ConfigError as e:
        print(f"stack3d {args.command}: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, RuntimeError, OSError) as e:
        print(f"stack3d {args.command}: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    for k in sorted(files):
        log.info("wrote %s", os.path.join(args.out, k))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
