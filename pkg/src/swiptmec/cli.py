"""Command line front end.

    swiptmec run --config cfg.json --policy seeker --seeds 1,2,3 --out results/
    swiptmec serve --config cfg.json --port 7733
    swiptmec serve --config cfg.json --stdio

Log verbosity comes from the SWIPTMEC_LOG environment variable
(DEBUG, INFO, WARNING, ERROR; default WARNING).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from . import __version__
from .harness import RunSpec, run_experiment, serve_env
from .scenario import ConfigError, ScenarioConfig, load_config

log = logging.getLogger("swiptmec")


def _setup_logging() -> None:
    level_name = os.environ.get("SWIPTMEC_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _parse_seeds(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swiptmec",
        description="UAV wireless-power and edge-compute network simulator")
    parser.add_argument("--version", action="version", version=f"swiptmec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run scripted-policy episodes and write artifacts")
    run_p.add_argument("--config", help="JSON scenario config (defaults when omitted)")
    run_p.add_argument("--policy", required=True,
                       choices=["hover", "random", "seeker"])
    run_p.add_argument("--episodes", type=int, default=None,
                       help="episode count; defaults to the number of seeds")
    run_p.add_argument("--seeds", type=_parse_seeds, default=None,
                       help="comma-separated seed list; defaults to 1..episodes")
    run_p.add_argument("--out", required=True, help="output directory")

    serve_p = sub.add_parser("serve", help="serve the reset/step wire protocol")
    serve_p.add_argument("--config", help="JSON scenario config (defaults when omitted)")
    group = serve_p.add_mutually_exclusive_group()
    group.add_argument("--port", type=int, default=None,
                       help="TCP port (0 picks a free one)")
    group.add_argument("--stdio", action="store_true",
                       help="serve a single session over stdin/stdout")
    return parser


def _load(config_path: Optional[str]) -> ScenarioConfig:
    if config_path is None:
        return ScenarioConfig()
    return load_config(config_path)


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "run":
        seeds = args.seeds
        episodes = args.episodes
        if seeds is None:
            episodes = episodes if episodes is not None else 1
            seeds = list(range(1, episodes + 1))
        elif episodes is not None and episodes != len(seeds):
            print(f"--episodes {episodes} disagrees with {len(seeds)} seeds",
                  file=sys.stderr)
            return 2
        spec = RunSpec(cfg=cfg, policy=args.policy, seeds=seeds, out_dir=args.out)
        try:
            rows = run_experiment(spec)
        except ValueError as exc:
            print(f"run error: {exc}", file=sys.stderr)
            return 2
        for row in rows:
            print(f"seed {row['seed']}: return {row['return']}, "
                  f"E_total_J {row['E_total_J']}, final_jain {row['final_jain']}")
        return 0

    if args.command == "serve":
        serve_env(cfg, port=args.port, stdio=args.stdio)
        try:
            sys.stdout.flush()
        except BrokenPipeError:
            # The client hung up first; hand the interpreter a writable
            # stdout so shutdown does not print a spurious traceback.
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
