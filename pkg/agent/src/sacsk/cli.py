"""Command line front end for training runs.

    sacsk-train --agent sacsk --scenario-seed 1 --iterations 200 --out runs/a0

Log verbosity comes from the SACSK_LOG environment variable
(DEBUG, INFO, WARNING, ERROR; default INFO).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from .hyper import AgentHyperparams
from .train import TrainConfig, train


def _setup_logging() -> None:
    level_name = os.environ.get("SACSK_LOG", "INFO").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sacsk-train",
        description="train a soft actor-critic agent against the environment server")
    parser.add_argument("--agent", choices=["sacsk", "sac"], default="sacsk")
    parser.add_argument("--scenario-config", default=None,
                        help="JSON scenario config passed to the server")
    parser.add_argument("--scenario-seed", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0, help="agent seed")
    parser.add_argument("--iterations", type=int, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--warmup", type=int, default=None,
                        help="transitions collected before updates start")
    parser.add_argument("--updates-per-step", type=int, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--target-entropy", type=float, default=None)
    parser.add_argument("--target-entropy-final", type=float, default=None,
                        help="late-training entropy target; enables the "
                             "linear anneal window")
    parser.add_argument("--anneal-from", type=float, default=None,
                        help="fraction of the run where the entropy anneal begins")
    parser.add_argument("--anneal-to", type=float, default=None,
                        help="fraction of the run where the entropy anneal ends")
    parser.add_argument("--alpha-init", type=float, default=None)
    parser.add_argument("--explore-every", type=int, default=None,
                        help="add an exploration episode every this many "
                             "iterations (0 disables)")
    parser.add_argument("--explore-until", type=float, default=None,
                        help="fraction of the run during which exploration "
                             "episodes are added")
    parser.add_argument("--explore-greedy", type=float, default=None,
                        help="fraction of exploration episodes driven by "
                             "the best sampled action under the critics")
    parser.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    hyper = AgentHyperparams()
    overrides = [
        ("iterations", "total_iterations"),
        ("batch_size", "batch_size"),
        ("warmup", "warmup_transitions"),
        ("updates_per_step", "updates_per_step"),
        ("gamma", "gamma"),
        ("target_entropy", "target_entropy"),
        ("target_entropy_final", "target_entropy_final"),
        ("anneal_from", "anneal_from_frac"),
        ("anneal_to", "anneal_to_frac"),
        ("alpha_init", "alpha_init"),
        ("explore_every", "explore_every"),
        ("explore_until", "explore_until_frac"),
        ("explore_greedy", "explore_greedy_frac"),
    ]
    for arg_name, field_name in overrides:
        value = getattr(args, arg_name)
        if value is not None:
            setattr(hyper, field_name, value)
    tc = TrainConfig(agent=args.agent, scenario_config=args.scenario_config,
                     scenario_seed=args.scenario_seed, agent_seed=args.seed,
                     out_dir=args.out, hyper=hyper)
    try:
        result = train(tc)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"final evaluation return: {result.final_eval_return}")
    print(f"learning curve: {result.curve_path}")
    print(f"checkpoint: {result.checkpoint_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
