"""Command-line entry points: train, evaluate, sweep, oracle.

Every subcommand exits 0 on success; failures print one JSON error line to
stderr and exit nonzero, so callers can parse outcomes mechanically.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, config_hash, load_config
from .deployment import brute_force_optimal, snapshot_from_json
from .experiments import (
    greedy_trajectories,
    run_oracle_compare,
    run_sweep,
    run_training,
    trajectory_header,
)
from .marl import ALL_SCHEMES, evaluate
from .nets import AgentNet, load_checkpoint


def _resolved_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    updates: dict = {}
    if getattr(args, "scheme", None):
        updates["scheme"] = args.scheme
    if getattr(args, "seed", None) is not None:
        updates["seeds"] = (args.seed,)
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    return dataclasses.replace(config, **updates) if updates else config


def _cmd_train(args) -> int:
    config = _resolved_config(args)
    summary = run_training(config)
    print(json.dumps({"command": "train", "scheme": summary["scheme"],
                      "seeds": summary["seeds"], "files": summary["files"],
                      "config_hash": summary["config_hash"]}))
    return 0


def _cmd_evaluate(args) -> int:
    config = _resolved_config(args)
    tensors, meta = load_checkpoint(args.checkpoint)
    net = AgentNet(
        int(meta["input_dim"]), int(meta["num_actions"]), int(meta["hidden_dim"]),
        np.random.default_rng(0),
    )
    net.load_state_dict(
        {k.removeprefix("agent."): v for k, v in tensors.items()
         if k.startswith("agent.")}
    )
    env_cfg = config.env
    expected = env_cfg.obs_dim + env_cfg.num_targets
    if net.input_dim != expected:
        raise ValueError(
            f"checkpoint expects input dim {net.input_dim}, "
            f"but this scenario produces {expected}; pass the training config"
        )
    seed = args.seed if args.seed is not None else 0
    summary = evaluate(net, env_cfg, episodes=args.episodes, seed=seed)
    if args.dump_trajectories:
        out = Path(args.out or config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = greedy_trajectories(net, env_cfg, args.episodes, seed)
        path = out / "trajectories.csv"
        with open(path, "w", newline="") as handle:
            handle.write(f"# config_hash={config_hash(config)}\n")
            handle.write(",".join(trajectory_header(env_cfg.num_users)) + "\n")
            for row in rows:
                handle.write(",".join(str(v) for v in row) + "\n")
        summary["trajectories"] = str(path)
    print(json.dumps({"command": "evaluate", **summary}))
    return 0


def _cmd_sweep(args) -> int:
    config = _resolved_config(args)
    if args.scheme:  # restrict the sweep to one scheme
        config = dataclasses.replace(
            config, sweep=dataclasses.replace(config.sweep, schemes=(args.scheme,))
        )
    summary = run_sweep(config)
    print(json.dumps({"command": "sweep", "parameter": summary["parameter"],
                      "rows": summary["rows"], "failures": summary["failures"],
                      "files": summary["files"],
                      "config_hash": summary["config_hash"]}))
    return 0


def _cmd_oracle(args) -> int:
    if args.snapshot:
        with open(args.snapshot) as handle:
            snapshot = snapshot_from_json(handle.read())
        matrix, delay = brute_force_optimal(snapshot)
        print(json.dumps({"command": "oracle",
                          "assignment": [int(a) for a in matrix.assignment()],
                          "total_delay": delay}))
        return 0
    config = _resolved_config(args)
    summary = run_oracle_compare(config, args.instances)
    print(json.dumps({"command": "oracle", **summary}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtplace",
        description="Twin-placement simulator and cooperative Q-learning trainer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="experiment config file (INI)")
        p.add_argument("--seed", type=int, help="override the seed list with one seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--scheme", choices=ALL_SCHEMES, help="scheme override")

    p_train = sub.add_parser("train", help="train one scheme over the seed list")
    common(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="greedy evaluation of a checkpoint")
    common(p_eval)
    p_eval.add_argument("--checkpoint", required=True, help="trained .npz checkpoint")
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument("--dump-trajectories", action="store_true",
                        help="write per-slot actions and delays to CSV")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="run the configured parameter sweep")
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="brute-force optimality comparison")
    common(p_oracle)
    p_oracle.add_argument("--instances", type=int, default=30,
                          help="number of static instances to compare")
    p_oracle.add_argument("--snapshot", help="solve one snapshot JSON file instead")
    p_oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
