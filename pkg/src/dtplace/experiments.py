"""Experiment drivers: training runs, scheme sweeps, and oracle comparisons.

All drivers write plot-ready CSV files into the configured output directory.
Every CSV starts with a `# config_hash=...` comment naming the resolved
configuration, so outputs can always be traced back to their settings, and
identical config+seed reruns reproduce the data rows byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, config_hash
from .deployment import LOCAL, brute_force_optimal
from .env import DTEnv, EnvConfig
from .marl import (
    Trainer,
    TrainerConfig,
    evaluate,
    evaluate_random,
    select_actions,
)
from .nets import save_checkpoint

EVAL_EPISODES = 20  # greedy episodes per evaluation summary


def _write_csv(path: Path, header: list[str], rows: list[list], digest: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(f"# config_hash={digest}\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _metric_rows(metrics: list[dict]) -> list[list]:
    rows = []
    for m in metrics:
        loss = "" if np.isnan(m["loss"]) else repr(float(m["loss"]))
        rows.append(
            [m["episode"], repr(float(m["return"])), repr(float(m["mean_delay"])),
             loss, repr(float(m["epsilon"]))]
        )
    return rows


def _random_metric_rows(env_cfg: EnvConfig, episodes: int, seed: int) -> list[list]:
    """Evaluation-only rows for the rd baseline; loss and epsilon stay empty."""
    summary = evaluate_random(env_cfg, episodes=episodes, seed=seed)
    return [
        [ep, repr(float(ret)), repr(float(delay)), "", ""]
        for ep, (ret, delay) in enumerate(
            zip(summary["episode_returns"], summary["episode_delays"])
        )
    ]


def run_training(config: ExperimentConfig) -> dict:
    """Train config.scheme on every seed; emit per-seed and averaged CSVs.

    Returns a summary with the written file paths and per-seed metrics.  The
    rd baseline skips training and checkpoints and logs evaluation episodes.
    """
    out = Path(config.out_dir)
    digest = config_hash(config)
    scheme = config.scheme
    files: list[str] = []
    per_seed: dict[int, list[dict]] = {}

    for seed in config.seeds:
        if scheme == "rd":
            rows = _random_metric_rows(config.env, config.trainer.episodes, seed)
            metrics = [
                {"episode": r[0], "return": float(r[1]), "mean_delay": float(r[2])}
                for r in rows
            ]
        else:
            trainer_cfg = dataclasses.replace(config.trainer, seed=seed)
            trainer = Trainer(config.env, trainer_cfg, scheme)
            result = trainer.run()
            metrics = result.metrics
            rows = _metric_rows(metrics)
            ckpt = out / f"{scheme}_seed{seed}.npz"
            ckpt.parent.mkdir(parents=True, exist_ok=True)
            save_checkpoint(
                ckpt,
                trainer.checkpoint_tensors(),
                {
                    "config_hash": digest,
                    "scheme": scheme,
                    "seed": seed,
                    "input_dim": trainer.net.input_dim,
                    "num_actions": trainer.net.num_actions,
                    "hidden_dim": trainer.net.hidden_dim,
                },
            )
            files.append(str(ckpt))
        per_seed[seed] = metrics
        path = out / f"train_{scheme}_seed{seed}.csv"
        _write_csv(path, ["episode", "return", "mean_delay", "loss", "epsilon"],
                   rows, digest)
        files.append(str(path))

    episodes = min(len(m) for m in per_seed.values())
    mean_rows = []
    for ep in range(episodes):
        rets = [per_seed[s][ep]["return"] for s in config.seeds]
        delays = [per_seed[s][ep]["mean_delay"] for s in config.seeds]
        mean_rows.append([ep, repr(float(np.mean(rets))), repr(float(np.mean(delays)))])
    mean_path = out / f"train_{scheme}_mean.csv"
    _write_csv(mean_path, ["episode", "mean_reward", "mean_delay"], mean_rows, digest)
    files.append(str(mean_path))

    return {"scheme": scheme, "seeds": list(config.seeds), "files": files,
            "metrics": per_seed, "config_hash": digest}


def apply_sweep_value(env_cfg: EnvConfig, parameter: str, value) -> EnvConfig:
    """Return a copy of env_cfg with one swept parameter applied."""
    if parameter == "num_users":
        return dataclasses.replace(env_cfg, num_users=int(value))
    if parameter == "data_size_mb":
        return dataclasses.replace(
            env_cfg, data_size_mb_min=float(value), data_size_mb_max=float(value)
        )
    raise ValueError(f"unknown sweep parameter {parameter!r}")


def _cell_delay(env_cfg: EnvConfig, trainer_cfg: TrainerConfig, scheme: str,
                seed: int) -> float:
    """Mean evaluated delay for one (value, scheme, seed) sweep cell."""
    eval_seed = 10_000 + seed  # shared across schemes: paired comparisons
    if scheme == "rd":
        return evaluate_random(env_cfg, episodes=EVAL_EPISODES, seed=eval_seed)[
            "mean_delay"
        ]
    trainer = Trainer(env_cfg, dataclasses.replace(trainer_cfg, seed=seed), scheme)
    trainer.run()
    return evaluate(trainer.net, env_cfg, episodes=EVAL_EPISODES, seed=eval_seed)[
        "mean_delay"
    ]


def run_sweep(config: ExperimentConfig) -> dict:
    """Train/evaluate every (value, scheme) cell of the configured sweep.

    Emits comparison.csv with mean and std of evaluated delay over seeds.
    Cell failures are recorded in sweep_failures.csv and the sweep continues;
    a (value, scheme) row appears only if at least one seed succeeded.
    """
    out = Path(config.out_dir)
    digest = config_hash(config)
    spec = config.sweep
    rows, failures = [], []

    for value in spec.values:
        env_cfg = apply_sweep_value(config.env, spec.parameter, value)
        for scheme in spec.schemes:
            delays = []
            for seed in config.seeds:
                try:
                    delays.append(_cell_delay(env_cfg, config.trainer, scheme, seed))
                except Exception as exc:  # record and keep sweeping
                    failures.append(
                        [value, scheme, seed, f"{type(exc).__name__}: {exc}"]
                    )
            if delays:
                rows.append(
                    [value, scheme, repr(float(np.mean(delays))),
                     repr(float(np.std(delays)))]
                )

    comparison = out / "comparison.csv"
    _write_csv(comparison, ["value", "scheme", "mean_delay", "std_delay"], rows, digest)
    failures_path = out / "sweep_failures.csv"
    _write_csv(failures_path, ["value", "scheme", "seed", "error"], failures, digest)
    return {
        "parameter": spec.parameter,
        "rows": rows,
        "failures": failures,
        "files": [str(comparison), str(failures_path)],
        "config_hash": digest,
    }


def run_oracle_compare(config: ExperimentConfig, instance_count: int) -> dict:
    """Per-instance optimality check on static scenarios.

    For each instance: enumerate the optimal deployment, train the value-
    decomposition scheme on that frozen instance, and compare greedy and
    random mean delays against the optimum.  Gaps are (delay - opt) / opt.
    """
    if instance_count < 1:
        raise ValueError("instance_count must be >= 1")
    env_cfg = config.env
    if env_cfg.mobility_sigma_m != 0 or env_cfg.shadowing_sigma_db != 0:
        raise ValueError(
            "oracle comparison needs a static scenario "
            "(mobility_sigma_m = 0 and shadowing_sigma_db = 0)"
        )
    out = Path(config.out_dir)
    digest = config_hash(config)
    probe_env = DTEnv(env_cfg)
    rows = []
    gaps_trained, gaps_random = [], []

    for idx in range(instance_count):
        instance_seed = 77_000 + idx
        probe_env.reset(instance_seed)
        _, optimal_delay = brute_force_optimal(probe_env.snapshot)

        trainer_cfg = dataclasses.replace(
            config.trainer,
            seed=config.trainer.seed + idx,
            fixed_instance_seed=instance_seed,
        )
        trainer = Trainer(env_cfg, trainer_cfg, "proposed")
        trainer.run()
        trained = evaluate(
            trainer.net, env_cfg, episodes=1, seed=0, fixed_instance_seed=instance_seed
        )["mean_delay"]
        random_delay = evaluate_random(
            env_cfg, episodes=5, seed=idx, fixed_instance_seed=instance_seed
        )["mean_delay"]

        gap_t = (trained - optimal_delay) / optimal_delay
        gap_r = (random_delay - optimal_delay) / optimal_delay
        gaps_trained.append(gap_t)
        gaps_random.append(gap_r)
        rows.append(
            [idx, repr(float(optimal_delay)), repr(float(trained)),
             repr(float(random_delay)), repr(float(gap_t)), repr(float(gap_r))]
        )

    report = out / "oracle_report.csv"
    _write_csv(
        report,
        ["instance", "optimal_delay", "trained_delay", "random_delay",
         "trained_gap", "random_gap"],
        rows,
        digest,
    )
    return {
        "instances": instance_count,
        "mean_trained_gap": float(np.mean(gaps_trained)),
        "mean_random_gap": float(np.mean(gaps_random)),
        "files": [str(report)],
        "config_hash": digest,
    }


def greedy_trajectories(net, env_cfg: EnvConfig, episodes: int, seed: int) -> list[list]:
    """Per-step rows of a greedy rollout: actions, delays, reward per slot."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    env = DTEnv(env_cfg)
    seed_rng = np.random.default_rng(seed)
    rng = np.random.default_rng(0)  # unused at epsilon 0
    rows = []
    for episode in range(episodes):
        _, obs = env.reset(int(seed_rng.integers(0, 2**63 - 1)))
        hidden = net.init_hidden(env_cfg.num_users)
        prev = np.full(env_cfg.num_users, LOCAL, dtype=np.int64)
        done = False
        slot = 0
        while not done:
            actions, hidden = select_actions(
                net, obs, prev, hidden, env.action_masks(), 0.0, rng
            )
            result = env.step(actions)
            rows.append(
                [episode, slot]
                + [int(a) for a in result.matrix.assignment()]
                + [repr(float(d)) for d in result.per_user_delays]
                + [repr(float(result.l_sum)), repr(float(result.reward))]
            )
            obs = result.observations
            prev = actions
            done = result.done
            slot += 1
    return rows


def trajectory_header(num_users: int) -> list[str]:
    return (
        ["episode", "slot"]
        + [f"action_{i}" for i in range(num_users)]
        + [f"delay_{i}" for i in range(num_users)]
        + ["l_sum", "reward"]
    )
