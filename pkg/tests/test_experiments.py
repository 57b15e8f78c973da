"""Tests for the experiment drivers and the command-line interface."""

import json
import subprocess

import pytest

from dtplace.config import ExperimentConfig, SweepSpec
from dtplace.env import EnvConfig
from dtplace.experiments import (
    apply_sweep_value,
    run_oracle_compare,
    run_sweep,
    run_training,
)
from dtplace.marl import TrainerConfig
from dtplace.cli import main


def tiny_experiment(tmp_path, **overrides) -> ExperimentConfig:
    base = dict(
        env=EnvConfig(num_users=3, num_end_nodes=2, end_node_capacity=2,
                      episode_len=3),
        trainer=TrainerConfig(episodes=3, batch=2, hidden_dim=8, mixer_embed_dim=4,
                              buffer_capacity=16),
        scheme="proposed",
        seeds=(0, 1),
        out_dir=str(tmp_path / "out"),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def data_rows(path) -> list[str]:
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    return lines[1:]


# -- run_training -------------------------------------------------------------------


def test_run_training_emits_per_seed_and_mean_csv(tmp_path):
    config = tiny_experiment(tmp_path)
    summary = run_training(config)
    out = tmp_path / "out"
    for seed in (0, 1):
        rows = data_rows(out / f"train_proposed_seed{seed}.csv")
        assert rows[0] == "episode,return,mean_delay,loss,epsilon"
        assert len(rows) == 1 + 3  # header + one row per episode
        assert (out / f"proposed_seed{seed}.npz").exists()
    mean_rows = data_rows(out / "train_proposed_mean.csv")
    assert mean_rows[0] == "episode,mean_reward,mean_delay"
    assert len(mean_rows) == 1 + 3
    assert summary["config_hash"] in (out / "train_proposed_mean.csv").read_text()


def test_run_training_rd_writes_no_checkpoints(tmp_path):
    config = tiny_experiment(tmp_path, scheme="rd", seeds=(0,))
    run_training(config)
    out = tmp_path / "out"
    rows = data_rows(out / "train_rd_seed0.csv")
    assert len(rows) == 1 + 3
    # loss and epsilon stay empty for the untrained baseline
    assert rows[1].endswith(",,")
    assert not list(out.glob("*.npz"))


def test_run_training_reruns_are_byte_identical(tmp_path):
    config_a = tiny_experiment(tmp_path, out_dir=str(tmp_path / "a"), seeds=(0,))
    config_b = tiny_experiment(tmp_path, out_dir=str(tmp_path / "b"), seeds=(0,))
    run_training(config_a)
    run_training(config_b)
    a = (tmp_path / "a" / "train_proposed_seed0.csv").read_bytes()
    b = (tmp_path / "b" / "train_proposed_seed0.csv").read_bytes()
    assert a == b


# -- sweeps -------------------------------------------------------------------------


def test_apply_sweep_value():
    env = EnvConfig()
    assert apply_sweep_value(env, "num_users", 24).num_users == 24
    sized = apply_sweep_value(env, "data_size_mb", 1.5)
    assert sized.data_size_mb_min == sized.data_size_mb_max == 1.5
    with pytest.raises(ValueError):
        apply_sweep_value(env, "area_m", 100)


def test_run_sweep_rows_and_failures(tmp_path):
    config = tiny_experiment(
        tmp_path,
        seeds=(0,),
        sweep=SweepSpec(parameter="num_users", values=(3, 4), schemes=("proposed", "rd")),
    )
    summary = run_sweep(config)
    assert len(summary["rows"]) == 4  # 2 values x 2 schemes
    assert summary["failures"] == []
    rows = data_rows((tmp_path / "out") / "comparison.csv")
    assert rows[0] == "value,scheme,mean_delay,std_delay"
    assert len(rows) == 1 + 4


def test_run_sweep_records_cell_failures_and_continues(tmp_path, monkeypatch):
    config = tiny_experiment(
        tmp_path,
        seeds=(0,),
        sweep=SweepSpec(parameter="data_size_mb", values=(0.5,),
                        schemes=("proposed", "rd")),
    )
    import dtplace.experiments as exps

    original = exps._cell_delay

    def flaky(env_cfg, trainer_cfg, scheme, seed):
        if scheme == "proposed":
            raise RuntimeError("cell exploded")
        return original(env_cfg, trainer_cfg, scheme, seed)

    monkeypatch.setattr(exps, "_cell_delay", flaky)
    summary = run_sweep(config)
    assert len(summary["failures"]) == 1
    assert summary["failures"][0][1] == "proposed"
    assert [r[1] for r in summary["rows"]] == ["rd"]
    failure_rows = data_rows((tmp_path / "out") / "sweep_failures.csv")
    assert "RuntimeError" in failure_rows[1]  # header then the recorded row


# -- oracle comparison ----------------------------------------------------------------


def test_run_oracle_compare_static_instances(tmp_path):
    config = tiny_experiment(
        tmp_path,
        env=EnvConfig(num_users=2, num_end_nodes=2, end_node_capacity=2,
                      episode_len=3, mobility_sigma_m=0.0, shadowing_sigma_db=0.0,
                      beta=0.0, alpha=1.0),
        trainer=TrainerConfig(episodes=4, batch=2, hidden_dim=8, buffer_capacity=8),
        seeds=(0,),
    )
    summary = run_oracle_compare(config, instance_count=2)
    assert summary["instances"] == 2
    # random play can never beat the enumerated optimum
    assert summary["mean_random_gap"] >= -1e-9
    rows = data_rows((tmp_path / "out") / "oracle_report.csv")
    assert rows[0] == ("instance,optimal_delay,trained_delay,random_delay,"
                       "trained_gap,random_gap")
    assert len(rows) == 1 + 2


def test_run_oracle_compare_requires_static_env(tmp_path):
    config = tiny_experiment(tmp_path)  # mobile by default
    with pytest.raises(ValueError):
        run_oracle_compare(config, instance_count=1)
    static = tiny_experiment(
        tmp_path,
        env=EnvConfig(num_users=2, mobility_sigma_m=0.0, shadowing_sigma_db=0.0),
    )
    with pytest.raises(ValueError):
        run_oracle_compare(static, instance_count=0)


# -- CLI ------------------------------------------------------------------------------


def write_config(tmp_path, text: str):
    path = tmp_path / "exp.ini"
    path.write_text(text)
    return str(path)


TINY_INI = """
[env]
num_users = 3
num_end_nodes = 2
end_node_capacity = 2
episode_len = 3

[trainer]
episodes = 3
batch = 2
hidden_dim = 8
mixer_embed_dim = 4
buffer_capacity = 16
"""


def test_cli_train_then_evaluate_roundtrip(tmp_path, capsys):
    cfg = write_config(tmp_path, TINY_INI)
    out = str(tmp_path / "run")
    assert main(["train", "--config", cfg, "--seed", "0", "--out", out]) == 0
    train_out = json.loads(capsys.readouterr().out)
    assert train_out["command"] == "train"
    ckpt = f"{out}/proposed_seed0.npz"
    assert ckpt in train_out["files"]

    code = main([
        "evaluate", "--config", cfg, "--checkpoint", ckpt, "--episodes", "2",
        "--out", out, "--dump-trajectories",
    ])
    assert code == 0
    eval_out = json.loads(capsys.readouterr().out)
    assert eval_out["episodes"] == 2
    traj = (tmp_path / "run" / "trajectories.csv").read_text().splitlines()
    assert traj[1].startswith("episode,slot,action_0")
    assert len(traj) == 2 + 2 * 3  # comment + header + episodes x slots


def test_cli_sweep(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        TINY_INI + "\n[experiment]\nseeds = 0\n"
        "\n[sweep]\nparameter = num_users\nvalues = 3\nschemes = rd\n",
    )
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "sw")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["command"] == "sweep"
    assert len(out["rows"]) == 1


def test_cli_oracle_snapshot_solve(tmp_path, capsys):
    from dtplace.deployment import snapshot_to_json
    from dtplace.env import DTEnv

    env = DTEnv(EnvConfig(num_users=2, num_end_nodes=2))
    env.reset(7)
    path = tmp_path / "snap.json"
    path.write_text(snapshot_to_json(env.snapshot))
    assert main(["oracle", "--snapshot", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["assignment"]) == 2
    assert out["total_delay"] > 0


def test_cli_error_is_machine_readable(tmp_path, capsys):
    code = main(["train", "--config", "/nonexistent.ini"])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "MissingConfigError"


def test_cli_entry_point_installed():
    proc = subprocess.run(["dtplace", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "train" in proc.stdout and "oracle" in proc.stdout
