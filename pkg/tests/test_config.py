"""Tests for config file loading, validation, and hashing."""

import pytest

from dtplace.config import (
    ConfigKeyError,
    ConfigParseError,
    ConfigValueError,
    ExperimentConfig,
    MissingConfigError,
    SweepSpec,
    config_hash,
    load_config,
)


def write(tmp_path, text: str):
    path = tmp_path / "exp.ini"
    path.write_text(text)
    return path


def test_empty_file_gives_reference_defaults(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    assert cfg.env.num_users == 20
    assert cfg.env.gamma == 0.9
    assert cfg.trainer.lr == 1e-4
    assert cfg.trainer.batch == 64
    assert cfg.trainer.episodes == 1000
    assert cfg.scheme == "proposed"
    assert cfg.seeds == (0, 1, 2, 3, 4)


def test_overrides_applied(tmp_path):
    cfg = load_config(
        write(
            tmp_path,
            """
            [env]
            num_users = 8
            alpha = 1.0
            beta = 0.0

            [trainer]
            episodes = 50
            batch = 16
            eps_decay_episodes = none

            [experiment]
            scheme = qmix
            seeds = 3, 5, 7
            out_dir = /tmp/exp

            [sweep]
            parameter = data_size_mb
            values = 0.5 1.0
            schemes = proposed rd
            """,
        )
    )
    assert cfg.env.num_users == 8
    assert cfg.env.alpha == 1.0 and cfg.env.beta == 0.0
    assert cfg.trainer.episodes == 50 and cfg.trainer.batch == 16
    assert cfg.trainer.eps_decay_episodes is None
    assert cfg.scheme == "qmix"
    assert cfg.seeds == (3, 5, 7)
    assert cfg.out_dir == "/tmp/exp"
    assert cfg.sweep.parameter == "data_size_mb"
    assert cfg.sweep.values == (0.5, 1.0)
    assert cfg.sweep.schemes == ("proposed", "rd")


def test_missing_file_error():
    with pytest.raises(MissingConfigError):
        load_config("/nonexistent/exp.ini")


def test_parse_error(tmp_path):
    with pytest.raises(ConfigParseError):
        load_config(write(tmp_path, "num_users = 5\n"))  # key before any section


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigKeyError):
        load_config(write(tmp_path, "[env]\nnum_userz = 5\n"))
    with pytest.raises(ConfigKeyError):
        load_config(write(tmp_path, "[experiment]\ncolor = blue\n"))
    with pytest.raises(ConfigKeyError):
        load_config(write(tmp_path, "[resources]\ncpus = 4\n"))


def test_out_of_range_value_rejected(tmp_path):
    with pytest.raises(ConfigValueError):
        load_config(write(tmp_path, "[env]\nnum_users = -1\n"))
    with pytest.raises(ConfigValueError):
        load_config(write(tmp_path, "[env]\ngamma = 1.5\n"))
    with pytest.raises(ConfigValueError):
        load_config(write(tmp_path, "[trainer]\nepisodes = abc\n"))


def test_unknown_scheme_rejected(tmp_path):
    with pytest.raises(ConfigValueError):
        load_config(write(tmp_path, "[experiment]\nscheme = dqn\n"))


def test_sweep_spec_validation():
    with pytest.raises(ConfigValueError):
        SweepSpec(parameter="bandwidth_hz")
    with pytest.raises(ConfigValueError):
        SweepSpec(values=())
    with pytest.raises(ConfigValueError):
        SweepSpec(schemes=("proposed", "dqn"))


def test_config_hash_stable_and_sensitive(tmp_path):
    a = load_config(write(tmp_path, "[env]\nnum_users = 8\n"))
    b = load_config(write(tmp_path, "[env]\nnum_users = 8\n"))
    c = load_config(write(tmp_path, "[env]\nnum_users = 9\n"))
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 12
    int(config_hash(a), 16)  # hex digest


def test_config_hash_ignores_output_location():
    a = ExperimentConfig(out_dir="x")
    b = ExperimentConfig(out_dir="y")
    assert config_hash(a) == config_hash(b)
