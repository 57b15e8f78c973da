"""Experiment configuration: INI-style files mapped onto the dataclasses.

A config file has up to four sections; every key must be a field of the
matching dataclass (unknown keys are rejected so typos fail loudly):

    [env]        EnvConfig fields        (num_users, alpha, episode_len, ...)
    [trainer]    TrainerConfig fields    (episodes, batch, lr, ...)
    [experiment] scheme, seeds, out_dir
    [sweep]      parameter, values, schemes

An empty or absent section keeps the defaults.  Lists (seeds, values,
schemes) accept comma- or space-separated entries.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .env import EnvConfig
from .marl import ALL_SCHEMES, TrainerConfig

SWEEP_PARAMETERS = ("num_users", "data_size_mb")

DEFAULT_SEEDS = (0, 1, 2, 3, 4)


class ConfigError(ValueError):
    """Base class for configuration problems."""


class MissingConfigError(ConfigError):
    """The config file does not exist."""


class ConfigParseError(ConfigError):
    """The file is not valid sectioned key=value text."""


class ConfigKeyError(ConfigError):
    """A section contains a key that no dataclass field matches."""


class ConfigValueError(ConfigError):
    """A value has the wrong type or is out of range."""


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter, the values to visit, and the schemes to compare."""

    parameter: str = "num_users"
    values: tuple = (18, 20, 22, 24)
    schemes: tuple = ALL_SCHEMES

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigValueError(
                f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {self.parameter!r}"
            )
        if not self.values:
            raise ConfigValueError("sweep values must be non-empty")
        for scheme in self.schemes:
            if scheme not in ALL_SCHEMES:
                raise ConfigValueError(f"unknown scheme {scheme!r} in sweep")


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    scheme: str = "proposed"
    seeds: tuple = DEFAULT_SEEDS
    out_dir: str = "results"
    sweep: SweepSpec = field(default_factory=SweepSpec)

    def __post_init__(self) -> None:
        if self.scheme not in ALL_SCHEMES:
            raise ConfigValueError(
                f"scheme must be one of {ALL_SCHEMES}, got {self.scheme!r}"
            )
        if not self.seeds:
            raise ConfigValueError("seeds must be non-empty")


def _coerce(raw: str, target_type, key: str):
    """Parse a raw string according to the dataclass field's annotation."""
    text = raw.strip()
    lowered = text.lower()
    if "int | None" in str(target_type) or "Optional[int]" in str(target_type):
        if lowered in ("", "none"):
            return None
        target_type = int
    try:
        if target_type is int:
            return int(text)
        if target_type is float:
            return float(text)
        if target_type is bool:
            if lowered in ("true", "yes", "1"):
                return True
            if lowered in ("false", "no", "0"):
                return False
            raise ValueError(text)
        return text
    except ValueError as exc:
        raise ConfigValueError(f"bad value for {key}: {raw!r}") from exc


def _parse_list(raw: str):
    return [tok for tok in raw.replace(",", " ").split() if tok]


def _section_kwargs(parser: configparser.ConfigParser, section: str, cls) -> dict:
    if not parser.has_section(section):
        return {}
    fields = {f.name: f.type for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in parser.items(section):
        if key not in fields:
            raise ConfigKeyError(f"unknown key {key!r} in [{section}]")
        annotation = fields[key]
        if annotation in ("int", int):
            annotation = int
        elif annotation in ("float", float):
            annotation = float
        kwargs[key] = _coerce(raw, annotation, f"{section}.{key}")
    return kwargs


def load_config(path) -> ExperimentConfig:
    """Read an experiment config file, applying defaults for absent keys."""
    path = Path(path)
    if not path.is_file():
        raise MissingConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"cannot parse {path}: {exc}") from exc

    known = {"env", "trainer", "experiment", "sweep"}
    extra = set(parser.sections()) - known
    if extra:
        raise ConfigKeyError(f"unknown section(s) {sorted(extra)}")

    try:
        env = EnvConfig(**_section_kwargs(parser, "env", EnvConfig))
        trainer = TrainerConfig(**_section_kwargs(parser, "trainer", TrainerConfig))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigValueError(str(exc)) from exc

    scheme = "proposed"
    seeds = DEFAULT_SEEDS
    out_dir = "results"
    if parser.has_section("experiment"):
        allowed = {"scheme", "seeds", "out_dir"}
        for key, raw in parser.items("experiment"):
            if key not in allowed:
                raise ConfigKeyError(f"unknown key {key!r} in [experiment]")
            if key == "scheme":
                scheme = raw.strip()
            elif key == "seeds":
                seeds = tuple(_coerce(tok, int, "experiment.seeds")
                              for tok in _parse_list(raw))
            else:
                out_dir = raw.strip()

    sweep_kwargs = {}
    if parser.has_section("sweep"):
        allowed = {"parameter", "values", "schemes"}
        for key, raw in parser.items("sweep"):
            if key not in allowed:
                raise ConfigKeyError(f"unknown key {key!r} in [sweep]")
            if key == "parameter":
                sweep_kwargs["parameter"] = raw.strip()
            elif key == "values":
                caster = int if parser.get("sweep", "parameter", fallback="num_users").strip() == "num_users" else float
                sweep_kwargs["values"] = tuple(
                    _coerce(tok, caster, "sweep.values") for tok in _parse_list(raw)
                )
            else:
                sweep_kwargs["schemes"] = tuple(_parse_list(raw))
    sweep = SweepSpec(**sweep_kwargs)

    return ExperimentConfig(
        env=env, trainer=trainer, scheme=scheme, seeds=seeds, out_dir=out_dir,
        sweep=sweep,
    )


def config_hash(config: ExperimentConfig) -> str:
    """Stable 12-hex digest of every resolved setting, for output provenance."""
    lines = []
    for section, obj in (("env", config.env), ("trainer", config.trainer)):
        for f in dataclasses.fields(obj):
            lines.append(f"{section}.{f.name}={getattr(obj, f.name)!r}")
    lines.append(f"experiment.scheme={config.scheme!r}")
    lines.append(f"experiment.seeds={tuple(config.seeds)!r}")
    lines.append(f"sweep.parameter={config.sweep.parameter!r}")
    lines.append(f"sweep.values={tuple(config.sweep.values)!r}")
    lines.append(f"sweep.schemes={tuple(config.sweep.schemes)!r}")
    digest = hashlib.sha256("\n".join(sorted(lines)).encode()).hexdigest()
    return digest[:12]
