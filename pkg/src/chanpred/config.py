"""Experiment config files.

Line-oriented ``key = value`` pairs under ``[channel]``, ``[predictor]``,
``[train]`` and ``[sweep]`` headers. ``#`` starts a comment line. Unknown
sections or keys are errors.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from chanpred.harness import TrialConfig
from chanpred.neural import Architecture, TrainConfig
from chanpred.numerics import DomainError


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(cast):
    return lambda text: [cast(v) for v in text.replace(",", " ").split()]


def _grid(text: str) -> list[tuple[int, int]]:
    # "1x8, 1x16, 2x8"
    cells = []
    for item in text.replace(",", " ").split():
        layers, _, units = item.partition("x")
        cells.append((int(layers), int(units)))
    return cells


# section -> key -> (target, field, parser)
_SCHEMA = {
    "channel": {
        "total_samples": ("trial", int),
        "train_fraction": ("trial", float),
        "snr_db": ("trial", float),
        "fd_max": ("trial", float),
        "ts": ("trial", float),
        "num_sinusoids": ("trial", int),
        "white_channel": ("trial", _bool),
        "seed": ("trial", int),
    },
    "predictor": {
        "window": ("trial", int),
        "horizon": ("trial", int),
        "predictors": ("trial", _list(str)),
        "wiener_acf": ("trial", str),
        "hidden_layers": ("arch", int),
        "hidden_units": ("arch", int),
        "input_mode": ("arch", str),
        "dropout_rate": ("arch", float),
    },
    "train": {
        "learning_rate": ("train", float),
        "batch_size": ("train", int),
        "max_epochs": ("train", int),
        "patience": ("train", int),
        "min_delta": ("train", float),
        "validation_fraction": ("train", float),
    },
    "sweep": {
        "axis": ("sweep", str),
        "values": ("sweep", _list(float)),
        "trials": ("sweep", int),
        "grid": ("sweep", _grid),
        "doppler_values": ("sweep", _list(float)),
        "workers": ("sweep", int),
    },
}


@dataclass
class SweepSettings:
    axis: str = "window"
    values: list = field(default_factory=lambda: [2, 3, 4, 5, 6, 7, 8])
    trials: int = 100
    grid: list = field(default_factory=lambda: [(1, 8), (1, 16), (2, 8), (2, 16), (3, 8), (3, 16)])
    # Seven points over 10-200 Hz.
    doppler_values: list = field(default_factory=lambda: [10.0, 40.0, 70.0, 100.0, 130.0, 160.0, 200.0])
    workers: int = 1


@dataclass
class Experiment:
    trial: TrialConfig
    sweep: SweepSettings
    # Keys set explicitly in the file.
    explicit: set = field(default_factory=set)


def parse_config(text: str, source: str = "<config>") -> Experiment:
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                       inline_comment_prefixes=None, interpolation=None,
                                       default_section="__unused__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    groups = {"trial": {}, "arch": {}, "train": {}, "sweep": {}}
    explicit = set()
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            target, cast = _SCHEMA[section][key]
            explicit.add(key)
            try:
                groups[target][key] = cast(raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: bad value for {section}.{key}: {exc}") from exc
    try:
        arch = Architecture(**groups["arch"])
        train_cfg = TrainConfig(**groups["train"])
        trial = TrialConfig(arch=arch, train_cfg=train_cfg, **groups["trial"])
        trial = replace(trial, arch=replace(arch, window=trial.window))
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return Experiment(trial, SweepSettings(**groups["sweep"]), explicit)


def load_config(path) -> Experiment:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
