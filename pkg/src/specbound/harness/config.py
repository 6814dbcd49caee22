"""Line-oriented experiment configuration with a strict schema.

Format: ``[section]`` headers and ``key = value`` lines, comments starting
with ``#`` or ``;``.  No nesting beyond one section level.  Every key has a
default; unknown sections or keys fail before any computation, with the
offending line number in the message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_text"]


class ConfigError(ValueError):
    """Schema violation: carries the offending line/key."""


def _bool(raw: str):
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _float_list(raw: str):
    return [float(tok) for tok in raw.replace(",", " ").split()]


def _int_list(raw: str):
    return [int(tok) for tok in raw.replace(",", " ").split()]


def _fit_or_float(raw: str):
    if raw.strip().lower() == "fit":
        return "fit"
    return float(raw)


def _opt_float(raw: str):
    if raw.strip() == "":
        return None
    return float(raw)


_KINDS = ("enclosure", "resolvent_scaling", "line_bounds", "random_mc", "region_plot")
_MODEL_KINDS = ("torus1", "torus2", "sphere2", "line")
_FAMILIES = ("constant", "band_limited", "nonvanishing", "square_well", "multiwell", "zero")
_DISTS = ("bernoulli", "gaussian")
_DISPLAYS = ("7.1a", "7.1b", "pole")


def _enum(options):
    def conv(raw: str):
        val = raw.strip()
        if val not in options:
            raise ValueError(f"must be one of {options}, got {raw!r}")
        return val

    return conv


# section -> key -> (default, converter)
SCHEMA = {
    "experiment": {
        "kind": ("region_plot", _enum(_KINDS)),
        "out": ("runs", str.strip),
        "seed": (1234, int),
        "threads": (1, int),
        "label": ("", str.strip),
    },
    "model": {
        "kind": ("torus2", _enum(_MODEL_KINDS)),
        "size": ([8], _int_list),
        "halfwidth": (20.0, float),
    },
    "potential": {
        "family": ("band_limited", _enum(_FAMILIES)),
        "samples": (20, int),
        "bandwidth": (2, int),
        "value_re": (1.0, float),
        "value_im": (0.0, float),
        "scale": ([1.0], _float_list),
        "kappa": (2.0, float),
        "widths": ([0.32, 0.16, 0.08, 0.04], _float_list),
        "wells": (4, int),
    },
    "exponents": {
        "q": (1.5, float),
        "alpha": (2.0, float),
        "relaxed": (False, _bool),
    },
    "constants": {
        "c": ("fit", _fit_or_float),
    },
    "randomization": {
        "dist": ("bernoulli", _enum(_DISTS)),
        "cells": ([4, 8, 16], _int_list),
        "eps_ratio": (0.5, float),
        "band_min": (2.0, float),
        "band_max": (6.0, float),
        "support": (2.0, float),
    },
    "ray": {
        "display": ("7.1a", _enum(_DISPLAYS)),
        "t_min": (10.0, float),
        "t_max": (1000.0, float),
        "points": (12, int),
        "pole_index": (1, int),
        "delta_min": (1e-3, float),
        "delta_max": (1e-1, float),
        "use_dual_pair": (True, _bool),
    },
    "plot": {
        "width": (640, int),
        "height": (480, int),
        "xmin": (None, _opt_float),
        "xmax": (None, _opt_float),
        "ymin": (None, _opt_float),
        "ymax": (None, _opt_float),
    },
    "tolerances": {
        "drift": (0.2, float),
        "boundary": (0.0, float),
        "slack": (0.05, float),
    },
}


@dataclass
class ExperimentConfig:
    """Validated configuration: one attribute dict per schema section."""

    experiment: dict
    model: dict
    potential: dict
    exponents: dict
    constants: dict
    randomization: dict
    ray: dict
    plot: dict
    tolerances: dict

    @classmethod
    def defaults(cls) -> "ExperimentConfig":
        return cls(**{
            section: {key: default for key, (default, _) in keys.items()}
            for section, keys in SCHEMA.items()
        })

    def sections(self):
        for name in SCHEMA:
            yield name, getattr(self, name)


def parse_text(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigError with line numbers on violations."""
    cfg = ExperimentConfig.defaults()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        _, conv = SCHEMA[section][key]
        try:
            getattr(cfg, section)[key] = conv(value.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {section}.{key}: {exc}") from exc
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment["seed"] < 0:
        raise ConfigError("experiment.seed must be nonnegative")
    if cfg.experiment["threads"] < 1:
        raise ConfigError("experiment.threads must be >= 1")
    if not cfg.model["size"]:
        raise ConfigError("model.size must list at least one size")
    if cfg.potential["samples"] < 1:
        raise ConfigError("potential.samples must be >= 1")
    if not (cfg.ray["t_min"] > 0 and cfg.ray["t_max"] > cfg.ray["t_min"]):
        raise ConfigError("ray.t_min/t_max must satisfy 0 < t_min < t_max")
    if cfg.ray["points"] < 3:
        raise ConfigError("ray.points must be >= 3")
    c = cfg.constants["c"]
    if c != "fit" and (not isinstance(c, float) or c < 0 or not math.isfinite(c)):
        raise ConfigError("constants.c must be 'fit' or a nonnegative number")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
