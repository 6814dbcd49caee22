"""Configuration-driven experiment harness: runner, plots, manifests, CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_text
from .experiments import BOUNDS_HEADER, convergence_study, run
from .manifest import read_manifest, write_manifest

__all__ = [
    "BOUNDS_HEADER",
    "ConfigError",
    "ExperimentConfig",
    "convergence_study",
    "load_config",
    "parse_text",
    "read_manifest",
    "run",
    "write_manifest",
]
