"""Experiment layer: YAML configs, named presets, replication and output files."""

from .config import dump_config, load_config, parse_config
from .presets import PRESET_NAMES, ExperimentPreset, get_preset
from .runner import emit_plot_data, run_config, run_experiment

__all__ = [
    "PRESET_NAMES",
    "ExperimentPreset",
    "dump_config",
    "emit_plot_data",
    "get_preset",
    "load_config",
    "parse_config",
    "run_config",
    "run_experiment",
]
