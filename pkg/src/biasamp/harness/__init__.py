"""Experiment harness: dataset/model IO, splitting, configs, CLI."""

from .config import ConfigError, config_hash, parse_config_text, read_config
from .experiments import (
    EXPERIMENT_KINDS,
    ExperimentConfig,
    ExperimentError,
    ResultsRow,
    build_experiment_config,
    run_experiment,
    run_export,
)
from .io import (
    DataFormatError,
    load_csv,
    load_model,
    load_slice,
    read_results_csv,
    save_model,
    write_results_csv,
)
from .split import standardize_pair, stratified_split

__all__ = [
    "ConfigError",
    "config_hash",
    "parse_config_text",
    "read_config",
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "ExperimentError",
    "ResultsRow",
    "build_experiment_config",
    "run_experiment",
    "run_export",
    "DataFormatError",
    "load_csv",
    "load_model",
    "load_slice",
    "read_results_csv",
    "save_model",
    "write_results_csv",
    "standardize_pair",
    "stratified_split",
]
