"""OTFS waveform radar sensing: modulation, echo pre-processing, off-grid
range/velocity estimation, SINR analysis, and experiment drivers."""

from .analysis import PowerBudget, b_of_eps, crlb_velocity, opt_Mbar, power_budget, sinr_curve
from .channel import Target, apply_channel, draw_targets, to_range, to_velocity
from .config import ConfigError, ExperimentSpec, SystemConfig, TargetSpec, load_config
from .estimator import Estimate, estimate_targets, rd_map
from .frame import add_cp, draw_symbols, heisenberg, isfft, modulate, sfft
from .mlbench import MlSearchConfig, ml_metric, ml_velocity_search
from .preproc import PreprocOutput, add_vcp, choose_k, preprocess, remove_symbols

__all__ = [
    "ConfigError",
    "Estimate",
    "ExperimentSpec",
    "MlSearchConfig",
    "PowerBudget",
    "PreprocOutput",
    "SystemConfig",
    "Target",
    "TargetSpec",
    "add_cp",
    "add_vcp",
    "apply_channel",
    "b_of_eps",
    "choose_k",
    "crlb_velocity",
    "draw_symbols",
    "draw_targets",
    "estimate_targets",
    "heisenberg",
    "isfft",
    "load_config",
    "ml_metric",
    "ml_velocity_search",
    "modulate",
    "opt_Mbar",
    "power_budget",
    "preprocess",
    "rd_map",
    "remove_symbols",
    "sfft",
    "sinr_curve",
    "to_range",
    "to_velocity",
]

__version__ = "0.1.0"
