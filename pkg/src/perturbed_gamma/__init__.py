"""Moment-based inference for a gamma degradation process perturbed by Brownian noise.

The observed level is ``D(t) = Y(t) + tau * B(t)`` with ``Y`` a gamma process of
shape rate ``alpha`` and scale rate ``xi`` and ``B`` a standard Brownian motion.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .asymptotics import AsymptoticCov, DesignConstants, design_constants, parameter_cov
from .design import case_family, design_diagnostics, grid_family
from .estimate import EstimateResult, EstimateStatus, ValidityRule, empirical_moments, estimate_params
from .inference import IntervalEstimate, TestResult, ci_ratio, confidence_intervals, test_tau2_zero
from .model import (
    GridError,
    IncrementPanel,
    ModelError,
    ModelParams,
    MomentVector,
    NonInvertibleError,
    ObservationGrid,
    forward_moments,
    invert_moments,
)
from .montecarlo import ExperimentConfig, run_coverage, run_experiment
from .panel_io import PanelFormatError, parse_panel_csv, write_panel_csv
from .simulate import SeedSpec, simulate_panel

__all__ = [
    "AsymptoticCov", "DesignConstants", "design_constants", "parameter_cov",
    "case_family", "design_diagnostics", "grid_family",
    "EstimateResult", "EstimateStatus", "ValidityRule", "empirical_moments", "estimate_params",
    "IntervalEstimate", "TestResult", "ci_ratio", "confidence_intervals", "test_tau2_zero",
    "GridError", "IncrementPanel", "ModelError", "ModelParams", "MomentVector",
    "NonInvertibleError", "ObservationGrid", "forward_moments", "invert_moments",
    "ExperimentConfig", "run_coverage", "run_experiment",
    "PanelFormatError", "parse_panel_csv", "write_panel_csv",
    "SeedSpec", "simulate_panel",
]
