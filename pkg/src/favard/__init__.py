"""Numerical lab for Favard lengths of Cantor-type iterates."""
from __future__ import annotations

__version__ = "0.1.0"

from .buffon import (
    FavardResult,
    MedianResult,
    MonteCarloResult,
    NeedleLine,
    buffon_estimate,
    favard,
    median_support,
    needle_hit,
    sector_integral,
)
from .energy import EnergyResult, ball_average, riesz_energy
from .errors import (
    BudgetExceeded,
    DegeneratePair,
    EmptySector,
    FavardError,
    InsufficientData,
    NonConvergenceWarning,
    WrongModel,
)
from .geometry import Interval, QuadratureSpec, StepFunction, build_step, integrate_theta, step_moment, union_length
from .models import (
    FOUR_CORNER,
    SIERPINSKI,
    DiscreteMeasure,
    ModelId,
    ModelKind,
    SquareAddress,
    difference_classes,
    enumerate_squares,
    enumerate_triangles,
    natural_measure_atoms,
    random_model,
)
from .pairs import (
    axis_coordinates,
    classify_pair,
    count_buckets,
    crucial_observation_check,
    four_adic_distance,
    pair_overlap,
    total_overlap,
)
from .projection import Direction, profile, project_cell, second_moment_theta, support_length
from .report import fit_constants

__all__ = [
    "__version__",
    "FavardResult",
    "MedianResult",
    "MonteCarloResult",
    "NeedleLine",
    "buffon_estimate",
    "favard",
    "median_support",
    "needle_hit",
    "sector_integral",
    "EnergyResult",
    "ball_average",
    "riesz_energy",
    "BudgetExceeded",
    "DegeneratePair",
    "EmptySector",
    "FavardError",
    "InsufficientData",
    "NonConvergenceWarning",
    "WrongModel",
    "Interval",
    "QuadratureSpec",
    "StepFunction",
    "build_step",
    "integrate_theta",
    "step_moment",
    "union_length",
    "FOUR_CORNER",
    "SIERPINSKI",
    "DiscreteMeasure",
    "ModelId",
    "ModelKind",
    "SquareAddress",
    "difference_classes",
    "enumerate_squares",
    "enumerate_triangles",
    "natural_measure_atoms",
    "random_model",
    "axis_coordinates",
    "classify_pair",
    "count_buckets",
    "crucial_observation_check",
    "four_adic_distance",
    "pair_overlap",
    "total_overlap",
    "Direction",
    "profile",
    "project_cell",
    "second_moment_theta",
    "support_length",
    "fit_constants",
]
