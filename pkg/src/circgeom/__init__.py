"""Incidence geometry of generalized circles: tangency counting, surface
arrangements with random-sampling cuttings, and circular maximal-function
experiments."""

from .config import STAGE, Stage, load_frozen_constants
from .geometry import (
    Circle,
    CurveSample,
    DefiningFunction,
    EUCLIDEAN,
    Window,
    cinematic_check,
    delta,
    eval_phi,
    grad_y,
    make_perturbed,
    metric_d,
)

__all__ = [
    "STAGE",
    "Stage",
    "load_frozen_constants",
    "Circle",
    "CurveSample",
    "DefiningFunction",
    "EUCLIDEAN",
    "Window",
    "cinematic_check",
    "delta",
    "eval_phi",
    "grad_y",
    "make_perturbed",
    "metric_d",
]
