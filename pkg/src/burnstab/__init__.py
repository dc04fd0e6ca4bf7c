"""Equilibrium, stability, feedback and simulation tools for a three-variable
bushfire / prescribed-burning model."""

__version__ = "0.1.0"

from .model import Equilibrium, FeasibilityReport, Params, State, equilibrium, feasibility, vector_field
from .stability import Regime, StabilityVerdict, characteristic, classify, critical_theta, jacobian

__all__ = [
    "Equilibrium",
    "FeasibilityReport",
    "Params",
    "Regime",
    "StabilityVerdict",
    "State",
    "characteristic",
    "classify",
    "critical_theta",
    "equilibrium",
    "feasibility",
    "jacobian",
    "vector_field",
]
