"""Radial self-similar solutions of beta(w)_t = Laplacian(w) with beta(r) = 2r - r^+."""

from .exponents import ExponentRecord, ExponentTable, eigen_profile, exponent_table, solve_alpha
from .profile_ode import Branch, ProblemParams, SelfSimilarProfile, Sign, integrate_profile
from .shooting import Side, inverse_zero_map, shoot_infinity, shoot_origin, zero_map

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "ExponentRecord",
    "ExponentTable",
    "ProblemParams",
    "SelfSimilarProfile",
    "Side",
    "Sign",
    "eigen_profile",
    "exponent_table",
    "integrate_profile",
    "inverse_zero_map",
    "shoot_infinity",
    "shoot_origin",
    "solve_alpha",
    "zero_map",
]
