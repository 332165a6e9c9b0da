"""Coalescing Polya walks, their dual web and the Yule web."""

from ._backend import BACKEND
from .coalescence import (ComponentCount, MeetingOutcome, count_components, meeting_time,
                          regional_components)
from .determinant import (DensityQuery, expected_components_exact, integrate_ordered_simplex,
                          joint_density, km_finite_time_prob, pair_never_meet_prob)
from .dist import BetaParams, beta_binomial_pmf, beta_cdf, beta_pdf, psi
from .web import (Arrow, ArrowField, DualPoint, LatticePoint, arrow_at, dual_walk, precedes,
                  walk)
from .yule import yule_joint_density, yule_meeting, yule_walk

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Arrow", "ArrowField", "BetaParams", "ComponentCount", "DensityQuery",
    "DualPoint", "LatticePoint", "MeetingOutcome", "arrow_at", "beta_binomial_pmf", "beta_cdf",
    "beta_pdf", "count_components", "dual_walk", "expected_components_exact",
    "integrate_ordered_simplex", "joint_density", "km_finite_time_prob", "meeting_time",
    "pair_never_meet_prob", "precedes", "psi", "regional_components", "walk",
    "yule_joint_density", "yule_meeting", "yule_walk",
]
