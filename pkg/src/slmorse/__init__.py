"""Morse indices of Sturm–Liouville operators on the line from conjugate points.

The index of ``L w = -(P w' + Q w)' + Q^T w' + R w`` is obtained by counting
intersections of the unstable Lagrangian bundle with the Dirichlet plane, and
is cross-checked against a finite-element eigenvalue count.
"""
from .errors import SLMorseError
from .flows import FramePath, PropagationConfig, propagate_frame, stable_path, unstable_path
from .indices import (
    discrete_spectral_flow,
    hormander_index,
    maslov_index,
    pair_quadratic_form,
    triple_index,
)
from .morse import CrossingRecord, MorseResult, detect_conjugate_points, morse_index
from .oracle import DiscretizationConfig, negative_count, rough_spectrum
from .sturm import SturmLiouvilleProblem, load_problem, problem_from_dict, validate
from .symplectic import InertiaTriple, LagrangianFrame, QuadraticForm, frame_from_columns, inertia
from .waves import ReactionSystem, WaveProfile, instability_verdict, solve_front

__version__ = "0.1.0"

__all__ = [
    "SLMorseError",
    "FramePath",
    "PropagationConfig",
    "propagate_frame",
    "stable_path",
    "unstable_path",
    "discrete_spectral_flow",
    "hormander_index",
    "maslov_index",
    "pair_quadratic_form",
    "triple_index",
    "CrossingRecord",
    "MorseResult",
    "detect_conjugate_points",
    "morse_index",
    "DiscretizationConfig",
    "negative_count",
    "rough_spectrum",
    "SturmLiouvilleProblem",
    "load_problem",
    "problem_from_dict",
    "validate",
    "InertiaTriple",
    "LagrangianFrame",
    "QuadraticForm",
    "frame_from_columns",
    "inertia",
    "ReactionSystem",
    "WaveProfile",
    "instability_verdict",
    "solve_front",
    "__version__",
]
