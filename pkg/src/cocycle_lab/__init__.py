"""Matrix cocycles over mixing subshifts of finite type.

Periodic data, quasiconformal distortion, closing and shadowing bounds,
epsilon-nets for the value set, and invariant norm families.
"""

from ._kernels import BACKEND
from .analysis import (Budget, EpsilonNet, PeriodicData, Verdict, VerdictReport,
                       build_epsilon_net, collect_periodic_data, shadowing_distortion_check,
                       shadowing_norm_check, verdict)
from .cocycle import (BunchingCertificate, Generator, NotCertified, certify_fiber_bunching,
                      closeness_constants, evaluate, growth_exponent_check,
                      quasiconformal_distortion, stable_closeness_defect)
from .invariant import (NormFamily, build_family, holder_profile, invariant_norm,
                        isometry_defect, partial_norm)
from .linops import OperatorValue, gl_distance, quasiconformal
from .normspace import Interval, NormRep, norm_distance, norm_distance_prime, pullback
from .sft import (Point, ShiftMetric, TransitionMatrix, bracket, close_orbit, distance,
                  periodic_points, shift)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Budget", "BunchingCertificate", "EpsilonNet", "Generator", "Interval",
    "NormFamily", "NormRep", "NotCertified", "OperatorValue", "PeriodicData", "Point",
    "ShiftMetric", "TransitionMatrix", "Verdict", "VerdictReport", "bracket",
    "build_epsilon_net", "build_family", "certify_fiber_bunching", "close_orbit",
    "closeness_constants", "collect_periodic_data", "distance", "evaluate", "gl_distance",
    "growth_exponent_check", "holder_profile", "invariant_norm", "isometry_defect",
    "norm_distance", "norm_distance_prime", "partial_norm", "periodic_points", "pullback",
    "quasiconformal", "quasiconformal_distortion", "shadowing_distortion_check",
    "shadowing_norm_check", "shift", "stable_closeness_defect", "verdict",
]
