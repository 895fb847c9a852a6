"""Transverse spectral stability of small periodic waves of the Konopelchenko-Dubrovsky equation."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    EigensolverFailure,
    KDStabError,
    NoBracketError,
    NonConvergenceError,
    NumericalError,
    SingularInverseModeError,
    SingularJacobianError,
    TruncationTooSmallError,
    ValidationError,
)
from .flatspec import Collision, PerturbationParams, enumerate_collisions  # noqa: E402
from .fourier import FourierSeries  # noqa: E402
from .hill import SpectrumResult, adaptive_spectrum, compute_spectrum, max_growth  # noqa: E402
from .model import (  # noqa: E402
    ModelParams,
    WaveParams,
    expansion_coefficients,
    refine_newton,
    residual_norm,
    wave_profile,
    wave_speed,
)
from .reduced import Verdict, classify_analytic, modulational_prediction  # noqa: E402
from .sweep import (  # noqa: E402
    SweepConfig,
    classify_point,
    collision_audit,
    find_band_edge,
    grid_sweep,
)

__all__ = [
    "Collision", "EigensolverFailure", "FourierSeries", "KDStabError", "ModelParams",
    "NoBracketError", "NonConvergenceError", "NumericalError", "PerturbationParams",
    "SingularInverseModeError", "SingularJacobianError", "SpectrumResult", "SweepConfig",
    "TruncationTooSmallError", "ValidationError", "Verdict", "WaveParams",
    "adaptive_spectrum", "classify_analytic", "classify_point", "collision_audit",
    "compute_spectrum", "enumerate_collisions", "expansion_coefficients", "find_band_edge",
    "grid_sweep", "max_growth", "modulational_prediction", "refine_newton", "residual_norm",
    "wave_profile", "wave_speed",
]
