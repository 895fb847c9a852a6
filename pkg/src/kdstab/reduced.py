"""Leading-order perturbation predictions for small-amplitude waves.

Two regimes are covered:

* long transverse waves (``|gamma|`` small, periodic perturbations), where the
  double eigenvalue at the origin splits according to a 2x2 reduced matrix
  and the sign of the discriminant ``Lambda`` decides stability;
* finite transverse wavelengths, where eigenvalues can leave the imaginary
  axis only at collisions; for separation 2 the reduced discriminant is
  explicit, for larger separations only its two leading terms are known.

Remainder terms are not modelled.  Near the edge of the modulational band
the prediction is reported as indeterminate instead of being forced.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .flatspec import PerturbationParams
from .model import ModelParams, WaveParams, expansion_coefficients

BAND_MARGIN = 0.1


class Verdict(str, enum.Enum):
    MODULATIONALLY_UNSTABLE = "ModulationallyUnstable"
    HIGH_FREQUENCY_STABLE = "HighFrequencyStable"
    INDETERMINATE = "Indeterminate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ModulationalPrediction:
    """Leading-order modulational data at one ``(a, gamma)``.

    ``k_threshold`` is ``math.inf`` when ``phi = 0`` (no band for any ``k``).
    """

    Lambda: float
    mu_plus: complex
    gamma_max: float
    k_threshold: float
    unstable: bool


@dataclass(frozen=True)
class HighFreqVerdict:
    delta: int
    n: int
    tau: float
    epsilon: float
    discriminant: float
    stable: bool
    boundary: bool = False


def _band_coefficient(mp: ModelParams, k: float) -> float:
    return mp.phi**2 / 4 - mp.rho**2 / k**2


def k_threshold(mp: ModelParams) -> float:
    """Smallest wavenumber with a modulational band, ``2 |rho / phi|``."""
    if mp.phi == 0:
        return math.inf
    return 2 * abs(mp.rho / mp.phi)


def gamma_max(mp: ModelParams, wp: WaveParams) -> float:
    return wp.k * abs(wp.a) * math.sqrt(abs(_band_coefficient(mp, wp.k)))


def band_exists(mp: ModelParams, wp: WaveParams) -> bool:
    return mp.phi != 0 and wp.k > k_threshold(mp) and wp.a != 0


def modulational_matrix(mp: ModelParams, wp: WaveParams, gamma: float) -> np.ndarray:
    """Action of the linearization on the two-dimensional eigenspace near the origin."""
    k, a = wp.k, wp.a
    g2 = 3 * gamma**2 / k
    return np.array(
        [[0.0, -g2 + 3 * a**2 * k * _band_coefficient(mp, k)],
         [g2, 0.0]],
        dtype=complex,
    )


def discriminant(mp: ModelParams, wp: WaveParams, gamma: float) -> float:
    return -gamma**2 + wp.a**2 * wp.k**2 * _band_coefficient(mp, wp.k)


def modulational_prediction(mp: ModelParams, wp: WaveParams, gamma: float) -> ModulationalPrediction:
    """Discriminant, bifurcating eigenvalue and band data.

    ``mu_plus = (3|gamma|/k) sqrt(Lambda)`` is real (a growth rate) for
    ``Lambda >= 0`` and purely imaginary otherwise.  ``unstable`` also requires
    ``gamma != 0``: at ``gamma = 0`` both eigenvalues sit at the origin.
    """
    lam = discriminant(mp, wp, gamma)
    mu = 3 * abs(gamma) / wp.k * cmath.sqrt(lam)
    if lam >= 0:
        mu = complex(mu.real, 0.0)
    return ModulationalPrediction(
        Lambda=lam,
        mu_plus=mu,
        gamma_max=gamma_max(mp, wp),
        k_threshold=k_threshold(mp),
        unstable=bool(lam > 0 and gamma != 0),
    )


def delta2_discriminant(
    mp: ModelParams,
    wp: WaveParams,
    n: int,
    tau: float,
    epsilon: float,
    gamma_c: float,
) -> HighFreqVerdict:
    """Reduced discriminant at a collision of modes ``n`` and ``n + 2``.

    ``epsilon = gamma^2 - gamma_c^2`` is the detuning.  Positive discriminant
    means the two eigenvalues split along the imaginary axis.  A zero value
    (``a = epsilon = 0``) is the unperturbed double eigenvalue and is reported
    as stable with ``boundary=True``.
    """
    x, y = n + tau, n + 2 + tau
    if x * y >= 0:
        raise ValidationError(
            f"modes ({n}, {n + 2}) at tau={tau} are not in the collision regime"
        )
    k, a, rho, phi = wp.k, wp.a, mp.rho, mp.phi
    A2 = expansion_coefficients(mp, wp).A2
    a4 = a**4
    disc = (
        36 * epsilon**2 / (k**2 * x**2 * y**2)
        - 36 * gamma_c**2 * phi**2 * a4 * A2**2 / (x * y)
        + 9 * a4 * k**2 * (x + 1) ** 2 * (rho**4 / k**4 + phi**4 / 16)
        + 9 * a4 * rho**2 * phi**2 / (2 * k**2) * (1 - x * y)
    )
    return HighFreqVerdict(
        delta=2, n=n, tau=tau, epsilon=epsilon, discriminant=disc,
        stable=disc >= 0, boundary=disc == 0,
    )


def highfreq_delta_ge3_structure(
    k: float, n: int, delta: int, tau: float, epsilon: float, beta2: float, a: float
) -> float:
    """Two leading terms of the reduced discriminant for separation ``delta >= 3``.

    ``beta2`` is the (uncomputed) coefficient of the ``a^2`` speed-like
    correction; the sum is non-negative whatever its value.
    """
    if delta < 3:
        raise ValidationError(f"delta must be >= 3, got {delta}")
    x, y = n + tau, n + delta + tau
    return 9 * delta**2 * epsilon**2 / (k**2 * x**2 * y**2) + delta**2 * beta2**2 * a**4


def classify_analytic(
    mp: ModelParams,
    wp: WaveParams,
    pp: PerturbationParams,
    margin: float = BAND_MARGIN,
) -> Verdict:
    """Stability predicted by the leading-order theory.

    Periodic perturbations inside the modulational band (shrunk by
    ``margin * gamma_max``) are unstable; within ``margin * gamma_max`` of the
    band edge the remainder terms dominate and the result is indeterminate.
    Everything else is stable: away from the origin, eigenvalues can only
    leave the imaginary axis at collisions, and every collision discriminant
    is positive.  ``gamma = 0`` (no transverse dependence) is indeterminate
    for ``a != 0``.
    """
    if wp.a == 0:
        return Verdict.HIGH_FREQUENCY_STABLE
    g = abs(pp.gamma)
    if g == 0:
        return Verdict.INDETERMINATE
    if pp.periodic and band_exists(mp, wp):
        gm = gamma_max(mp, wp)
        if g < (1 - margin) * gm:
            return Verdict.MODULATIONALLY_UNSTABLE
        if g <= (1 + margin) * gm:
            return Verdict.INDETERMINATE
    return Verdict.HIGH_FREQUENCY_STABLE
