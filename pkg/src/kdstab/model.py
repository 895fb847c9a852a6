"""Equation parameters and small-amplitude periodic traveling waves.

The one-dimensional wave ``u(x, t) = w(k(x - c t))`` of the KD system solves

    -c w - k^2 w'' + (phi^2/2) w^3 - 3 rho w^2 = 0,     w 2*pi-periodic,

with the integration constants fixed at zero.  Near ``c = k^2`` a branch of
even solutions bifurcates from ``w = 0``; :func:`expansion_coefficients`
gives its third-order expansion in the amplitude ``a`` and
:func:`refine_newton` solves the Galerkin truncation of the profile equation
to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, SingularJacobianError, ValidationError
from .fourier import FourierSeries

DEFAULT_N = 32
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
AMPLITUDE_GUARD = 0.2


@dataclass(frozen=True)
class ModelParams:
    """Nonlinearity coefficients ``rho`` (quadratic) and ``phi`` (cubic)."""

    rho: float
    phi: float

    def __post_init__(self):
        for name in ("rho", "phi"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))

    @property
    def is_kp2(self) -> bool:
        return self.phi == 0.0

    @property
    def is_mkp2(self) -> bool:
        return self.rho == 0.0


@dataclass(frozen=True)
class WaveParams:
    """Wavenumber ``k`` and amplitude ``a``.

    ``b1`` and ``b2`` (the mean transverse velocity and the integration
    constant of the profile equation) exist only for notational completeness;
    every operation in this package requires both to vanish.
    """

    k: float
    a: float
    b1: float = 0.0
    b2: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValidationError(f"wavenumber k must be positive and finite, got {self.k!r}")
        if not math.isfinite(self.a):
            raise ValidationError(f"amplitude a must be finite, got {self.a!r}")
        if self.b1 != 0 or self.b2 != 0:
            raise ValidationError("only the b1 = b2 = 0 wave family is supported")
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "a", float(self.a))


@dataclass(frozen=True)
class WaveExpansion:
    """Coefficients of ``w = a cos z + a^2 (A0 + A2 cos 2z) + a^3 A3 cos 3z``
    and ``c = c0 + a^2 c2``."""

    A0: float
    A2: float
    A3: float
    c2: float
    c0: float


@dataclass(frozen=True)
class RefinedWave:
    w: FourierSeries
    c: float
    residual_norm: float
    newton_iters: int


@dataclass(frozen=True)
class WaveReport:
    """A profile with its speed and residual, as emitted by the ``wave`` command."""

    mp: ModelParams
    wp: WaveParams
    method: str
    w: FourierSeries
    c: float
    residual_norm: float
    newton_iters: int = 0

    def to_json(self) -> dict:
        return {
            "rho": self.mp.rho, "phi": self.mp.phi, "k": self.wp.k, "a": self.wp.a,
            "method": self.method, "c": self.c, "residual_norm": self.residual_norm,
            "newton_iters": self.newton_iters, "coefficients": self.w.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> WaveReport:
        return cls(ModelParams(data["rho"], data["phi"]), WaveParams(data["k"], data["a"]),
                   data["method"], FourierSeries.from_json(data["coefficients"]),
                   float(data["c"]), float(data["residual_norm"]), int(data["newton_iters"]))


def expansion_coefficients(mp: ModelParams, wp: WaveParams) -> WaveExpansion:
    k, rho, phi = wp.k, mp.rho, mp.phi
    return WaveExpansion(
        A0=-3 * rho / (2 * k**2),
        A2=rho / (2 * k**2),
        A3=-phi**2 / (64 * k**2) + 3 * rho**2 / (16 * k**4),
        c2=3 * phi**2 / 8 + 15 * rho**2 / (2 * k**2),
        c0=k**2,
    )


def wave_profile(exp: WaveExpansion, wp: WaveParams, N: int = 3) -> FourierSeries:
    """Fourier series of the third-order expansion, modes ``-N..N``."""
    if N < 3:
        raise ValidationError(f"wave profile needs N >= 3, got {N}")
    a = wp.a
    amps = [a**2 * exp.A0, a, a**2 * exp.A2, a**3 * exp.A3]
    return FourierSeries.from_cosines(amps, N)


def wave_speed(exp: WaveExpansion, wp: WaveParams) -> float:
    return exp.c0 + wp.a**2 * exp.c2


def _profile_operator(w: FourierSeries, c: float, mp: ModelParams, k: float) -> FourierSeries:
    """Left-hand side of the profile equation, all product modes kept."""
    w2 = w * w
    w3 = w2 * w
    n = w.modes
    linear = FourierSeries((-c + k**2 * n**2) * w.coeffs)
    return linear + w3.scaled(mp.phi**2 / 2) + w2.scaled(-3 * mp.rho)


def residual_norm(w: FourierSeries, c: float, mp: ModelParams, wp: WaveParams) -> float:
    """L^2(T) norm of ``-c w - k^2 w'' + (phi^2/2) w^3 - 3 rho w^2``.

    Products are formed by exact convolution, so the residual carries modes
    up to ``3N`` and is free of aliasing.
    """
    return _profile_operator(w, c, mp, wp.k).l2_norm()


def _galerkin(cos_w: np.ndarray, c: float, mp: ModelParams, k: float):
    """Galerkin residual and Jacobian in the cosine subspace.

    ``cos_w`` holds the coefficients ``w_hat[0..N]`` of an even real profile
    (``w_hat[-m] = w_hat[m]``).  Returns the residual coefficients for modes
    ``0..N`` and the Jacobian with respect to ``(w_hat[0..N], c)``.
    """
    N = cos_w.size - 1
    full = np.concatenate([cos_w[:0:-1], cos_w])
    w = FourierSeries(full)
    F = _profile_operator(w, c, mp, k).resized(N).coeffs.real[N:]

    # multiplication by g = (3 phi^2/2) w^2 - 6 rho w, truncated to -N..N
    g = ((w * w).scaled(1.5 * mp.phi**2) + w.scaled(-6 * mp.rho)).resized(2 * N).coeffs.real
    m = np.arange(N + 1)
    j = np.arange(N + 1)
    diff = m[:, None] - j[None, :]
    summ = m[:, None] + j[None, :]
    T = g[diff + 2 * N] + np.where(j[None, :] > 0, g[summ + 2 * N], 0.0)
    J = T + np.diag(-c + k**2 * m**2.0)
    dc = -cos_w
    return F, np.column_stack([J, dc])


def refine_newton(
    mp: ModelParams,
    wp: WaveParams,
    N: int = DEFAULT_N,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    amplitude_guard: float = AMPLITUDE_GUARD,
) -> RefinedWave:
    """Solve the truncated profile equation by Newton's method.

    The unknowns are the cosine coefficients of ``w`` and the speed ``c``.
    Working in the cosine subspace fixes the translation phase, and the first
    cosine amplitude is pinned to ``a``.  The third-order expansion seeds the
    iteration.

    Raises
    ------
    NonConvergenceError
        If the Galerkin residual is still above ``tol`` after ``max_iter`` steps.
    SingularJacobianError
        If a Newton system cannot be solved reliably.
    """
    if N < 8:
        raise ValidationError(f"Newton refinement needs N >= 8, got {N}")
    if abs(wp.a) > amplitude_guard:
        raise ValidationError(
            f"|a| = {abs(wp.a)} exceeds the small-amplitude guard {amplitude_guard}"
        )
    k = wp.k
    if wp.a == 0:
        return RefinedWave(FourierSeries.zeros(N), k**2, 0.0, 0)

    exp = expansion_coefficients(mp, wp)
    cos_w = wave_profile(exp, wp, N).coeffs.real[N:].copy()
    c = wave_speed(exp, wp)
    free = np.r_[0, np.arange(2, N + 2)]  # every unknown except w_hat[1]

    for it in range(max_iter + 1):
        F, J = _galerkin(cos_w, c, mp, k)
        # cosine equation m carries weight 2 in the L^2 norm (modes +-m)
        gnorm = math.sqrt(F[0] ** 2 + 2 * np.sum(F[1:] ** 2))
        if gnorm <= tol:
            w = FourierSeries(np.concatenate([cos_w[:0:-1], cos_w]))
            return RefinedWave(w, float(c), residual_norm(w, c, mp, wp), it)
        if it == max_iter:
            break
        A = J[:, free]
        if not np.all(np.isfinite(A)) or np.linalg.cond(A) > 1e14:
            raise SingularJacobianError(f"Newton Jacobian singular at iteration {it}")
        try:
            step = np.linalg.solve(A, -F)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(str(exc)) from exc
        cos_w[0] += step[0]
        cos_w[2:] += step[1:-1]
        c += step[-1]

    raise NonConvergenceError(
        f"Newton did not reach tol={tol:g} in {max_iter} iterations (residual {gnorm:.3e})"
    )


def wave_report(mp: ModelParams, wp: WaveParams, refine: bool = False,
                N: int = DEFAULT_N) -> WaveReport:
    """Expansion wave (``refine=False``) or Newton-refined wave on modes ``-N..N``."""
    if refine:
        rw = refine_newton(mp, wp, N)
        return WaveReport(mp, wp, "newton", rw.w, rw.c, rw.residual_norm, rw.newton_iters)
    exp = expansion_coefficients(mp, wp)
    w, c = wave_profile(exp, wp), wave_speed(exp, wp)
    return WaveReport(mp, wp, "expansion", w, c, residual_norm(w, c, mp, wp))
