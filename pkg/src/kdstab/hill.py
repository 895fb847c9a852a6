"""Floquet-Fourier-Hill discretization of the transverse spectral problem.

For a wave profile ``w`` with speed ``c`` the Bloch operator is

    H = k c D + k^3 D^3 + 6 k rho D(w .) - (3/2) phi^2 k D(w^2 .)
        - (3 gamma^2 / k + 3 i phi gamma w_z) D^{-1},       D = d/dz + i tau,

acting on ``exp(i (n + tau) z)``.  Multiplication is applied before the
derivative in the ``D(w .)`` terms and after the inverse derivative in the
last term.  For ``tau = 0`` the mean mode is removed (``D`` is invertible
only on mean-zero functions).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import EigensolverFailure, SingularInverseModeError, TruncationTooSmallError
from .flatspec import DELTA_FLOOR, PerturbationParams
from .fourier import FourierSeries
from .model import (
    DEFAULT_N,
    ModelParams,
    WaveParams,
    expansion_coefficients,
    refine_newton,
    wave_profile,
    wave_speed,
)

N_MAX = 256
NOISE_ABS = 1e-10
NOISE_FACTOR = 10.0
CONV_ABS_TOL = 1e-9
CONV_REL_TOL = 1e-7
TRACKED = 10


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    modes: np.ndarray
    tau: float
    excluded_zero_mode: bool


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    N: int
    max_real_part: float
    symmetry_defect: float
    converged: bool = True
    params: dict = field(default_factory=dict)

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0

    @property
    def noise_floor(self) -> float:
        return noise_floor(self.symmetry_defect)

    @property
    def unstable(self) -> bool:
        return self.max_real_part > self.noise_floor

    def to_json(self) -> dict:
        return {
            "params": dict(self.params),
            "N": self.N,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "max_real_part": self.max_real_part,
            "symmetry_defect": self.symmetry_defect,
            "converged": self.converged,
        }

    @classmethod
    def from_json(cls, data: dict) -> SpectrumResult:
        ev = np.array([complex(re, im) for re, im in data["eigenvalues"]])
        return cls(ev, int(data["N"]), float(data["max_real_part"]),
                   float(data["symmetry_defect"]), bool(data["converged"]),
                   dict(data.get("params", {})))


def noise_floor(symmetry_defect: float) -> float:
    """Threshold on the largest real part below which a spectrum counts as neutral."""
    return NOISE_FACTOR * symmetry_defect + NOISE_ABS


def _toeplitz(series: FourierSeries, modes: np.ndarray) -> np.ndarray:
    """``T[i, j] = fhat[modes[i] - modes[j]]`` (zero outside the stored range)."""
    diff = modes[:, None] - modes[None, :]
    out = np.zeros(diff.shape, dtype=complex)
    inside = np.abs(diff) <= series.N
    out[inside] = series.coeffs[diff[inside] + series.N]
    return out


def assemble(
    w: FourierSeries,
    c: float,
    mp: ModelParams,
    wp: WaveParams,
    pp: PerturbationParams,
    N: int = DEFAULT_N,
) -> OperatorMatrix:
    """Truncated matrix of the Bloch operator on modes ``-N..N``.

    Raises
    ------
    TruncationTooSmallError
        If ``N < 2 * (highest populated mode of w) + 2``.
    SingularInverseModeError
        If some retained ``|n + tau|`` is below the inverse-derivative floor.
    """
    if N < min_truncation(w):
        raise TruncationTooSmallError(
            f"N={N} too small for a profile with modes up to {w.highest_mode()}"
        )
    k, rho, phi = wp.k, mp.rho, mp.phi
    gamma, tau = pp.gamma, pp.tau

    modes = np.arange(-N, N + 1)
    if pp.periodic:
        modes = modes[modes != 0]
    kappa = modes + tau
    if np.min(np.abs(kappa)) < DELTA_FLOOR:
        raise SingularInverseModeError(f"tau={tau} puts a mode within {DELTA_FLOOR:g} of zero")

    w2 = w * w
    wz = w.derivative()

    diag = 1j * k * c * kappa - 1j * k**3 * kappa**3 + 3j * gamma**2 / (k * kappa)
    M = np.diag(diag).astype(complex)
    if rho != 0 or phi != 0:
        mult = 6 * k * rho * _toeplitz(w, modes) - 1.5 * phi**2 * k * _toeplitz(w2, modes)
        M += (1j * kappa)[:, None] * mult
    if phi != 0 and gamma != 0:
        M += (-3j * phi * gamma) * _toeplitz(wz, modes) / (1j * kappa)[None, :]
    return OperatorMatrix(M, modes, tau, bool(pp.periodic))


def symmetry_defect(eigenvalues: np.ndarray) -> float:
    """Hausdorff distance between the spectrum and its reflection ``mu -> -conj(mu)``."""
    if eigenvalues.size == 0:
        return 0.0
    refl = -np.conj(eigenvalues)
    d = np.abs(eigenvalues[:, None] - refl[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def spectrum(M: OperatorMatrix, converged: bool = True, params: dict | None = None) -> SpectrumResult:
    A = M.entries
    if not np.all(np.isfinite(A)):
        raise EigensolverFailure("operator matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if ev.size != A.shape[0] or not np.all(np.isfinite(ev)):
        raise EigensolverFailure("eigensolver returned an incomplete or non-finite spectrum")
    ev = ev[np.lexsort((ev.real, ev.imag))]
    N = int(np.max(np.abs(M.modes))) if M.modes.size else 0
    return SpectrumResult(
        eigenvalues=ev,
        N=N,
        max_real_part=float(ev.real.max()),
        symmetry_defect=symmetry_defect(ev),
        converged=converged,
        params=dict(params or {}),
    )


@functools.lru_cache(maxsize=512)
def _refined(mp: ModelParams, wp: WaveParams) -> tuple[FourierSeries, float]:
    # double the Galerkin truncation until the profile's tail is resolved
    N = DEFAULT_N
    while True:
        rw = refine_newton(mp, wp, N)
        if rw.w.highest_mode() <= N // 2 or 2 * N > N_MAX:
            return rw.w, rw.c
        N *= 2


def min_truncation(w: FourierSeries) -> int:
    """Smallest ``N`` that :func:`assemble` accepts for the profile ``w``."""
    return 2 * w.highest_mode() + 2


def build_wave(mp: ModelParams, wp: WaveParams, refine: bool = False) -> tuple[FourierSeries, float]:
    """Profile and speed from the expansion, or from Newton refinement.

    The expansion leaves an O(a^4) residual, which splits the double
    eigenvalue at the origin by O(|a|^3); for ``|gamma| <~ a^2`` this shows up
    as a spurious growth rate, so long-wave studies should refine.
    """
    if refine:
        return _refined(mp, wp)
    exp = expansion_coefficients(mp, wp)
    return wave_profile(exp, wp), wave_speed(exp, wp)


def _params(mp, wp, pp) -> dict:
    return {"rho": mp.rho, "phi": mp.phi, "k": wp.k, "a": wp.a,
            "gamma": pp.gamma, "tau": pp.tau}


def compute_spectrum(
    mp: ModelParams,
    wp: WaveParams,
    pp: PerturbationParams,
    N: int = DEFAULT_N,
    refine: bool = False,
    wave: tuple[FourierSeries, float] | None = None,
) -> SpectrumResult:
    w, c = wave if wave is not None else build_wave(mp, wp, refine)
    return spectrum(assemble(w, c, mp, wp, pp, N), params=_params(mp, wp, pp))


def max_growth(
    mp: ModelParams,
    wp: WaveParams,
    pp: PerturbationParams,
    N: int = DEFAULT_N,
    refine: bool = False,
) -> float:
    """Largest real part of the truncated spectrum."""
    return compute_spectrum(mp, wp, pp, N, refine).max_real_part


def _compare(coarse: SpectrumResult, fine: SpectrumResult) -> tuple[float, float]:
    """Absolute change of the growth rate and relative change of the tracked eigenvalues.

    Growth rates below the noise floor of either truncation are roundoff and
    compare as equal.
    """
    floor = max(coarse.noise_floor, fine.noise_floor)
    d_abs = abs(max(coarse.max_real_part, floor) - max(fine.max_real_part, floor))
    ev_c = coarse.eigenvalues[np.argsort(np.abs(coarse.eigenvalues.imag), kind="stable")][:TRACKED]
    d_rel = 0.0
    for z in ev_c:
        nearest = np.min(np.abs(fine.eigenvalues - z))
        d_rel = max(d_rel, nearest / max(1.0, abs(z)))
    return d_abs, float(d_rel)


def convergence_check(
    mp: ModelParams,
    wp: WaveParams,
    pp: PerturbationParams,
    N: int = DEFAULT_N,
    refine: bool = False,
    abs_tol: float = CONV_ABS_TOL,
    rel_tol: float = CONV_REL_TOL,
) -> tuple[float, bool]:
    """Compare truncations ``N`` and ``2N``.

    Returns the larger of the growth-rate change and the relative drift of the
    ``TRACKED`` eigenvalues nearest the real axis, and whether both are within
    tolerance.
    """
    if N < 8:
        raise TruncationTooSmallError(f"convergence check needs N >= 8, got {N}")
    wave = build_wave(mp, wp, refine)
    coarse = compute_spectrum(mp, wp, pp, N, wave=wave)
    fine = compute_spectrum(mp, wp, pp, 2 * N, wave=wave)
    d_abs, d_rel = _compare(coarse, fine)
    return max(d_abs, d_rel), bool(d_abs <= abs_tol and d_rel <= rel_tol)


def adaptive_spectrum(
    mp: ModelParams,
    wp: WaveParams,
    pp: PerturbationParams,
    N: int = DEFAULT_N,
    N_max: int = N_MAX,
    refine: bool = False,
    abs_tol: float = CONV_ABS_TOL,
    rel_tol: float = CONV_REL_TOL,
) -> SpectrumResult:
    """Spectrum at the smallest ``N = N0 * 2^j <= N_max`` that agrees with ``2N``.

    ``N0`` is raised to the smallest truncation the profile allows.  The
    returned result carries ``converged=False`` if the cap was reached
    without agreement.

    Raises
    ------
    TruncationTooSmallError
        If the profile needs more than ``N_max`` modes.
    """
    wave = build_wave(mp, wp, refine)
    while N < min_truncation(wave[0]):
        N *= 2
    if N > N_max:
        raise TruncationTooSmallError(f"profile needs N >= {min_truncation(wave[0])} > N_max={N_max}")
    current = compute_spectrum(mp, wp, pp, N, wave=wave)
    while True:
        if 2 * N > N_max:
            return _with_converged(current, False)
        finer = compute_spectrum(mp, wp, pp, 2 * N, wave=wave)
        d_abs, d_rel = _compare(current, finer)
        if d_abs <= abs_tol and d_rel <= rel_tol:
            return current
        N, current = 2 * N, finer


def _with_converged(res: SpectrumResult, flag: bool) -> SpectrumResult:
    return SpectrumResult(res.eigenvalues, res.N, res.max_real_part, res.symmetry_defect,
                          flag, res.params)

