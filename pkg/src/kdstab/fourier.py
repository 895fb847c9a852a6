"""Truncated Fourier series of 2*pi-periodic functions.

Convention: ``f(z) = sum_n fhat[n] exp(i n z)`` with
``fhat[n] = (1/2pi) int_0^{2pi} f(z) exp(-i n z) dz``.  A cosine of amplitude
``A`` in mode ``m`` therefore contributes ``A/2`` to both ``fhat[m]`` and
``fhat[-m]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FourierSeries:
    """Complex coefficients for modes ``-N..N``, stored at index ``n + N``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient array must be 1-D with odd length 2N+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @classmethod
    def zeros(cls, N: int) -> FourierSeries:
        return cls(np.zeros(2 * N + 1, dtype=complex))

    @classmethod
    def from_cosines(cls, amplitudes, N: int | None = None) -> FourierSeries:
        """Build ``sum_m amplitudes[m] cos(m z)``; ``amplitudes[0]`` is the mean."""
        amps = np.asarray(amplitudes, dtype=float)
        M = amps.size - 1
        N = M if N is None else N
        if N < M:
            raise ValueError(f"N={N} cannot hold cosine modes up to {M}")
        c = np.zeros(2 * N + 1, dtype=complex)
        c[N] = amps[0]
        c[N + 1:N + M + 1] = amps[1:] / 2
        c[N - M:N][::-1] = amps[1:] / 2
        return cls(c)

    def coeff(self, n: int) -> complex:
        if abs(n) > self.N:
            return 0j
        return complex(self.coeffs[n + self.N])

    def cosine_amplitudes(self) -> np.ndarray:
        """Cosine amplitudes ``[a_0, ..., a_N]`` of the even part."""
        N = self.N
        pos = self.coeffs[N:]
        neg = self.coeffs[:N + 1][::-1]
        amps = (pos + neg).real
        amps[0] = self.coeffs[N].real
        return amps

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs - np.conj(self.coeffs[::-1])) <= tol))

    def is_even(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol)) and self.is_real(tol)

    def highest_mode(self, rtol: float = 1e-15) -> int:
        """Largest ``|n|`` whose coefficient exceeds ``rtol`` times the largest one."""
        mags = np.abs(self.coeffs)
        peak = mags.max()
        if peak == 0:
            return 0
        idx = np.nonzero(mags > rtol * peak)[0]
        return int(np.max(np.abs(idx - self.N)))

    def resized(self, N: int) -> FourierSeries:
        """Zero-pad or truncate to modes ``-N..N``."""
        out = np.zeros(2 * N + 1, dtype=complex)
        m = min(N, self.N)
        out[N - m:N + m + 1] = self.coeffs[self.N - m:self.N + m + 1]
        return FourierSeries(out)

    def derivative(self) -> FourierSeries:
        return FourierSeries(1j * self.modes * self.coeffs)

    def __mul__(self, other: FourierSeries) -> FourierSeries:
        # full linear convolution: exact product of trigonometric polynomials
        return FourierSeries(np.convolve(self.coeffs, other.coeffs))

    def __add__(self, other: FourierSeries) -> FourierSeries:
        N = max(self.N, other.N)
        return FourierSeries(self.resized(N).coeffs + other.resized(N).coeffs)

    def __sub__(self, other: FourierSeries) -> FourierSeries:
        return self + other.scaled(-1.0)

    def scaled(self, factor: complex) -> FourierSeries:
        return FourierSeries(factor * self.coeffs)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        vals = np.exp(1j * np.multiply.outer(z, self.modes)) @ self.coeffs
        return vals

    def l2_norm(self) -> float:
        """Norm of L^2(T) with the (1/2pi) normalized inner product."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def to_json(self) -> list[list[float]]:
        """Serialize as ``[[n, re, im], ...]`` over all stored modes."""
        return [[int(n), float(c.real), float(c.imag)] for n, c in zip(self.modes, self.coeffs)]

    @classmethod
    def from_json(cls, triples) -> FourierSeries:
        triples = list(triples)
        if not triples:
            raise ValueError("empty coefficient list")
        N = max(abs(int(t[0])) for t in triples)
        c = np.zeros(2 * N + 1, dtype=complex)
        for n, re, im in triples:
            c[int(n) + N] = complex(re, im)
        return cls(c)

    def __eq__(self, other):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        return self.N == other.N and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None
