"""Spectrum of the linearization about the zero-amplitude wave.

At ``a = 0`` the Bloch operator is diagonal in ``exp(i (n + tau) z)`` with
purely imaginary eigenvalues ``i Omega(n, gamma, tau)``.  Instabilities of
small-amplitude waves can only bifurcate where two of these collide; this
module locates every such collision in closed form.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularInverseModeError, ValidationError

DELTA_FLOOR = 1e-3
COLLISION_TOL = 1e-9
TAU_POINTS = 49


@dataclass(frozen=True)
class PerturbationParams:
    """Transverse wavenumber ``gamma`` and Floquet exponent ``tau`` in (-1/2, 1/2]."""

    gamma: float
    tau: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise ValidationError(f"gamma must be finite, got {self.gamma!r}")
        if not (-0.5 < self.tau <= 0.5):
            raise ValidationError(f"tau must lie in (-1/2, 1/2], got {self.tau!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def periodic(self) -> bool:
        return self.tau == 0.0


@dataclass(frozen=True)
class Collision:
    """Coincidence ``Omega(n) = Omega(n + delta)`` at ``gamma = gamma_c``.

    ``zone_edge`` marks records at ``tau = 1/2``, where the pairs ``{-delta, 0}``
    and ``{-1, delta - 1}`` sit on the boundary of the Floquet zone.
    """

    n: int
    delta: int
    tau: float
    gamma_c: float
    omega: float
    at_origin: bool
    zone_edge: bool = False

    @property
    def m(self) -> int:
        return self.n + self.delta

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> Collision:
        return cls(int(data["n"]), int(data["delta"]), float(data["tau"]),
                   float(data["gamma_c"]), float(data["omega"]), bool(data["at_origin"]),
                   bool(data.get("zone_edge", False)))


def omega(n: int, gamma: float, k: float):
    """``k^3 n (1 - n^2) + 3 gamma^2 / (k n)`` for a mean-zero periodic mode."""
    if n == 0:
        raise ValidationError("mode n = 0 is excluded from the mean-zero space")
    return k**3 * n * (1 - n**2) + 3 * np.square(gamma) / (k * n)


def omega_tau(n: int, gamma: float, tau: float, k: float):
    """Bloch-mode frequency; equals :func:`omega` at ``tau = 0``."""
    x = n + tau
    if abs(x) < DELTA_FLOOR:
        raise SingularInverseModeError(
            f"|n + tau| = {abs(x):.3g} is below the floor {DELTA_FLOOR:g}"
        )
    return k**3 * x * (1 - x**2) + 3 * np.square(gamma) / (k * x)


def _origin_tol(n: int, delta: int, tau: float, k: float) -> float:
    # scale of the individual terms that cancel when Omega = 0
    x = max(abs(n + tau), abs(n + delta + tau))
    return COLLISION_TOL * max(1.0, k**3 * x**3)


def collision_gamma_periodic(n: int, delta: int, k: float) -> Collision | None:
    """Collision of modes ``n`` and ``n + delta`` for mean-zero periodic perturbations.

    Solves ``3 gamma^2 = k^4 n (n + delta) (1 - 3 n^2 - 3 n delta - delta^2)``;
    returns ``None`` when the right side is negative, which happens exactly
    when ``n`` lies outside ``(-delta, 0)``.
    """
    if delta < 1:
        raise ValidationError(f"delta must be >= 1, got {delta}")
    if n == 0 or n == -delta:
        raise ValidationError("both colliding modes must be nonzero")
    rhs = n * (n + delta) * (1 - 3 * n * n - 3 * n * delta - delta * delta)  # exact integer
    if rhs < 0:
        return None
    gamma_c = k**2 * math.sqrt(rhs / 3)
    om = float(omega(n, gamma_c, k))
    at_origin = abs(om) <= _origin_tol(n, delta, 0.0, k)
    return Collision(n, delta, 0.0, gamma_c, 0.0 if at_origin else om, at_origin)


def collision_gamma_nonperiodic(n: int, delta: int, tau: float, k: float) -> Collision | None:
    """Collision of Bloch modes ``n`` and ``n + delta`` at Floquet exponent ``tau != 0``.

    Uses ``3 gamma^2 = -k^4 [3 x^2 (x + delta)^2 + x (x + delta)(delta^2 - 1)]``
    with ``x = n + tau``.  The pair ``{-1, 0}`` (and its mirror ``{0, 1}`` for
    ``tau < 0``) never collides.
    """
    if delta < 1:
        raise ValidationError(f"delta must be >= 1, got {delta}")
    if tau == 0 or not (-0.5 < tau <= 0.5):
        raise ValidationError(f"tau must lie in (-1/2, 1/2] without 0, got {tau!r}")
    x, y = n + tau, n + delta + tau
    if min(abs(x), abs(y)) < DELTA_FLOOR:
        raise SingularInverseModeError(f"mode pair ({n}, {n + delta}) too close to tau = -n")
    if delta == 1 and n in (-1, 0):
        return None
    rhs = -(3 * x * x * y * y + x * y * (delta * delta - 1)) / 3
    if rhs < 0 or x * y >= 0:
        return None
    gamma_c = k**2 * math.sqrt(rhs)
    om = float(omega_tau(n, gamma_c, tau, k))
    at_origin = abs(om) <= _origin_tol(n, delta, tau, k)
    return Collision(
        n, delta, float(tau), gamma_c, 0.0 if at_origin else om, at_origin,
        zone_edge=abs(tau - 0.5) <= COLLISION_TOL,
    )


def default_tau_grid(points: int = TAU_POINTS) -> list[float]:
    """``points`` uniform values in (0, 1/2] followed by their negatives (minus -1/2)."""
    pos = [i / (2 * points) for i in range(1, points + 1)]
    return pos + [-t for t in pos[:-1]]


def _candidate_modes(delta: int, tau: float) -> range:
    # collisions need n + tau < 0 < n + delta + tau
    if tau > 0:
        return range(-delta, 0)
    if tau < 0:
        return range(1 - delta, 1)
    return range(1 - delta, 0)


def enumerate_collisions(delta_max: int, tau_grid=(), k: float = 1.0) -> list[Collision]:
    """Every collision with ``delta <= delta_max`` at ``tau = 0`` and on ``tau_grid``.

    Sorted by ``(delta, n, tau)``.  Grid values too close to an integer for the
    inverse derivative are skipped, as are duplicates.
    """
    if delta_max < 1:
        raise ValidationError(f"delta_max must be >= 1, got {delta_max}")
    taus = sorted({0.0, *(float(t) for t in tau_grid)})
    found: dict[tuple[int, int, float], Collision] = {}
    for delta in range(1, delta_max + 1):
        for tau in taus:
            for n in _candidate_modes(delta, tau):
                if tau == 0:
                    col = collision_gamma_periodic(n, delta, k)
                else:
                    if min(abs(n + tau), abs(n + delta + tau)) < DELTA_FLOOR:
                        continue
                    col = collision_gamma_nonperiodic(n, delta, tau, k)
                if col is not None:
                    found.setdefault((delta, n, tau), col)
    return [found[key] for key in sorted(found)]


def collision_bracket(delta: int, k: float) -> tuple[float, float]:
    """Range of ``gamma_c^2`` for periodic collisions with separation ``delta``.

    The lower end is attained for even ``delta`` at ``n = -delta/2``; the
    ``{-1, 1}`` collision at ``gamma = 0`` is the only one at the lower end
    for ``delta = 2``.
    """
    if delta < 2:
        raise ValidationError(f"collision bracket defined for delta >= 2, got {delta}")
    d2 = delta * delta
    return k**4 * d2 * (d2 - 4) / 48, k**4 * (d2 - 1) ** 2 / 36


CSV_HEADER = ("delta", "n", "tau", "gamma_c", "omega", "at_origin")


def _fmt(x: float) -> str:
    return format(x, ".10g")


def collisions_to_csv(collisions) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for c in collisions:
        writer.writerow([c.delta, c.n, _fmt(c.tau), _fmt(c.gamma_c), _fmt(c.omega),
                         "true" if c.at_origin else "false"])
    return buf.getvalue()


def collisions_from_csv(text: str) -> list[Collision]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for r in rows:
        tau = float(r["tau"])
        out.append(Collision(
            n=int(r["n"]), delta=int(r["delta"]), tau=tau, gamma_c=float(r["gamma_c"]),
            omega=float(r["omega"]), at_origin=r["at_origin"] == "true",
            zone_edge=abs(tau - 0.5) <= COLLISION_TOL,
        ))
    return out
