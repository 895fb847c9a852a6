"""Parameter studies joining the analytic predictions with Hill spectra."""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hill
from .errors import KDStabError, NoBracketError, ValidationError
from .flatspec import Collision, PerturbationParams, default_tau_grid, enumerate_collisions
from .model import DEFAULT_N, ModelParams, WaveParams
from .reduced import (
    BAND_MARGIN,
    HighFreqVerdict,
    Verdict,
    classify_analytic,
    delta2_discriminant,
    gamma_max,
    k_threshold,
)

WORKERS_ENV = "KD_NUM_WORKERS"


@dataclass(frozen=True)
class SweepConfig:
    N: int = DEFAULT_N
    N_max: int = hill.N_MAX
    adaptive: bool = True
    refine: bool = True
    margin: float = BAND_MARGIN
    workers: int | None = None

    def __post_init__(self):
        if self.N < 8 or self.N_max < self.N:
            raise ValidationError(f"need 8 <= N <= N_max, got N={self.N}, N_max={self.N_max}")
        if not 0 <= self.margin < 1:
            raise ValidationError(f"margin must lie in [0, 1), got {self.margin}")


def worker_count(cfg: SweepConfig) -> int:
    n = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            raise ValidationError(f"{WORKERS_ENV} must be an integer, got {cap!r}") from None
    return max(1, n)


def _pmap(fn, items, cfg: SweepConfig) -> list:
    items = list(items)
    workers = min(worker_count(cfg), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    # LAPACK releases the GIL; Executor.map keeps input order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def numeric_spectrum(mp, wp, pp, cfg: SweepConfig) -> hill.SpectrumResult:
    if cfg.adaptive:
        return hill.adaptive_spectrum(mp, wp, pp, cfg.N, cfg.N_max, cfg.refine)
    return hill.compute_spectrum(mp, wp, pp, cfg.N, cfg.refine)


@dataclass(frozen=True)
class StabilityVerdict:
    mp: ModelParams
    wp: WaveParams
    pp: PerturbationParams
    analytic: Verdict
    numeric_max_re: float
    numeric_unstable: bool
    agree: bool
    N_used: int
    status: str = "ok"
    noise_floor: float = hill.NOISE_ABS

    def to_json(self) -> dict:
        return {
            "rho": self.mp.rho, "phi": self.mp.phi, "k": self.wp.k, "a": self.wp.a,
            "gamma": self.pp.gamma, "tau": self.pp.tau, "analytic": self.analytic.value,
            "max_re": _json_float(self.numeric_max_re), "numeric_unstable": self.numeric_unstable,
            "agree": self.agree, "N": self.N_used, "status": self.status,
            "noise_floor": _json_float(self.noise_floor),
        }

    @classmethod
    def from_json(cls, d: dict) -> StabilityVerdict:
        return cls(ModelParams(d["rho"], d["phi"]), WaveParams(d["k"], d["a"]),
                   PerturbationParams(d["gamma"], d["tau"]), Verdict(d["analytic"]),
                   _from_json_float(d["max_re"]), bool(d["numeric_unstable"]),
                   bool(d["agree"]), int(d["N"]), d["status"], _from_json_float(d["noise_floor"]))


def _json_float(x: float) -> float | None:
    # JSON has no NaN; failed points carry null
    return None if math.isnan(x) else x


def _from_json_float(x) -> float:
    return math.nan if x is None else float(x)


def classify_point(mp: ModelParams, wp: WaveParams, pp: PerturbationParams,
                   cfg: SweepConfig = SweepConfig()) -> StabilityVerdict:
    """Analytic verdict and adaptive Hill spectrum for one parameter point.

    Numerical failures are recorded in ``status`` (``"error:<Name>"``) rather
    than raised; an unconverged spectrum gives ``status="unconverged"``.
    """
    analytic = classify_analytic(mp, wp, pp, cfg.margin)
    try:
        res = numeric_spectrum(mp, wp, pp, cfg)
    except KDStabError as exc:
        return StabilityVerdict(mp, wp, pp, analytic, math.nan, False, False, 0,
                                f"error:{type(exc).__name__}", math.nan)
    unstable = res.unstable
    if analytic is Verdict.INDETERMINATE:
        agree = True
    else:
        agree = (analytic is Verdict.MODULATIONALLY_UNSTABLE) == unstable
    return StabilityVerdict(mp, wp, pp, analytic, res.max_real_part, unstable, agree, res.N,
                            "ok" if res.converged else "unconverged", res.noise_floor)


@dataclass(frozen=True)
class BandEdge:
    gamma_edge_numeric: float
    gamma_edge_analytic: float
    relative_gap: float

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> BandEdge:
        return cls(**{k: float(v) for k, v in data.items()})


def find_band_edge(mp: ModelParams, wp: WaveParams, tau: float = 0.0,
                   cfg: SweepConfig = SweepConfig(), scan_points: int = 40,
                   rtol: float = 1e-6) -> BandEdge:
    """Outer edge of the numerically unstable ``gamma`` band.

    Scans ``(0, 4 gamma_max]`` for the largest unstable sample, then bisects
    between it and the next (stable) sample.

    Raises
    ------
    NoBracketError
        If no sample is unstable, or the largest sample is still unstable.
    """
    gm = gamma_max(mp, wp)
    if gm == 0:
        raise NoBracketError("analytic band width is zero; nothing to bracket")

    def unstable(g: float) -> bool:
        return numeric_spectrum(mp, wp, PerturbationParams(g, tau), cfg).unstable

    grid = 4 * gm * np.arange(1, scan_points + 1) / scan_points
    flags = _pmap(unstable, grid, cfg)
    hits = [i for i, f in enumerate(flags) if f]
    if not hits:
        raise NoBracketError(f"no unstable gamma in (0, {4 * gm:.4g}] at {mp}, {wp}")
    i = hits[-1]
    if i == len(grid) - 1:
        raise NoBracketError(f"still unstable at gamma = {grid[-1]:.4g}; bracket invalid")
    lo, hi = float(grid[i]), float(grid[i + 1])
    assert unstable(lo) and not unstable(hi)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            lo = mid
        else:
            hi = mid
    edge = 0.5 * (lo + hi)
    return BandEdge(edge, gm, abs(edge - gm) / gm)


@dataclass(frozen=True)
class AuditEntry:
    collision: Collision
    epsilon: float
    gamma: float
    spectrum: hill.SpectrumResult
    stable: bool
    discriminant: HighFreqVerdict | None = None


def detunings(col: Collision) -> list[float]:
    eps0 = 0.1 * col.gamma_c**2 if col.gamma_c > 0 else 0.01
    return [-eps0, 0.0, eps0]


def collision_audit(mp: ModelParams, wp: WaveParams, delta_max: int,
                    cfg: SweepConfig = SweepConfig(), tau_grid=None,
                    k_collisions: float | None = None) -> list[AuditEntry]:
    """Hill spectra at every collision with separation ``<= delta_max`` and its detunings.

    Each collision is evaluated at ``gamma^2 = gamma_c^2 + eps`` for
    ``eps in {-eps0, 0, eps0}``; points with ``gamma^2 <= 0`` carry no
    transverse dependence and are skipped.  Separation-2 entries also carry
    the reduced discriminant.
    """
    taus = default_tau_grid() if tau_grid is None else tau_grid
    cols = enumerate_collisions(delta_max, taus, wp.k if k_collisions is None else k_collisions)
    jobs = []
    for col in cols:
        for eps in detunings(col):
            g2 = col.gamma_c**2 + eps
            if g2 > 0:
                jobs.append((col, eps, math.sqrt(g2)))

    def run(job):
        col, eps, g = job
        res = numeric_spectrum(mp, wp, PerturbationParams(g, col.tau), cfg)
        disc = None
        if col.delta == 2:
            disc = delta2_discriminant(mp, wp, col.n, col.tau, eps, col.gamma_c)
        return AuditEntry(col, eps, g, res, not res.unstable, disc)

    return _pmap(run, jobs, cfg)


@dataclass(frozen=True)
class GridSpec:
    rho: tuple = (0.0,)
    phi: tuple = (1.0,)
    k: tuple = (1.0,)
    a: tuple = (0.02,)
    gamma: tuple = (0.01,)
    tau: tuple = (0.0,)

    def points(self):
        for rho, phi, k, a, g, tau in itertools.product(
            self.rho, self.phi, self.k, self.a, self.gamma, self.tau
        ):
            yield ModelParams(rho, phi), WaveParams(k, a), PerturbationParams(g, tau)

    def __len__(self):
        return math.prod(len(getattr(self, f)) for f in ("rho", "phi", "k", "a", "gamma", "tau"))


@dataclass
class SweepTable:
    rows: list[StabilityVerdict]
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        return verdicts_to_csv(self.rows)

    def to_json(self) -> dict:
        return {"summary": dict(self.summary), "rows": [r.to_json() for r in self.rows]}

    @classmethod
    def from_json(cls, data: dict) -> SweepTable:
        return cls([StabilityVerdict.from_json(r) for r in data["rows"]], dict(data["summary"]))


def grid_sweep(grid: GridSpec, cfg: SweepConfig = SweepConfig()) -> SweepTable:
    rows = _pmap(lambda p: classify_point(*p, cfg), grid.points(), cfg)
    ok = [r for r in rows if r.status == "ok"]
    summary = {
        "points": len(rows),
        "converged": len(ok),
        "failed": sum(r.status.startswith("error") for r in rows),
        "unconverged": sum(r.status == "unconverged" for r in rows),
        "agree": sum(r.agree for r in ok),
        "disagree": sum(not r.agree for r in ok),
        "numeric_unstable": sum(r.numeric_unstable for r in ok),
        "indeterminate": sum(r.analytic is Verdict.INDETERMINATE for r in rows),
    }
    return SweepTable(rows, summary)


SWEEP_HEADER = ("rho", "phi", "k", "a", "gamma", "tau", "analytic", "max_re",
                "numeric_unstable", "agree", "N", "status")


def _b(x: bool) -> str:
    return "true" if x else "false"


def verdicts_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow([repr(r.mp.rho), repr(r.mp.phi), repr(r.wp.k), repr(r.wp.a),
                         repr(r.pp.gamma), repr(r.pp.tau), r.analytic.value,
                         repr(r.numeric_max_re), _b(r.numeric_unstable), _b(r.agree),
                         r.N_used, r.status])
    return buf.getvalue()


# presets ---------------------------------------------------------------------

def kp2_grid() -> GridSpec:
    """KP-II (``phi = 0``): long, finite and short transverse waves, periodic and Bloch."""
    return GridSpec(
        rho=(-1.0, 1.0), phi=(0.0,), k=(0.5, 1.0, 2.0), a=(0.02,),
        gamma=(0.001, 0.01, 0.05, 0.1, 0.3, 0.5, 1.0, 1.5),
        tau=(0.0, 0.25, 0.5),
    )


def mkp2_grid() -> GridSpec:
    """mKP-II (``rho = 0``): small ``gamma`` resolving the band for ``k`` in {0.5, 1, 2}."""
    return GridSpec(
        rho=(0.0,), phi=(1.0,), k=(0.5, 1.0, 2.0), a=(0.02,),
        gamma=(0.001, 0.002, 0.004, 0.007, 0.01, 0.015, 0.02, 0.03, 0.05, 0.1),
        tau=(0.0,),
    )


def verification_grid() -> GridSpec:
    return GridSpec(
        rho=(0.0, 1.0), phi=(0.0, 1.0, 3.0), k=(0.5, 1.0, 3.0), a=(0.02,),
        gamma=(0.002, 0.005, 0.01, 0.02, 0.05, 0.3, 1.0),
        tau=(0.0, 0.25),
    )


PRESETS = {"kp2": kp2_grid, "mkp2": mkp2_grid, "verification": verification_grid}


# threshold in k ----------------------------------------------------------------

PROBE_GAMMAS = tuple(np.geomspace(1e-5, 0.2, 25))


@dataclass(frozen=True)
class ThresholdScan:
    k_grid: tuple
    unstable: tuple
    k_first_unstable: float
    k_onset: float
    k_threshold_analytic: float


def unstable_for_some_gamma(mp: ModelParams, wp: WaveParams, cfg: SweepConfig,
                            probes=PROBE_GAMMAS) -> bool:
    """Whether any probe ``gamma`` (periodic perturbations) gives a growing mode."""
    for g in probes:
        if numeric_spectrum(mp, wp, PerturbationParams(g, 0.0), cfg).unstable:
            return True
    return False


def threshold_scan(mp: ModelParams, a: float, k_grid, cfg: SweepConfig = SweepConfig(),
                   probes=PROBE_GAMMAS, ktol: float = 1e-3) -> ThresholdScan:
    """Locate the smallest wavenumber with a modulational instability.

    ``k_grid`` is scanned in increasing order; the first unstable value and
    its stable predecessor are then bisected down to ``ktol``.
    """
    ks = sorted(float(k) for k in k_grid)
    flags = _pmap(lambda k: unstable_for_some_gamma(mp, WaveParams(k, a), cfg, probes), ks, cfg)
    hits = [i for i, f in enumerate(flags) if f]
    if not hits:
        raise NoBracketError("no unstable wavenumber on the grid")
    i = hits[0]
    if i == 0:
        raise NoBracketError(f"already unstable at the smallest grid value k={ks[0]}")
    lo, hi = ks[i - 1], ks[i]
    while hi - lo > ktol:
        mid = 0.5 * (lo + hi)
        if unstable_for_some_gamma(mp, WaveParams(mid, a), cfg, probes):
            hi = mid
        else:
            lo = mid
    return ThresholdScan(tuple(ks), tuple(flags), ks[i], 0.5 * (lo + hi), k_threshold(mp))
