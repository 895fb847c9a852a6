import json
import math

import numpy as np
import pytest

from kdstab import hill, sweep
from kdstab.errors import NoBracketError, ValidationError
from kdstab.flatspec import PerturbationParams, omega_tau
from kdstab.model import ModelParams, WaveParams
from kdstab.reduced import Verdict, gamma_max
from kdstab.sweep import (
    BandEdge,
    GridSpec,
    StabilityVerdict,
    SweepConfig,
    SweepTable,
    classify_point,
    collision_audit,
    detunings,
    find_band_edge,
    grid_sweep,
)

MKP = ModelParams(0.0, 2.0)


@pytest.fixture(autouse=True)
def _serial(monkeypatch):
    monkeypatch.delenv(sweep.WORKERS_ENV, raising=False)


# configuration -----------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(N=4), dict(N=64, N_max=32), dict(margin=1.0), dict(margin=-0.1)])
def test_config_validation(kw):
    with pytest.raises(ValidationError):
        SweepConfig(**kw)


def test_worker_count_env_cap(monkeypatch):
    assert sweep.worker_count(SweepConfig(workers=6)) == 6
    monkeypatch.setenv(sweep.WORKERS_ENV, "2")
    assert sweep.worker_count(SweepConfig(workers=6)) == 2
    monkeypatch.setenv(sweep.WORKERS_ENV, "0")
    assert sweep.worker_count(SweepConfig(workers=6)) == 1
    monkeypatch.setenv(sweep.WORKERS_ENV, "many")
    with pytest.raises(ValidationError):
        sweep.worker_count(SweepConfig())


# point classification ------------------------------------------------------------

def test_kp2_high_frequency_point():
    v = classify_point(ModelParams(1, 0), WaveParams(1, 0.02), PerturbationParams(0.3))
    assert v.analytic is Verdict.HIGH_FREQUENCY_STABLE
    assert not v.numeric_unstable and v.agree and v.status == "ok"


def test_mkp2_modulational_point():
    v = classify_point(MKP, WaveParams(1, 0.02), PerturbationParams(0.01))
    assert v.analytic is Verdict.MODULATIONALLY_UNSTABLE
    assert v.numeric_unstable and v.agree
    assert v.numeric_max_re == pytest.approx(5.196e-4, rel=0.2)


@pytest.mark.parametrize("mp", [ModelParams(1, 1), MKP, ModelParams(-1, 0)])
@pytest.mark.parametrize("gamma, tau", [(0.01, 0.0), (0.8, 0.3)])
def test_zero_amplitude_stable_on_both_sides(mp, gamma, tau):
    v = classify_point(mp, WaveParams(1, 0.0), PerturbationParams(gamma, tau))
    assert v.analytic is Verdict.HIGH_FREQUENCY_STABLE
    assert not v.numeric_unstable and v.agree


def test_indeterminate_always_agrees():
    # just inside the outer margin of the band
    v = classify_point(MKP, WaveParams(1, 0.02), PerturbationParams(0.0195))
    assert v.analytic is Verdict.INDETERMINATE and v.agree


def test_failure_is_recorded_not_raised():
    cfg = SweepConfig(N=8, N_max=8, adaptive=True)
    # profile of this wave needs more than 8 modes
    v = classify_point(ModelParams(2, 0), WaveParams(0.5, 0.1), PerturbationParams(0.3), cfg)
    assert v.status == "error:TruncationTooSmallError"
    assert math.isnan(v.numeric_max_re) and not v.agree and v.N_used == 0


def test_unconverged_status():
    # the three-mode expansion wave fits in N = 8; the spectrum does not converge there
    cfg = SweepConfig(N=8, N_max=8, refine=False)
    v = classify_point(ModelParams(1, 1), WaveParams(1, 0.1), PerturbationParams(0.3, 0.2), cfg)
    assert v.status == "unconverged"


def test_verdict_json_round_trip():
    for v in (classify_point(MKP, WaveParams(1, 0.02), PerturbationParams(0.01)),
              classify_point(ModelParams(2, 0), WaveParams(0.5, 0.1), PerturbationParams(0.3),
                             SweepConfig(N=8, N_max=8))):
        back = StabilityVerdict.from_json(json.loads(json.dumps(v.to_json())))
        assert back.to_json() == v.to_json()


# band edges --------------------------------------------------------------------------

def test_band_edge_within_tolerance_and_scaling():
    e2 = find_band_edge(MKP, WaveParams(1, 0.02))
    e1 = find_band_edge(MKP, WaveParams(1, 0.01))
    assert e2.gamma_edge_analytic == pytest.approx(0.02)
    assert e2.relative_gap <= 0.25 and e1.relative_gap <= 0.25
    assert e1.gamma_edge_numeric / e2.gamma_edge_numeric == pytest.approx(0.5, abs=0.075)


def test_band_edge_kp2_has_no_bracket():
    with pytest.raises(NoBracketError):
        find_band_edge(ModelParams(1, 0), WaveParams(1, 0.02))


def test_band_edge_below_threshold_has_no_bracket():
    # k = 1 < 2 |rho / phi|
    with pytest.raises(NoBracketError):
        find_band_edge(ModelParams(1, 1), WaveParams(1, 0.02))


def test_band_edge_json_round_trip():
    e = BandEdge(0.0201, 0.02, 0.005)
    assert BandEdge.from_json(json.loads(json.dumps(e.to_json()))) == e


def test_growth_rate_rises_then_falls_inside_band():
    wp = WaveParams(1, 0.02)
    gm = gamma_max(MKP, wp)
    gammas = gm * np.linspace(0.1, 0.9, 33)
    rates = np.array([hill.max_growth(MKP, wp, PerturbationParams(g), refine=True) for g in gammas])
    peak = int(np.argmax(rates))
    assert 0 < peak < len(gammas) - 1
    assert np.all(np.diff(rates[:peak + 1]) > 0) and np.all(np.diff(rates[peak:]) < 0)
    assert gammas[peak] == pytest.approx(gm / math.sqrt(2), rel=0.2)


# collision audit --------------------------------------------------------------------

def test_detunings():
    from kdstab.flatspec import collision_gamma_periodic

    col = collision_gamma_periodic(-1, 3, 1.0)
    assert detunings(col) == pytest.approx([-0.4 / 3, 0, 0.4 / 3])
    assert detunings(collision_gamma_periodic(-1, 2, 1.0)) == [-0.01, 0.0, 0.01]


def test_small_audit_stable():
    entries = collision_audit(ModelParams(1, 1), WaveParams(1, 0.03), 3, tau_grid=[0.25, 0.5])
    assert entries and all(e.stable for e in entries)
    assert {e.collision.delta for e in entries} == {2, 3}
    for e in entries:
        assert e.gamma**2 == pytest.approx(e.collision.gamma_c**2 + e.epsilon)
        assert (e.discriminant is not None) == (e.collision.delta == 2)
        if e.discriminant is not None:
            assert e.discriminant.discriminant > 0


def test_zero_amplitude_audit_reproduces_collisions():
    entries = collision_audit(ModelParams(1, 1), WaveParams(1, 0.0), 4, tau_grid=[0.2, 0.5])
    at_gc = [e for e in entries if e.epsilon == 0]
    assert at_gc
    for e in at_gc:
        col = e.collision
        target = 1j * omega_tau(col.n, e.gamma, col.tau, 1.0)
        assert omega_tau(col.m, e.gamma, col.tau, 1.0) == pytest.approx(target.imag, abs=1e-9)
        close = np.abs(e.spectrum.eigenvalues - target) <= 1e-9 * max(1.0, abs(target))
        assert np.count_nonzero(close) >= 2


# grids ---------------------------------------------------------------------------------

def test_grid_order_and_length():
    g = GridSpec(rho=(0.0, 1.0), gamma=(0.1, 0.2, 0.3))
    pts = list(g.points())
    assert len(pts) == len(g) == 6
    assert [(p[0].rho, p[2].gamma) for p in pts[:3]] == [(0.0, 0.1), (0.0, 0.2), (0.0, 0.3)]


def test_kp2_preset_has_no_unstable_points():
    table = grid_sweep(sweep.kp2_grid())
    assert table.summary["points"] == 144
    assert table.summary["numeric_unstable"] == 0
    assert table.summary["converged"] == 144


def test_mkp2_preset_band_at_every_k():
    table = grid_sweep(sweep.mkp2_grid())
    for k in (0.5, 1.0, 2.0):
        assert any(r.numeric_unstable for r in table.rows if r.wp.k == k)
    assert table.summary["disagree"] == 0


def test_sweep_csv_is_deterministic(monkeypatch):
    grid = GridSpec(rho=(0.0, 1.0), phi=(1.0,), gamma=(0.005, 0.3), tau=(0.0, 0.5))
    first = grid_sweep(grid, SweepConfig(workers=1)).to_csv()
    monkeypatch.setenv(sweep.WORKERS_ENV, "4")
    second = grid_sweep(grid, SweepConfig(workers=4)).to_csv()
    assert first == second
    lines = first.splitlines()
    assert lines[0] == "rho,phi,k,a,gamma,tau,analytic,max_re,numeric_unstable,agree,N,status"
    assert len(lines) == 1 + len(grid)


def test_sweep_table_json_round_trip():
    grid = GridSpec(rho=(0.0,), phi=(2.0,), gamma=(0.01, 0.05))
    table = grid_sweep(grid)
    back = SweepTable.from_json(json.loads(json.dumps(table.to_json())))
    assert back.to_csv() == table.to_csv() and back.summary == table.summary


# threshold in k ------------------------------------------------------------------------

def test_threshold_scan_brackets_onset():
    scan = sweep.threshold_scan(ModelParams(1, 1), 0.02, np.arange(1.8, 2.31, 0.05))
    assert scan.k_threshold_analytic == 2
    assert abs(scan.k_onset - 2) <= 0.05
    assert not any(u for k, u in zip(scan.k_grid, scan.unstable) if k <= 2)


def test_threshold_scan_needs_stable_start():
    with pytest.raises(NoBracketError):
        sweep.threshold_scan(MKP, 0.02, [0.5, 1.0])
