import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdstab.errors import SingularInverseModeError, ValidationError
from kdstab.flatspec import (
    Collision,
    PerturbationParams,
    collision_bracket,
    collision_gamma_nonperiodic,
    collision_gamma_periodic,
    collisions_from_csv,
    collisions_to_csv,
    default_tau_grid,
    enumerate_collisions,
    omega,
    omega_tau,
)


def brute_gamma(n, delta, tau, k, g_hi=8.0, samples=20001):
    """First positive root of Omega(n) - Omega(n + delta) by bisection on a sign scan."""
    def f(g):
        x, y = n + tau, n + delta + tau
        return (k**3 * x * (1 - x * x) + 3 * g * g / (k * x)) - (
            k**3 * y * (1 - y * y) + 3 * g * g / (k * y))
    grid = np.linspace(1e-9, g_hi, samples)
    vals = f(grid)
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size == 0:
        return None
    lo, hi = grid[idx[0]], grid[idx[0] + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sign(f(mid)) == np.sign(f(lo)):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# perturbation parameters -------------------------------------------------------

@pytest.mark.parametrize("tau", [-0.5, 0.51, math.nan])
def test_tau_range(tau):
    with pytest.raises(ValidationError):
        PerturbationParams(0.1, tau)


def test_periodic_flag():
    assert PerturbationParams(0.3).periodic
    assert not PerturbationParams(0.3, 0.5).periodic


# dispersion relation ---------------------------------------------------------------

def test_omega_examples():
    assert omega(1, 0.0, 1.0) == 0
    assert omega(2, 1.0, 1.0) == pytest.approx(-4.5)
    for g in (0.0, 0.3, 2.0):
        assert omega(-1, g, 1.0) == pytest.approx(-3 * g * g)
    with pytest.raises(ValidationError):
        omega(0, 1.0, 1.0)


def test_omega_tau_examples():
    assert omega_tau(2, 1.0, 0.0, 1.0) == pytest.approx(-4.5)
    assert omega_tau(0, 0.0, 0.5, 1.0) == pytest.approx(0.375)
    with pytest.raises(SingularInverseModeError):
        omega_tau(0, 1.0, 1e-4, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(-6, 6), st.floats(-3, 3), st.floats(0.01, 0.49), st.floats(0.3, 3))
def test_floquet_conjugation_law(n, gamma, tau, k):
    assert omega_tau(n, gamma, -tau, k) == pytest.approx(-omega_tau(-n, gamma, tau, k), rel=1e-12)


# collisions ------------------------------------------------------------------------

def test_periodic_examples():
    c = collision_gamma_periodic(-1, 2, 1.7)
    assert c.gamma_c == 0 and c.at_origin and c.omega == 0
    c = collision_gamma_periodic(-1, 3, 1.0)
    assert c.gamma_c**2 == pytest.approx(4 / 3, rel=1e-15)
    assert c.gamma_c == pytest.approx(1.154700538, abs=1e-9)
    assert c.omega == pytest.approx(-4) and not c.at_origin
    assert collision_gamma_periodic(1, 1, 1.0) is None
    with pytest.raises(ValidationError):
        collision_gamma_periodic(0, 2, 1.0)


def test_nonperiodic_examples():
    assert collision_gamma_nonperiodic(-1, 1, 0.5, 1.0) is None
    c = collision_gamma_nonperiodic(-1, 2, 0.5, 1.0)
    assert c.gamma_c == pytest.approx(math.sqrt(3) / 4, rel=1e-14)
    assert c.zone_edge
    c = collision_gamma_nonperiodic(-2, 3, 0.5, 1.0)
    assert c.at_origin and c.gamma_c**2 == pytest.approx(15 / 16, rel=1e-14)
    assert omega_tau(-2, c.gamma_c, 0.5, 1.0) == pytest.approx(0, abs=1e-14)
    with pytest.raises(ValidationError):
        collision_gamma_nonperiodic(-1, 2, 0.0, 1.0)


@pytest.mark.parametrize("delta", range(1, 7))
@pytest.mark.parametrize("tau", [0.0, 0.1, 0.37, 0.5, -0.2])
def test_closed_form_matches_brute_force_scan(delta, tau):
    for n in range(-delta - 2, 3):
        x, y = n + tau, n + delta + tau
        if tau == 0 and 0 in (n, n + delta):
            continue
        if min(abs(x), abs(y)) < 1e-3:
            continue
        if tau == 0:
            col = collision_gamma_periodic(n, delta, 1.3)
        else:
            col = collision_gamma_nonperiodic(n, delta, tau, 1.3)
        ref = brute_gamma(n, delta, tau, 1.3, g_hi=3 * 1.3**2 * delta**2)
        if col is None or col.gamma_c == 0:
            assert ref is None
        else:
            assert ref == pytest.approx(col.gamma_c, abs=1e-9)


def test_enumerate_examples():
    cols = enumerate_collisions(2)
    assert [(c.n, c.delta, c.gamma_c) for c in cols] == [(-1, 2, 0.0)]
    cols = enumerate_collisions(3, k=2.0)
    d3 = [c for c in cols if c.delta == 3]
    assert [c.n for c in d3] == [-2, -1]
    for c in d3:
        assert c.gamma_c**2 == pytest.approx(4 * 2.0**4 / 3)


def test_enumerated_records_are_collisions():
    taus = default_tau_grid()
    for c in enumerate_collisions(6, taus, 0.8):
        a = omega_tau(c.n, c.gamma_c, c.tau, 0.8)
        b = omega_tau(c.m, c.gamma_c, c.tau, 0.8)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))
        assert c.at_origin == (abs(a) <= 1e-9 * max(1.0, 0.8**3 * max(abs(c.n + c.tau), abs(c.m + c.tau))**3))


def test_mode_ranges_and_exclusion():
    for c in enumerate_collisions(5, default_tau_grid()):
        if c.tau == 0:
            assert -c.delta < c.n < 0
        elif c.tau > 0:
            assert -c.delta <= c.n <= -1 and (c.n, c.m) != (-1, 0)
        else:
            assert 1 - c.delta <= c.n <= 0 and (c.n, c.m) != (0, 1)


def test_collision_gamma_scales_with_k_squared():
    base = {(c.delta, c.n, c.tau): c.gamma_c for c in enumerate_collisions(5, [0.2, 0.5])}
    for k in (0.5, 2.0):
        for c in enumerate_collisions(5, [0.2, 0.5], k):
            assert c.gamma_c == pytest.approx(k**2 * base[(c.delta, c.n, c.tau)], rel=1e-12)


def test_bracket_examples():
    assert collision_bracket(3, 1.0) == pytest.approx((45 / 48, 64 / 36))
    assert collision_bracket(2, 1.0) == pytest.approx((0.0, 0.25))
    lo1, hi1 = collision_bracket(4, 1.0)
    lo2, hi2 = collision_bracket(4, 1.5)
    assert lo2 / lo1 == pytest.approx(1.5**4) and hi2 / hi1 == pytest.approx(1.5**4)
    with pytest.raises(ValidationError):
        collision_bracket(1, 1.0)


def test_periodic_collisions_lie_in_bracket():
    for c in enumerate_collisions(8):
        if c.delta >= 3:
            lo, hi = collision_bracket(c.delta, 1.0)
            assert lo - 1e-12 <= c.gamma_c**2 <= hi + 1e-12


def test_nonperiodic_upper_bound_holds_but_lower_bound_does_not():
    cols = [c for c in enumerate_collisions(6, default_tau_grid()) if c.delta >= 3 and c.tau != 0]
    assert all(c.gamma_c**2 <= collision_bracket(c.delta, 1.0)[1] + 1e-12 for c in cols)
    # pair {-delta, 0}: gamma_c -> 0 as tau -> 0+
    c = collision_gamma_nonperiodic(-3, 3, 1 / 98, 1.0)
    assert c.gamma_c**2 < collision_bracket(3, 1.0)[0]


def test_default_tau_grid():
    g = default_tau_grid()
    assert len(g) == 97 and 0.5 in g and -0.5 not in g and 0.0 not in g
    assert all(-0.5 < t <= 0.5 for t in g)


def test_csv_round_trip_and_format():
    cols = enumerate_collisions(3, [0.5])
    text = collisions_to_csv(cols)
    lines = text.splitlines()
    assert lines[0] == "delta,n,tau,gamma_c,omega,at_origin"
    assert "3,-1,0,1.154700538,-4,false" in lines
    back = collisions_from_csv(text)
    assert [(c.delta, c.n, c.tau, c.at_origin) for c in back] == \
        [(c.delta, c.n, c.tau, c.at_origin) for c in cols]
    for a, b in zip(back, cols):
        assert a.gamma_c == pytest.approx(b.gamma_c, rel=1e-9)


def test_json_round_trip():
    for c in enumerate_collisions(4, [0.25, 0.5]):
        assert Collision.from_json(c.to_json()) == c
