"""Potential models, analytic continuations and the barrier-crossing field."""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from starkecs.basis import ScalingPath
from starkecs.potentials import (
    CentralCoulomb,
    SingularPointError,
    SoftCore1D,
    WaterPotentialParams,
    barrier_and_fcrit,
    water_asymptotic_charge,
    water_potential,
)


def test_soft_core_shape():
    v = SoftCore1D()
    assert v.value(0.0) == -1.0
    xs = np.linspace(-8.0, 8.0, 33)
    assert np.abs(v.value(xs) - v.value(-xs)).max() == 0.0


def test_coulomb_asymptotics():
    c = CentralCoulomb(2.0)
    assert 1e6 * c.value(1e6) == pytest.approx(-2.0, abs=1e-12)


def test_water_mirror_symmetries_exact():
    params = WaterPotentialParams()
    rng = np.random.default_rng(13)
    for _ in range(100):
        r = rng.uniform(0.05, 8.0)
        th = rng.uniform(0.0, np.pi)
        ph = rng.uniform(-np.pi, np.pi)
        v = water_potential(params, r, th, ph)
        assert water_potential(params, r, th, -ph) == pytest.approx(v, abs=1e-14)
        assert water_potential(params, r, np.pi - th, ph) == pytest.approx(v, abs=1e-14)


def test_water_asymptotic_charge_both_parameter_readings():
    # the printed screening numbers give a net charge of exactly 1; the
    # asymptote quoted alongside them (1.027) corresponds to n_o = 7.158
    printed = WaterPotentialParams()
    assert water_asymptotic_charge(printed) == pytest.approx(1.000, abs=1e-6)
    r = 1e4
    assert r * water_potential(printed, r, 1.1, 0.3) == pytest.approx(-1.000, abs=1e-3)
    transposed = WaterPotentialParams(n_o=7.158)
    assert water_asymptotic_charge(transposed) == pytest.approx(1.027, abs=1e-6)
    assert r * water_potential(transposed, r, 1.1, 0.3) == pytest.approx(-1.027, abs=1e-3)


def test_water_small_r_sees_bare_oxygen():
    params = WaterPotentialParams()
    r = 1e-8
    assert r * water_potential(params, r, 0.0, 0.0) == pytest.approx(-8.0, abs=1e-6)


def test_water_diverges_at_nuclei():
    params = WaterPotentialParams()
    half = 0.5 * params.hoh_angle
    vals = [
        water_potential(params, params.r_oh - eps, np.pi / 2, half) for eps in (1e-2, 1e-4, 1e-6)
    ]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < -1e5


def test_water_exactly_at_nucleus_raises():
    params = WaterPotentialParams()
    with pytest.raises(SingularPointError):
        water_potential(params, params.r_oh, np.pi / 2, 0.5 * params.hoh_angle)


def test_scaled_value_reduces_at_zero_angle():
    path = ScalingPath(r0=10.0, xi=0.0)
    c = CentralCoulomb(1.0)
    for r in (2.0, 15.0, 40.0):
        assert c.scaled_value(path, r) == pytest.approx(c.value(r), abs=1e-15)
    sc = SoftCore1D()
    p2 = ScalingPath(r0=9.8, xi=0.0, two_sided=True)
    for x in (-20.0, 3.0, 20.0):
        got = sc.scaled_value(p2, x)
        expect = sc.value(x) if abs(x) < 9.8 else -1.0 / abs(x)
        assert got == pytest.approx(expect, abs=1e-15)


def test_coulomb_rationalized_split_form():
    # e^{i xi} V(r tilde) equals the (re + i im)/denominator split of the
    # matrix-element integrand outside the scaling radius
    xi, r0 = 0.5, 10.0
    path = ScalingPath(r0=r0, xi=xi)
    c = CentralCoulomb(1.0)
    for r in (10.5, 13.0, 37.0, 95.0):
        lhs = np.exp(1j * xi) * c.scaled_value(path, r)
        den = (r - r0 + r0 * np.cos(xi)) ** 2 + r0**2 * np.sin(xi) ** 2
        rhs = -(r - r0 + r0 * np.cos(xi) + 1j * r0 * np.sin(xi)) / den
        assert lhs == pytest.approx(rhs, abs=1e-15)


def test_water_tail_substitution_is_exact():
    params = WaterPotentialParams()
    path = ScalingPath(r0=10.0, xi=0.5)
    rt = path.map(15.0)
    # outside the scaling radius the model is replaced by -1/r tilde
    assert abs(-1.0 / rt + 1.0 / rt) == 0.0


def test_tail_mismatch_guard_at_default_radius():
    # placing r0 = 10 keeps the |V(r0) - (-1/r0)| substitution error small
    r0 = 10.0
    assert abs(SoftCore1D().value(r0) + 1.0 / r0) < 1e-2
    for params in (WaterPotentialParams(), WaterPotentialParams(n_o=7.158)):
        v = water_potential(params, r0, 1.0, 2.0)
        assert abs(v + 1.0 / r0) < 1e-2


def test_fcrit_coulomb_closed_form():
    # static level -Z^2/2 crosses the barrier top  -2 sqrt(Z F0) at F0 = Z^3/16
    f0s = np.linspace(0.03, 0.09, 7)
    res = barrier_and_fcrit(CentralCoulomb(1.0).value, f0s, np.full(7, -0.5))
    assert res.f_crit == pytest.approx(1.0 / 16.0, abs=1e-9)
    assert res.r_star == pytest.approx(np.sqrt(1.0 / res.f_crit), rel=1e-6)
    assert res.barrier_height == pytest.approx(-2.0 * np.sqrt(res.f_crit), abs=1e-9)
    # independent check of the barrier top by direct numerical maximization
    top = minimize_scalar(lambda r: -(-1.0 / r - res.f_crit * r), bounds=(0.1, 50.0), method="bounded")
    assert -top.fun == pytest.approx(res.barrier_height, abs=1e-9)


def test_fcrit_helium_first_excited_static():
    f0s = np.linspace(0.02, 0.05, 7)
    res = barrier_and_fcrit(CentralCoulomb(2.0).value, f0s, np.full(7, -0.5))
    assert res.f_crit == pytest.approx(1.0 / 32.0, abs=1e-9)


def test_fcrit_with_field_dependent_level_shifts_upward():
    # ingested rows of the helium ion m=1 field scan: Re E falls with F0, so
    # the crossing happens at larger F0 than the static estimate 1/32
    f0s = np.array([0.02, 0.026, 0.03, 0.034, 0.038, 0.045, 0.05])
    re_e = np.array(
        [-0.501986914, -0.503406404, -0.504593894, -0.505999257, -0.507655401, -0.511259479, -0.514405054]
    )
    res = barrier_and_fcrit(CentralCoulomb(2.0).value, f0s, re_e)
    assert res.f_crit > 1.0 / 32.0
    assert 0.031 < res.f_crit < 0.04


def test_fcrit_without_bracketing_reports_signs():
    f0s = np.array([0.001, 0.002, 0.003])
    with pytest.raises(ValueError, match="gap signs"):
        barrier_and_fcrit(CentralCoulomb(1.0).value, f0s, np.full(3, -0.5))
