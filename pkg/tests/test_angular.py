"""Wigner couplings and sphere quadrature, cross-checked against each other."""

import math
from fractions import Fraction

import numpy as np
import pytest

from starkecs.angular import (
    Channel,
    SphereQuadrature,
    channels_up_to,
    cos_theta_bracket,
    harmonic_triple_integral,
    legendre_triple_integral,
    sphere_integrate,
    spherical_harmonic,
    wigner3j,
)


def racah_3j_exact(l1, l2, l3, m1, m2, m3):
    """Independent exact-arithmetic Racah sum (Fraction under the square root)."""
    if m1 + m2 + m3 != 0 or not abs(l1 - l2) <= l3 <= l1 + l2:
        return 0.0
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    fact = math.factorial
    pref = Fraction(
        fact(l1 + l2 - l3) * fact(l1 - l2 + l3) * fact(-l1 + l2 + l3), fact(l1 + l2 + l3 + 1)
    ) * Fraction(
        fact(l1 + m1) * fact(l1 - m1) * fact(l2 + m2) * fact(l2 - m2) * fact(l3 + m3) * fact(l3 - m3)
    )
    total = Fraction(0)
    for t in range(0, l1 + l2 + l3 + 1):
        denoms = [
            t,
            l3 - l2 + m1 + t,
            l3 - l1 - m2 + t,
            l1 + l2 - l3 - t,
            l1 - m1 - t,
            l2 + m2 - t,
        ]
        if any(d < 0 for d in denoms):
            continue
        term = Fraction((-1) ** t, math.prod(fact(d) for d in denoms))
        total += term
    sign = (-1) ** (l1 - l2 - m3)
    return sign * float(total) * math.sqrt(float(pref))


def test_3j_trivial_values():
    assert wigner3j(0, 0, 0, 0, 0, 0) == pytest.approx(1.0, abs=1e-15)
    assert wigner3j(1, 1, 1, 0, 0, 0) == 0.0  # odd parity
    assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1.0 / math.sqrt(3.0), abs=1e-14)


def test_3j_against_exact_racah_oracle():
    rng = np.random.default_rng(5)
    for _ in range(60):
        l1, l2 = int(rng.integers(0, 7)), int(rng.integers(0, 7))
        l3 = int(rng.integers(abs(l1 - l2), l1 + l2 + 1))
        m1 = int(rng.integers(-l1, l1 + 1))
        m2 = int(rng.integers(-l2, l2 + 1))
        m3 = -m1 - m2
        if abs(m3) > l3:
            continue
        assert wigner3j(l1, l2, l3, m1, m2, m3) == pytest.approx(
            racah_3j_exact(l1, l2, l3, m1, m2, m3), abs=1e-12
        )


def test_3j_orthogonality_fixed_m3():
    for l1 in range(5):
        for l2 in range(5):
            for l3 in range(abs(l1 - l2), min(l1 + l2, 6) + 1):
                for m3 in range(-l3, l3 + 1):
                    s = sum(
                        (2 * l3 + 1) * wigner3j(l1, l2, l3, m1, -m1 - m3, m3) ** 2
                        for m1 in range(-l1, l1 + 1)
                        if abs(m1 + m3) <= l2
                    )
                    assert s == pytest.approx(1.0, abs=1e-12)


def test_3j_permutation_symmetry():
    rng = np.random.default_rng(9)
    for _ in range(40):
        l1, l2 = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        l3 = int(rng.integers(abs(l1 - l2), min(l1 + l2, 5) + 1))
        m1 = int(rng.integers(-l1, l1 + 1))
        m2 = int(rng.integers(-l2, l2 + 1))
        m3 = -m1 - m2
        if abs(m3) > l3:
            continue
        base = wigner3j(l1, l2, l3, m1, m2, m3)
        even = wigner3j(l2, l3, l1, m2, m3, m1)  # cyclic
        odd = wigner3j(l2, l1, l3, m2, m1, m3)   # swap
        assert even == pytest.approx(base, abs=1e-13)
        assert odd == pytest.approx((-1.0) ** (l1 + l2 + l3) * base, abs=1e-13)


def test_legendre_triple_integral_closed_forms():
    assert legendre_triple_integral(0, 0, 0) == pytest.approx(4 * np.pi, abs=1e-12)
    for l in range(5):
        for lp in range(5):
            expect = 4 * np.pi / (2 * l + 1) if l == lp else 0.0
            assert legendre_triple_integral(0, l, lp) == pytest.approx(expect, abs=1e-12)


def test_legendre_triple_integral_against_sphere_quadrature():
    from numpy.polynomial.legendre import Legendre

    quad = SphereQuadrature(20, 8)

    def integrand(theta, phi):
        ct = np.cos(theta)
        p = lambda l: Legendre.basis(l)(ct)
        return p(1) * p(1) * p(2)

    num = sphere_integrate(integrand, quad).real
    assert legendre_triple_integral(1, 1, 2) == pytest.approx(num, abs=1e-12)


def test_harmonic_triple_integral_literal_values():
    # m-sum selection: vanishes unless m2 = -m3
    assert harmonic_triple_integral(1, 1, 1, 2, 1, "P1") == 0.0
    assert harmonic_triple_integral(1, 0, 0, 1, 0, "P1") == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-13)
    # P1 couples only |l2 - l3| = 1
    assert harmonic_triple_integral(1, 1, 0, 3, 0, "P1") == 0.0
    with pytest.raises(ValueError):
        harmonic_triple_integral(0, 0, 0, 1, 0, "P1")


def test_cos_theta_bracket_orthonormality_and_selection():
    # P0-type bracket of any channel with itself is 1 by orthonormality
    quad = SphereQuadrature()
    for l, n in [(0, 0), (1, 1), (2, -1), (3, 2)]:
        norm = sphere_integrate(
            lambda t, p: np.conj(spherical_harmonic(l, n, t, p)) * spherical_harmonic(l, n, t, p), quad
        )
        assert norm.real == pytest.approx(1.0, abs=1e-12)
    # cos-theta kind obeys the dipole selection rules
    assert cos_theta_bracket(Channel(1, 1), Channel(1, 1)) == 0.0
    assert cos_theta_bracket(Channel(1, 0), Channel(3, 0)) == 0.0
    assert cos_theta_bracket(Channel(1, 1), Channel(2, 0)) == 0.0


def test_cos_theta_bracket_matches_sphere_quadrature():
    quad = SphereQuadrature()
    cases = [(0, 0, 1, 0), (1, 0, 2, 0), (1, 1, 2, 1), (2, -2, 3, -2), (2, 1, 1, 1)]
    for l, n, lp, npp in cases:
        num = sphere_integrate(
            lambda t, p: np.conj(spherical_harmonic(l, n, t, p))
            * np.cos(t)
            * spherical_harmonic(lp, npp, t, p),
            quad,
        )
        assert cos_theta_bracket(Channel(l, n), Channel(lp, npp)) == pytest.approx(num.real, abs=1e-12)
        assert abs(num.imag) < 1e-13


def test_sphere_integrate_unit_and_normalization():
    quad = SphereQuadrature()
    assert sphere_integrate(lambda t, p: np.ones_like(t), quad).real == pytest.approx(
        4 * np.pi, abs=1e-13 * 4 * np.pi
    )
    dens = lambda t, p: np.abs(spherical_harmonic(2, 1, t, p)) ** 2
    assert sphere_integrate(dens, quad).real == pytest.approx(1.0, abs=1e-12)


def test_sphere_quadrature_harmonic_orthonormality():
    quad = SphereQuadrature(10, 18)  # ample for products up to l = 4
    for l in range(5):
        for lp in range(5):
            for n in range(-min(l, lp), min(l, lp) + 1):
                val = sphere_integrate(
                    lambda t, p: np.conj(spherical_harmonic(l, n, t, p)) * spherical_harmonic(lp, n, t, p),
                    quad,
                )
                expect = 1.0 if l == lp else 0.0
                assert val.real == pytest.approx(expect, abs=1e-12)
                assert abs(val.imag) < 1e-13


def test_channel_validation_and_listing():
    with pytest.raises(ValueError):
        Channel(1, 2)
    assert len(channels_up_to(2)) == 9
    assert [c.l for c in channels_up_to(7, 1)] == list(range(1, 8))


def test_nonfinite_sphere_sample_raises():
    with pytest.raises(ValueError, match="non-finite"):
        sphere_integrate(lambda t, p: 1.0 / (t - t[0]), SphereQuadrature(4, 4))
