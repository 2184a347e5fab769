"""Angular couplings: Wigner 3j symbols, harmonic triple integrals, sphere quadrature.

The separable operators of the coupled-channel Hamiltonians (identity and
cos-theta kinds) reduce to products of two 3j symbols; the non-separable
water potential falls back to explicit integration over the sphere with a
tensor Gauss-Legendre x trapezoid grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import lgamma, pi, sqrt

import numpy as np
from scipy.special import sph_harm_y

__all__ = [
    "Channel",
    "SphereQuadrature",
    "wigner3j",
    "legendre_triple_integral",
    "harmonic_triple_integral",
    "cos_theta_bracket",
    "sphere_integrate",
    "spherical_harmonic",
    "channels_up_to",
]


@dataclass(frozen=True)
class Channel:
    """One (l, n) angular component of the partial-wave expansion."""

    l: int
    n: int = 0

    def __post_init__(self) -> None:
        if self.l < 0 or abs(self.n) > self.l:
            raise ValueError(f"invalid channel (l={self.l}, n={self.n})")


def channels_up_to(l_max: int, n: int | None = None) -> list[Channel]:
    """All (l, n) channels with l <= l_max; a fixed magnetic number restricts the set."""
    if n is None:
        return [Channel(l, m) for l in range(l_max + 1) for m in range(-l, l + 1)]
    return [Channel(l, n) for l in range(max(abs(n), 0), l_max + 1)]


def _lnfact(n: int) -> float:
    return lgamma(n + 1)


@lru_cache(maxsize=None)
def wigner3j(l1: int, l2: int, l3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3j symbol by the Racah finite sum (log-factorial accumulation).

    Selection-rule failures (triangle, m-sum, |m|>l) return 0 rather than
    raising; the l range of interest here is small, so double precision is
    ample.
    """
    if any(l < 0 for l in (l1, l2, l3)):
        raise ValueError("angular momenta must be non-negative")
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    if m1 + m2 + m3 != 0:
        return 0.0
    if l3 < abs(l1 - l2) or l3 > l1 + l2:
        return 0.0
    # prefactor sqrt(Delta(l1 l2 l3) * prod (l +- m)!)
    logpref = 0.5 * (
        _lnfact(l1 + l2 - l3)
        + _lnfact(l1 - l2 + l3)
        + _lnfact(-l1 + l2 + l3)
        - _lnfact(l1 + l2 + l3 + 1)
        + _lnfact(l1 + m1)
        + _lnfact(l1 - m1)
        + _lnfact(l2 + m2)
        + _lnfact(l2 - m2)
        + _lnfact(l3 + m3)
        + _lnfact(l3 - m3)
    )
    t_min = max(0, l2 - l3 - m1, l1 - l3 + m2)
    t_max = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    total = 0.0
    for t in range(t_min, t_max + 1):
        logterm = (
            _lnfact(t)
            + _lnfact(l3 - l2 + m1 + t)
            + _lnfact(l3 - l1 - m2 + t)
            + _lnfact(l1 + l2 - l3 - t)
            + _lnfact(l1 - m1 - t)
            + _lnfact(l2 + m2 - t)
        )
        total += (-1.0) ** t * np.exp(logpref - logterm)
    return float((-1.0) ** (l1 - l2 - m3) * total)


def legendre_triple_integral(l1: int, l2: int, l3: int) -> float:
    """Integral of P_l1 P_l2 P_l3 over the full sphere: 4 pi * 3j(l1,l2,l3;0,0,0)^2."""
    return 4.0 * pi * wigner3j(l1, l2, l3, 0, 0, 0) ** 2


def harmonic_triple_integral(l1: int, l2: int, m2: int, l3: int, m3: int, kind: str = "P0") -> float:
    """Angular factor sqrt((2l2+1)(2l3+1)) 3j(l1,l2,l3;0,m2,m3) 3j(l1,l2,l3;0,0,0).

    kind "P0" (l1 = 0) is the identity-type factor, "P1" (l1 = 1) the
    cos-theta type; the m-sum rule makes the result vanish unless m2 = -m3.
    """
    expected = {"P0": 0, "P1": 1}[kind]
    if l1 != expected:
        raise ValueError(f"kind {kind} requires l1 = {expected}, got {l1}")
    return (
        sqrt((2 * l2 + 1) * (2 * l3 + 1))
        * wigner3j(l1, l2, l3, 0, m2, m3)
        * wigner3j(l1, l2, l3, 0, 0, 0)
    )


def cos_theta_bracket(bra: Channel, ket: Channel) -> float:
    """<Y_bra | cos(theta) | Y_ket> with the bra conjugated (Condon-Shortley phases).

    Nonzero only for equal magnetic numbers and |l - l'| = 1.
    """
    if bra.n != ket.n:
        return 0.0
    phase = (-1.0) ** bra.n
    return phase * harmonic_triple_integral(1, bra.l, -bra.n, ket.l, ket.n, kind="P1")


@dataclass(frozen=True)
class SphereQuadrature:
    """Tensor-product sphere rule: Gauss-Legendre in cos(theta), uniform in phi."""

    n_theta: int = 40
    n_phi: int = 80

    def __post_init__(self) -> None:
        if self.n_theta < 2 or self.n_phi < 2:
            raise ValueError("need at least 2 points per angle")

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened (theta, phi, weight) arrays; weights sum to 4 pi."""
        ct, wt = np.polynomial.legendre.leggauss(self.n_theta)
        theta = np.arccos(ct)
        phi = 2.0 * pi * np.arange(self.n_phi) / self.n_phi
        wphi = 2.0 * pi / self.n_phi
        th, ph = np.meshgrid(theta, phi, indexing="ij")
        w = np.repeat(wt, self.n_phi) * wphi
        return th.ravel(), ph.ravel(), w


def sphere_integrate(g, quad: SphereQuadrature | None = None) -> complex:
    """Integral of g(theta, phi) over the sphere with measure sin(theta) dtheta dphi."""
    quad = quad or SphereQuadrature()
    theta, phi, w = quad.nodes()
    vals = np.asarray(g(theta, phi))
    if not np.all(np.isfinite(vals)):
        raise ValueError("sphere integrand returned a non-finite sample")
    return complex(np.sum(w * vals))


def spherical_harmonic(l: int, n: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Y_ln(theta, phi), Condon-Shortley convention."""
    return sph_harm_y(l, n, theta, phi)
