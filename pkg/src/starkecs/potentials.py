"""Potential-energy models: 1D soft-core hydrogen, central Coulomb, the
three-center screened water potential, the DC field term, and the
barrier-crossing field strength that separates tunnelling from
over-the-barrier ionization.

Outside the scaling radius every model is replaced by its long-range
Coulomb tail continued along the complex path (-1/x tilde for the soft-core
model, -Z/r tilde for Coulomb, -1/r tilde for water), matching how the
matrix elements are defined there.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, sin, sqrt

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .basis import ScalingPath

__all__ = [
    "SingularPointError",
    "SoftCore1D",
    "HarmonicOscillator1D",
    "CentralCoulomb",
    "WaterPotentialParams",
    "DcField",
    "water_potential",
    "water_asymptotic_charge",
    "barrier_and_fcrit",
    "BarrierCrossing",
]


class SingularPointError(ValueError):
    """Raised when a potential is evaluated exactly at a nucleus."""


@dataclass(frozen=True)
class SoftCore1D:
    """The 1D model atom -1/sqrt(1+x^2); tail -1/|x| beyond the scaling radius."""

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return -1.0 / np.sqrt(1.0 + x * x)

    def scaled_value(self, path: ScalingPath, x):
        """Model value inside the scaling region, continued tail outside.

        On the right the tail is -1/x tilde; on a scaled left side it is the
        continuation of -1/|x|, i.e. +1/x tilde.
        """
        x = np.asarray(x, dtype=float)
        out = self.value(x).astype(complex)
        xt = path.map(x)
        right = x > path.r0
        out = np.where(right, -1.0 / np.where(right, xt, 1.0), out)
        if path.two_sided:
            left = x < -path.r0
            out = np.where(left, 1.0 / np.where(left, xt, 1.0), out)
        if out.ndim == 0:
            return complex(out)
        return out


@dataclass(frozen=True)
class HarmonicOscillator1D:
    """V = k x^2 / 2, the Hermitian validation problem (no scaling use)."""

    k: float = 1.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.k * x * x

    def scaled_value(self, path: ScalingPath, x):
        xt = path.map(np.asarray(x, dtype=float))
        return 0.5 * self.k * xt * xt


@dataclass(frozen=True)
class CentralCoulomb:
    """-Z/r, hydrogen-like; the analytic continuation is exact."""

    z: float = 1.0

    def __post_init__(self) -> None:
        if self.z <= 0:
            raise ValueError("effective charge must be positive")

    def value(self, r):
        return -self.z / np.asarray(r, dtype=float)

    def scaled_value(self, path: ScalingPath, r):
        return -self.z / path.map(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class WaterPotentialParams:
    """Screened three-center effective potential of the water molecule.

    Oxygen sits at the origin; the two hydrogens lie in the theta = pi/2
    plane at +-half the HOH angle, r_oh away.  The asymptotic net charge
    (8 - N_O - 2 N_H + ...) evaluates to 1.027.
    """

    alpha_o: float = 1.6025
    alpha_h: float = 0.617
    n_o: float = 7.185
    n_h: float = 0.9075
    r_oh: float = 1.8140
    hoh_angle: float = 1.8238691

    def hydrogen_sites(self) -> np.ndarray:
        """Cartesian positions of the two hydrogen nuclei."""
        half = 0.5 * self.hoh_angle
        return np.array(
            [
                [self.r_oh * cos(half), self.r_oh * sin(half), 0.0],
                [self.r_oh * cos(-half), self.r_oh * sin(-half), 0.0],
            ]
        )

    def z_oxygen(self, s):
        s = np.asarray(s, dtype=float)
        return (8.0 - self.n_o) + self.n_o * (1.0 + self.alpha_o * s) * np.exp(-2.0 * self.alpha_o * s)

    def z_hydrogen(self, s):
        s = np.asarray(s, dtype=float)
        return (1.0 - self.n_h) + self.n_h * (1.0 + self.alpha_h * s) * np.exp(-2.0 * self.alpha_h * s)


def water_asymptotic_charge(params: WaterPotentialParams) -> float:
    """Net charge seen at infinity: lim r -> inf of -r V(r)."""
    return float(params.z_oxygen(1e3 / params.alpha_o) + 2.0 * params.z_hydrogen(1e3 / params.alpha_h))


def water_potential(params: WaterPotentialParams, r, theta, phi):
    """V(r, theta, phi) of the three-center model (vectorized over angles/radii).

    Raises SingularPointError if a sample coincides with a hydrogen nucleus
    (the oxygen singularity at r = 0 is the caller's to avoid).
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    xyz = np.stack(
        np.broadcast_arrays(r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)), axis=-1
    )
    sites = params.hydrogen_sites()
    d1 = np.linalg.norm(xyz - sites[0], axis=-1)
    d2 = np.linalg.norm(xyz - sites[1], axis=-1)
    r_o = np.broadcast_to(np.abs(r), d1.shape)
    if np.any(d1 < 1e-12) or np.any(d2 < 1e-12):
        raise SingularPointError("water potential evaluated exactly at a hydrogen nucleus")
    out = -params.z_oxygen(r_o) / r_o - params.z_hydrogen(d1) / d1 - params.z_hydrogen(d2) / d2
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class DcField:
    """Static field along +z: potential term -F0 r cos(theta) (-F0 x in 1D)."""

    f0: float

    def __post_init__(self) -> None:
        if self.f0 < 0:
            raise ValueError("field strength must be >= 0")


@dataclass(frozen=True)
class BarrierCrossing:
    """Critical field where the interpolated level meets the barrier top."""

    f_crit: float
    barrier_height: float
    r_star: float


def _barrier_top(v_of_r, f0: float) -> tuple[float, float]:
    """(r*, H) maximizing V(r) - f0 r on the downhill ray."""
    upper = 10.0 / sqrt(f0)
    res = minimize_scalar(
        lambda r: -(v_of_r(r) - f0 * r), bounds=(1e-6, upper), method="bounded",
        options={"xatol": 1e-12},
    )
    r_star = float(res.x)
    return r_star, float(v_of_r(r_star) - f0 * r_star)


def barrier_and_fcrit(v_of_r, f0_values, re_e_values) -> BarrierCrossing:
    """Field strength at which Re E crosses the field-suppressed barrier top.

    v_of_r is the field-free potential along the theta = 0 ray (e.g. a
    CentralCoulomb value, or the -1.027/r water tail).  Re E(F0) is
    interpolated monotone-cubically over the provided scan; the crossing of
    Re E(F0) = max_r [V(r) - F0 r] is bracketed and solved for F0.
    """
    f0_values = np.asarray(f0_values, dtype=float)
    re_e_values = np.asarray(re_e_values, dtype=float)
    if len(f0_values) < 3:
        raise ValueError("need at least 3 scan points to interpolate Re E(F0)")
    if not np.all(np.diff(f0_values) > 0):
        raise ValueError("field values must be strictly increasing")
    interp = PchipInterpolator(f0_values, re_e_values)

    def gap(f0: float) -> float:
        _, height = _barrier_top(v_of_r, f0)
        return float(interp(f0)) - height

    gaps = np.array([gap(f) for f in f0_values])
    sign_change = np.nonzero(np.diff(np.sign(gaps)) != 0)[0]
    if len(sign_change) == 0:
        raise ValueError(
            "no barrier crossing bracketed by the scan; gap signs were "
            + np.array2string(np.sign(gaps), separator=",")
        )
    k = int(sign_change[0])
    f_crit = brentq(gap, f0_values[k], f0_values[k + 1], xtol=1e-12)
    r_star, height = _barrier_top(v_of_r, f_crit)
    return BarrierCrossing(float(f_crit), height, r_star)
