"""Assembly of complex Hamiltonian/overlap matrices over the FEM x channel basis.

Matrix elements are radial Chebyshev integrals times angular factors.  All
complex structure enters through the scaling path: each element lies wholly
inside or wholly outside the scaling radius, so its Jacobian is a constant
(1 or e^{i xi}), the kinetic term picks up e^{-i xi} from the two
first-derivative transforms, and local potentials are analytically continued
through r -> r tilde.  Basis functions stay real throughout, which makes H
and S complex symmetric by construction.

The assembled system keeps the static and field parts of H separate
(H = H_static + F0 * H_field) so time propagation can rescale the field
without reassembly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import quadrature as quadr
from .angular import Channel, SphereQuadrature, cos_theta_bracket, spherical_harmonic
from .basis import BasisSpec, DofMap, ElementGrid, ScalingPath, basis_values_on_element, build_dof_map
from .potentials import (
    CentralCoulomb,
    SingularPointError,
    WaterPotentialParams,
    water_potential,
)

__all__ = [
    "AssembledSystem",
    "ConfigurationError",
    "assemble_1d",
    "assemble_central",
    "assemble_water",
    "radial_matrix_element",
    "gram_matrix",
    "dump_matrix_triplets",
]

_BREAKPOINT_TOL = 1e-9
_NUCLEUS_CLEARANCE = 1e-8


class ConfigurationError(ValueError):
    """Raised for grid/path combinations the assembler cannot honour."""


@dataclass
class AssembledSystem:
    """Hamiltonian pencil over the global dof map, plus everything needed to
    re-derive expectation-value (no-Jacobian) Gram matrices."""

    h_static: sp.csr_matrix
    h_field: sp.csr_matrix  # coefficient of F0 in H
    s: sp.csr_matrix
    f0: float
    grid: ElementGrid
    spec: BasisSpec
    path: ScalingPath
    channels: list[Channel]
    dof_map: DofMap
    meta: dict = field(default_factory=dict)

    @property
    def h(self) -> sp.csr_matrix:
        return (self.h_static + self.f0 * self.h_field).tocsr()

    @property
    def size(self) -> int:
        return self.dof_map.total

    def h_dense(self) -> np.ndarray:
        return self.h.toarray()

    def s_dense(self) -> np.ndarray:
        return self.s.toarray()


class _ElementGeometry:
    """Per-element scaling data: constant Jacobian and the coordinate map."""

    def __init__(self, i: int, a: float, b: float, region: str, path: ScalingPath,
                 right_edge: float, left_edge: float | None):
        self.i, self.a, self.b, self.region = i, a, b, region
        if region == "inside":
            self.jac: complex = 1.0 + 0.0j
            self.map: Callable[[np.ndarray], np.ndarray] = lambda r: r.astype(complex)
        elif region == "right":
            e = path.phase
            self.jac = e
            self.map = lambda r, e=e, r0=right_edge: e * (r - r0) + r0
        else:  # left (1D two-sided)
            e = path.phase
            self.jac = e
            self.map = lambda r, e=e, r0=left_edge: e * (r - r0) + r0


def _element_geometries(
    grid: ElementGrid, path: ScalingPath
) -> tuple[list[_ElementGeometry], float, float | None]:
    """Classify elements against the (snapped) scaling boundaries.

    The right boundary is snapped to the nearest breakpoint; for two-sided
    paths the mirror point -r0 is snapped independently (possibly onto
    x_min, which leaves no scaled region on that side).
    """
    right = grid.nearest_breakpoint(path.r0)
    left = None
    if path.two_sided and grid.x_min < -abs(right):
        left = grid.nearest_breakpoint(-path.r0)
    geoms = []
    for i in range(grid.n_elements):
        a, b = grid.element(i)
        mid = 0.5 * (a + b)
        if mid > right:
            if a < right - _BREAKPOINT_TOL:
                raise ConfigurationError(
                    f"element [{a}, {b}] straddles the scaling radius {right}"
                )
            geoms.append(_ElementGeometry(i, a, b, "right", path, right, left))
        elif left is not None and mid < left:
            if b > left + _BREAKPOINT_TOL:
                raise ConfigurationError(
                    f"element [{a}, {b}] straddles the mirror scaling point {left}"
                )
            geoms.append(_ElementGeometry(i, a, b, "left", path, right, left))
        else:
            geoms.append(_ElementGeometry(i, a, b, "inside", path, right, left))
    return geoms, right, left


def _element_kind_integrals(
    grid: ElementGrid,
    spec: BasisSpec,
    geom: _ElementGeometry,
    weight_fn: Callable[[np.ndarray], np.ndarray] | None,
    rule: quadr.QuadratureRule,
    derivative: bool = False,
    include_jacobian: bool = True,
    panels: tuple[float, ...] | None = None,
) -> np.ndarray:
    """(order x order) matrix of integrals f_m [w] f_m' over one element.

    weight_fn receives the real abscissas and may return complex values
    (continued potentials); None means weight 1.  Derivative integrals
    contract the two basis derivatives.  ``panels`` optionally splits the
    integration at interior points where the weight has reduced smoothness.
    """
    i = geom.i
    edges = [geom.a, *(panels or ()), geom.b]
    out = np.zeros((spec.order, spec.order), dtype=complex)

    def make_sampler():
        def sample(x: np.ndarray) -> np.ndarray:
            f = basis_values_on_element(grid, spec, i, x, derivative=derivative)
            w = 1.0 if weight_fn is None else weight_fn(x)
            return f[:, None, :] * f[None, :, :] * w

        return sample

    for a, b in zip(edges[:-1], edges[1:]):
        out += quadr.batch_integrate(make_sampler(), a, b, rule)
    if include_jacobian:
        jac = geom.jac
        if derivative:
            jac = 1.0 / jac  # e^{i xi} Jacobian against two e^{-i xi} derivative factors
        out = out * jac
    return out


_SMOOTH_RULE = quadr.QuadratureRule(singularity_offset=0.0)
_SINGULAR_RULE = quadr.QuadratureRule()


def radial_matrix_element(
    grid: ElementGrid,
    spec: BasisSpec,
    path: ScalingPath,
    i: int,
    kind: str,
    m: int,
    m_prime: int,
    custom_weight: Callable[[np.ndarray], np.ndarray] | None = None,
) -> complex:
    """Single scaled radial integral over element i.

    kind is one of overlap, ke, r, 1/r, 1/r^2, custom; the Jacobian for the
    element's region is included, and ke carries the net e^{-i xi} of the
    symmetric first-derivative form.
    """
    geoms, _, _ = _element_geometries(grid, path)
    geom = geoms[i]
    if kind == "overlap":
        mat = _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE)
    elif kind == "ke":
        mat = _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE, derivative=True)
        mat = 0.5 * mat
    elif kind == "r":
        mat = _element_kind_integrals(grid, spec, geom, lambda x: geom.map(x), _SMOOTH_RULE)
    elif kind == "1/r":
        mat = _element_kind_integrals(grid, spec, geom, lambda x: 1.0 / geom.map(x), _SINGULAR_RULE)
    elif kind == "1/r^2":
        mat = _element_kind_integrals(grid, spec, geom, lambda x: geom.map(x) ** -2.0, _SINGULAR_RULE)
    elif kind == "custom":
        mat = _element_kind_integrals(grid, spec, geom, custom_weight, _SINGULAR_RULE)
    else:
        raise ValueError(f"unknown radial matrix element kind {kind!r}")
    return complex(mat[m - 1, m_prime - 1])


class _GlobalAccumulator:
    """COO staging of channel-pair element blocks into the global matrices."""

    def __init__(self, dof_map: DofMap, n_matrices: int):
        self.dof_map = dof_map
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[list[np.ndarray]] = [[] for _ in range(n_matrices)]

    def add(self, i: int, ci: int, cj: int, blocks: list[np.ndarray | None]) -> None:
        orders, rows = self.dof_map.element_slots(i, ci)
        _, cols = self.dof_map.element_slots(i, cj)
        sel = orders - 1
        rr, cc = np.meshgrid(rows, cols, indexing="ij")
        self.rows.append(rr.ravel())
        self.cols.append(cc.ravel())
        for k, block in enumerate(blocks):
            if block is None:
                self.vals[k].append(np.zeros(rr.size, dtype=complex))
            else:
                self.vals[k].append(block[np.ix_(sel, sel)].ravel())

    def matrices(self) -> list[sp.csr_matrix]:
        n = self.dof_map.total
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        out = []
        for vals in self.vals:
            m = sp.coo_matrix((np.concatenate(vals), (rows, cols)), shape=(n, n))
            out.append(m.tocsr())
        return out


def assemble_1d(
    grid: ElementGrid,
    spec: BasisSpec,
    path: ScalingPath,
    f0: float,
    potential=None,
) -> AssembledSystem:
    """One-channel problem on a line: model atom (default soft-core) in a DC field.

    H = (1/2) <f'|f'> / jac + <f|V_scaled|f> jac - F0 <f|x tilde|f> jac, with
    the overlap carrying the plain Jacobian.  The scaling boundaries are
    snapped to breakpoints (the mirror point may snap onto x_min, leaving
    that side unscaled).
    """
    from .potentials import SoftCore1D

    potential = potential if potential is not None else SoftCore1D()
    geoms, right_eff, left_eff = _element_geometries(grid, path)
    dof_map = build_dof_map(grid, spec, 1)
    acc = _GlobalAccumulator(dof_map, 3)  # h_static, h_field, s
    for i, geom in enumerate(geoms):
        ke = 0.5 * _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE, derivative=True)
        if geom.region == "inside":
            v_weight = lambda x, p=potential: p.value(x)
        else:
            side_path = _side_path(path, geom, right_eff, left_eff)
            v_weight = lambda x, p=potential, sp_=side_path: p.scaled_value(sp_, x)
        pe = _element_kind_integrals(grid, spec, geom, v_weight, _SINGULAR_RULE)
        dc = -_element_kind_integrals(grid, spec, geom, lambda x: geom.map(x), _SMOOTH_RULE)
        ov = _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE)
        acc.add(i, 0, 0, [ke + pe, dc, ov])
    h_static, h_field, s = acc.matrices()
    return AssembledSystem(
        h_static, h_field, s, f0, grid, spec, path, [Channel(0, 0)], dof_map,
        meta={"family": "model1d", "r0_effective": right_eff, "left_scaling_point": left_eff},
    )


def _side_path(path: ScalingPath, geom: _ElementGeometry, right_eff: float, left_eff: float | None) -> ScalingPath:
    """Effective one-sided path whose boundary matches the element's region."""
    if geom.region == "right":
        return ScalingPath(r0=right_eff, xi=path.xi, two_sided=False)
    return ScalingPath(r0=-left_eff, xi=path.xi, two_sided=True)


def assemble_central(
    grid: ElementGrid,
    spec: BasisSpec,
    path: ScalingPath,
    z: float,
    f0: float,
    channels: list[Channel],
) -> AssembledSystem:
    """Coupled-channel hydrogen-like atom: -Z/r plus centrifugal and DC terms.

    Channels are (l, n) with normalized spherical harmonics; identity-type
    terms are channel-diagonal, the field couples |l - l'| = 1 at equal n.
    The adjusted radial function must vanish at r = 0, so the basis is
    expected to suppress the left edge function.
    """
    if grid.x_min != 0.0:
        raise ConfigurationError("radial grids must start at r = 0")
    if not spec.zero_at_domain_start:
        raise ConfigurationError("radial problems require zero_at_domain_start")
    geoms, right_eff, _ = _element_geometries(grid, path)
    coulomb = CentralCoulomb(z)
    n_ch = len(channels)
    dof_map = build_dof_map(grid, spec, n_ch)
    a_cos = np.array([[cos_theta_bracket(ci, cj) for cj in channels] for ci in channels])
    acc = _GlobalAccumulator(dof_map, 3)
    for i, geom in enumerate(geoms):
        ke = 0.5 * _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE, derivative=True)
        inv_r = _element_kind_integrals(grid, spec, geom, lambda x: 1.0 / geom.map(x), _SINGULAR_RULE)
        inv_r2 = _element_kind_integrals(grid, spec, geom, lambda x: geom.map(x) ** -2.0, _SINGULAR_RULE)
        r_mat = _element_kind_integrals(grid, spec, geom, lambda x: geom.map(x), _SMOOTH_RULE)
        ov = _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE)
        for ci, chan_i in enumerate(channels):
            for cj, chan_j in enumerate(channels):
                if ci == cj:
                    lp = chan_j.l
                    static = ke - z * inv_r + 0.5 * lp * (lp + 1) * inv_r2
                    blocks = [static, a_cos[ci, cj] * -r_mat if a_cos[ci, cj] else None, ov]
                elif a_cos[ci, cj] != 0.0:
                    blocks = [None, a_cos[ci, cj] * -r_mat, None]
                else:
                    continue
                acc.add(i, ci, cj, blocks)
    h_static, h_field, s = acc.matrices()
    return AssembledSystem(
        h_static, h_field, s, f0, grid, spec, path, list(channels), dof_map,
        meta={"family": "hydrogenic", "z": z, "r0_effective": right_eff},
    )


def _check_nucleus_clearance(params: WaterPotentialParams, r_nodes: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> None:
    st = np.sin(theta)
    xyz = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
    for site in params.hydrogen_sites():
        # |r * u - site| minimized over the sampled directions u for each node
        d = np.linalg.norm(r_nodes[:, None, None] * xyz[None, :, :] - site, axis=-1)
        if d.min() < _NUCLEUS_CLEARANCE:
            raise SingularPointError(
                f"radial/angular quadrature node within {_NUCLEUS_CLEARANCE} au of a hydrogen nucleus"
            )


def assemble_water(
    grid: ElementGrid,
    spec: BasisSpec,
    path: ScalingPath,
    params: WaterPotentialParams,
    f0: float,
    l_max: int,
    sphere_quad: SphereQuadrature | None = None,
) -> AssembledSystem:
    """Effective one-electron water molecule over all (l, n) channels, l <= l_max.

    Inside the scaling radius the potential blocks come from explicit sphere
    quadrature of Y*_ln V Y_l'n' at each radial node; outside, the potential
    is the channel-diagonal Coulomb tail -1/r tilde.  Radial integration is
    split at the hydrogen-nucleus radius so no Chebyshev panel straddles the
    derivative kink there.
    """
    if grid.x_min != 0.0:
        raise ConfigurationError("radial grids must start at r = 0")
    if not spec.zero_at_domain_start:
        raise ConfigurationError("radial problems require zero_at_domain_start")
    sphere_quad = sphere_quad or SphereQuadrature()
    channels = [Channel(l, n) for l in range(l_max + 1) for n in range(-l, l + 1)]
    n_ch = len(channels)
    geoms, right_eff, _ = _element_geometries(grid, path)
    dof_map = build_dof_map(grid, spec, n_ch)
    a_cos = np.array([[cos_theta_bracket(ci, cj) for cj in channels] for ci in channels])

    theta, phi, w_ang = sphere_quad.nodes()
    y = np.array([spherical_harmonic(c.l, c.n, theta, phi) for c in channels])
    # pair weights conj(Y_c) Y_c' w, flattened over channel pairs
    pair_w = (np.conj(y)[:, None, :] * y[None, :, :]) * w_ang

    acc = _GlobalAccumulator(dof_map, 3)
    for i, geom in enumerate(geoms):
        ke = 0.5 * _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE, derivative=True)
        inv_r2 = _element_kind_integrals(grid, spec, geom, lambda x: geom.map(x) ** -2.0, _SINGULAR_RULE)
        r_mat = _element_kind_integrals(grid, spec, geom, lambda x: geom.map(x), _SMOOTH_RULE)
        ov = _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE)
        if geom.region == "inside":
            pe = _water_pe_element(grid, spec, geom, params, pair_w, theta, phi)
        else:
            inv_r = _element_kind_integrals(grid, spec, geom, lambda x: 1.0 / geom.map(x), _SINGULAR_RULE)
            pe = None  # tail handled as channel-diagonal -inv_r below
        for ci, chan_i in enumerate(channels):
            for cj, chan_j in enumerate(channels):
                static = None
                if ci == cj:
                    lp = chan_j.l
                    static = ke + 0.5 * lp * (lp + 1) * inv_r2
                    static = static + (pe[ci, cj] if pe is not None else -inv_r)
                elif pe is not None and np.any(pe[ci, cj] != 0.0):
                    static = pe[ci, cj]
                dc = a_cos[ci, cj] * -r_mat if a_cos[ci, cj] else None
                if static is None and dc is None:
                    continue
                acc.add(i, ci, cj, [static, dc, ov if ci == cj else None])
    h_static, h_field, s = acc.matrices()
    return AssembledSystem(
        h_static, h_field, s, f0, grid, spec, path, channels, dof_map,
        meta={
            "family": "water",
            "r0_effective": right_eff,
            "l_max": l_max,
            "sphere_quad": (sphere_quad.n_theta, sphere_quad.n_phi),
        },
    )


def _water_pe_element(
    grid: ElementGrid,
    spec: BasisSpec,
    geom: _ElementGeometry,
    params: WaterPotentialParams,
    pair_w: np.ndarray,
    theta: np.ndarray,
    phi: np.ndarray,
) -> np.ndarray:
    """Potential blocks (n_ch, n_ch, order, order) for one unscaled element."""
    panels = ()
    if geom.a + _BREAKPOINT_TOL < params.r_oh < geom.b - _BREAKPOINT_TOL:
        panels = (params.r_oh,)
    i = geom.i

    def sample(x: np.ndarray) -> np.ndarray:
        _check_nucleus_clearance(params, x, theta, phi)
        v = water_potential(params, x[:, None], theta[None, :], phi[None, :])
        g = np.einsum("ra,cda->rcd", v, pair_w)  # (nodes, ch, ch)
        f = basis_values_on_element(grid, spec, i, x)
        prod = f[:, None, :] * f[None, :, :]  # (order, order, nodes)
        return np.einsum("mnr,rcd->cdmnr", prod, g)

    out = np.zeros((pair_w.shape[0], pair_w.shape[1], spec.order, spec.order), dtype=complex)
    edges = [geom.a, *panels, geom.b]
    for a, b in zip(edges[:-1], edges[1:]):
        out += quadr.batch_integrate(sample, a, b, _SINGULAR_RULE)
    return out


def gram_matrix(system: AssembledSystem, r_max: float | None = None) -> sp.csr_matrix:
    """Expectation-value Gram matrix: channel-diagonal overlap with no Jacobian.

    Radial integration optionally stops at r_max (which must sit on an
    element boundary); this is the inner product behind norms, populations
    and decay fits.
    """
    grid, spec = system.grid, system.spec
    if r_max is None:
        r_max = grid.x_max
    if not grid.is_breakpoint(r_max):
        raise ConfigurationError(f"truncation radius {r_max} is not an element boundary")
    dof_map = system.dof_map
    acc = _GlobalAccumulator(dof_map, 1)
    for i in range(grid.n_elements):
        a, b = grid.element(i)
        if b > r_max + _BREAKPOINT_TOL:
            continue
        geom = _ElementGeometry(i, a, b, "inside", system.path, grid.x_max, None)
        ov = _element_kind_integrals(grid, spec, geom, None, _SMOOTH_RULE)
        for c in range(len(system.channels)):
            acc.add(i, c, c, [ov])
    (g,) = acc.matrices()
    return sp.csr_matrix(g.real.astype(float))


def dump_matrix_triplets(matrix: sp.spmatrix) -> str:
    """Textual (row, col, re, im) dump of the nonzero entries."""
    coo = matrix.tocoo()
    lines = ["row,col,re,im"]
    for r, c, v in zip(coo.row, coo.col, coo.data):
        lines.append(f"{r},{c},{v.real:.17g},{v.imag:.17g}")
    return "\n".join(lines) + "\n"
