"""Eigensolvers, resonance selection and scans."""

import numpy as np
import pytest
import scipy.sparse as sp

from starkecs.angular import channels_up_to
from starkecs.assembly import AssembledSystem, assemble_1d, assemble_central
from starkecs.basis import BasisSpec, ElementGrid, ScalingPath, build_dof_map
from starkecs.spectral import (
    ScanTable,
    SelectionError,
    SpectralResult,
    gamma_to_inverse_seconds,
    scan,
    select_resonance,
    solve_generalized,
    solve_shift_invert,
)


def _toy_system(h, s):
    n = h.shape[0]
    grid = ElementGrid(0.0, 1.0, 1)
    spec = BasisSpec(order=3)
    return AssembledSystem(
        sp.csr_matrix(h), sp.csr_matrix(np.zeros_like(h)), sp.csr_matrix(s), 0.0,
        grid, spec, ScalingPath(0.5, 0.0), [], build_dof_map(grid, spec),
    )


def test_two_by_two_flip():
    h = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    res = solve_generalized(_toy_system(h, np.eye(2, dtype=complex)))
    assert np.allclose(res.eigenvalues, [-1.0, 1.0], atol=1e-14)


def test_random_pencil_against_inverse_iteration_oracle():
    rng = np.random.default_rng(17)
    a = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    h = a + a.T
    b = 0.05 * (rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20)))
    s = np.eye(20, dtype=complex) + b + b.T
    res = solve_generalized(_toy_system(h, s))

    def inverse_iteration(sigma):
        # fixed-shift iteration: converges to the eigenpair nearest sigma;
        # the unconjugated quotient suits the complex-symmetric pencil
        v = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        for _ in range(400):
            v = np.linalg.solve(h - sigma * s, s @ v)
            v /= np.linalg.norm(v)
        return (v @ (h @ v)) / (v @ (s @ v))

    for idx in (2, 9, 15):
        target = res.eigenvalues[idx]
        lam = inverse_iteration(target + 0.01 + 0.005j)
        nearest = res.eigenvalues[np.argmin(np.abs(res.eigenvalues - lam))]
        assert abs(lam - nearest) < 1e-9


def test_eigenpair_residuals():
    rng = np.random.default_rng(23)
    a = rng.standard_normal((15, 15)) + 1j * rng.standard_normal((15, 15))
    h = a + a.T
    b = 0.05 * rng.standard_normal((15, 15))
    s = np.eye(15, dtype=complex) + b + b.T
    res = solve_generalized(_toy_system(h, s), want_vectors=True)
    for j in range(15):
        v = res.eigenvectors[:, j]
        r = np.linalg.norm(h @ v - res.eigenvalues[j] * (s @ v)) / np.linalg.norm(v)
        assert r < 1e-8


def test_shift_invert_agrees_with_dense():
    grid = ElementGrid(-10.0, 100.0, 100)
    sys_ = assemble_1d(grid, BasisSpec(order=6), ScalingPath(9.8, 0.5, True), 0.11)
    dense = solve_generalized(sys_)
    si = solve_shift_invert(sys_, -0.713 - 0.006j, k=6)
    sel_d = select_resonance(dense, -0.713, max_abs_im=0.05)
    sel_s = select_resonance(si, -0.713, max_abs_im=0.05)
    assert abs(dense.eigenvalues[sel_d] - si.eigenvalues[sel_s]) < 1e-10


def test_selection_rules_on_synthetic_spectrum():
    w = np.array([-0.9 - 0.4j, -0.62 - 0.01j, -0.5 - 1e-12j, -0.45 - 0.002j, -0.3 + 0.2j])
    res = SpectralResult(w)
    # nearest to the reference among admissible states
    assert select_resonance(res, -0.5) == 2
    # anti-resonances (positive imaginary part) are never admissible
    assert select_resonance(res, -0.29) == 3
    # imaginary cap and window narrow the candidate set
    assert select_resonance(res, -0.7, max_abs_im=0.05) == 1
    assert select_resonance(res, -0.5, re_window=(-0.48, -0.40)) == 3
    with pytest.raises(SelectionError, match="nearest rejected"):
        select_resonance(res, -0.5, re_window=(-0.2, -0.1))


def test_selection_tie_breaks_toward_smaller_width():
    w = np.array([-0.5 - 0.03j, -0.5 - 1e-9j])
    res = SpectralResult(w)
    assert select_resonance(res, -0.5) == 1


def test_bound_state_has_no_width():
    grid = ElementGrid(0.0, 40.0, 40)
    spec = BasisSpec(order=6, zero_at_domain_start=True)
    sys_ = assemble_central(grid, spec, ScalingPath(10.0, 0.5), 1.0, 0.0, channels_up_to(1, 0))
    res = solve_generalized(sys_)
    sel = select_resonance(res, -0.5, max_abs_im=0.01)
    assert res.eigenvalues[sel].real == pytest.approx(-0.5, abs=1e-8)
    assert abs(res.gamma) < 1e-10


def test_xi_scan_invariance_of_model_resonance():
    base = dict(grid=ElementGrid(-10.0, 100.0, 100), spec=BasisSpec(order=9))

    def build(xi):
        return assemble_1d(base["grid"], base["spec"], ScalingPath(9.8, xi, True), 0.11)

    table = scan(build, "xi", [0.5, 1.0, np.pi / 2], -0.713, max_abs_im=0.05,
                 solver="shift_invert", k=8)
    assert all(r.converged for r in table.rows)
    es = np.array([r.eigenvalue for r in table.rows])
    assert np.abs(es.real - es.real[0]).max() < 1e-10
    assert np.abs(es.imag - es.imag[0]).max() < 1e-10


def test_r0_scan_stability():
    grid = ElementGrid(0.0, 100.0, 100)
    spec = BasisSpec(order=5, zero_at_domain_start=True)
    chans = channels_up_to(4, 0)

    def build(r0):
        return assemble_central(grid, spec, ScalingPath(r0, 0.5), 1.0, 0.1, chans)

    table = scan(build, "r0", [8.0, 9.0, 10.0, 11.0, 12.0], -0.527, max_abs_im=0.05,
                 solver="shift_invert", k=8)
    es = np.array([r.eigenvalue for r in table.rows])
    assert np.abs(es.real - es.real.mean()).max() < 1e-8
    assert np.abs(es.imag - es.imag.mean()).max() < 1e-8


def test_field_scan_tracks_adiabatically_with_growing_width():
    grid = ElementGrid(0.0, 100.0, 100)
    spec = BasisSpec(order=7, zero_at_domain_start=True)
    chans = channels_up_to(5, 1)

    def build(f0):
        return assemble_central(grid, spec, ScalingPath(10.0, 0.5), 2.0, f0, chans)

    values = [0.03, 0.04, 0.05, 0.06, 0.07]
    table = scan(build, "f0", values, -0.5046, max_abs_im=0.05, solver="shift_invert", k=8)
    assert all(r.converged for r in table.rows)
    gammas = [r.gamma for r in table.rows]
    assert all(g2 > g1 >= -1e-10 for g1, g2 in zip(gammas, gammas[1:]))
    # adiabatic tracking follows the falling level
    res = [r.eigenvalue.real for r in table.rows]
    assert all(b < a for a, b in zip(res, res[1:]))


def test_scan_flags_failed_rows_and_continues():
    def build(v):
        grid = ElementGrid(0.0, 20.0, 10)
        spec = BasisSpec(order=4, zero_at_domain_start=True)
        return assemble_central(grid, spec, ScalingPath(10.0, 0.0), 1.0, 0.0, channels_up_to(1, 0))

    table = scan(build, "xi", [0.1, 0.2], reference_energy=-0.5, re_window=(5.0, 6.0))
    assert all(not r.converged for r in table.rows)
    assert len(table.rows) == 2
    assert "nearest rejected" in table.rows[0].note


def test_scan_csv_format():
    t = ScanTable("xi", [])
    assert t.to_csv().startswith("axis_value,re_e,im_e,gamma_au,gamma_per_sec,converged")


def test_gamma_unit_conversion():
    assert gamma_to_inverse_seconds(0.0) == 0.0
    assert gamma_to_inverse_seconds(1.0) == pytest.approx(4.134e16, rel=1e-12)
    assert gamma_to_inverse_seconds(0.0146) == pytest.approx(6.03564e14, rel=1e-6)
