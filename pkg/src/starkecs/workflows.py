"""Orchestration of full runs: assemble, solve, track, propagate, validate.

Each workflow takes a RunConfig and returns a (ResultRecord, artifacts)
pair, where artifacts maps file names to text content (CSV tables, matrix
dumps).  The service endpoints and the CLI are thin wrappers over these
functions.
"""

from __future__ import annotations

import time

import numpy as np

from . import __version__
from .angular import Channel, SphereQuadrature, channels_up_to, legendre_triple_integral, wigner3j
from .assembly import (
    AssembledSystem,
    assemble_1d,
    assemble_central,
    assemble_water,
    dump_matrix_triplets,
    gram_matrix,
)
from .basis import BasisSpec, ElementGrid, ScalingPath
from .config import ResultRecord, RunConfig
from .potentials import (
    CentralCoulomb,
    HarmonicOscillator1D,
    SoftCore1D,
    WaterPotentialParams,
    barrier_and_fcrit,
)
from .quadrature import QuadratureRule, integrate
from .spectral import (
    SelectionError,
    gamma_to_inverse_seconds,
    scan,
    select_resonance,
    solve_auto,
    solve_generalized,
    solve_shift_invert,
)
from .tdse import FieldEnvelope, fit_decay, l_populations, propagate, profile_slice, truncated_norm

__all__ = ["run_solve", "run_scan", "run_propagate", "run_validate", "run_fcrit", "build_system"]


def _grid(cfg: RunConfig) -> ElementGrid:
    g = cfg.grid
    return ElementGrid(g.x_min, g.x_max, g.n_elements)


def _spec(cfg: RunConfig) -> BasisSpec:
    b = cfg.basis
    return BasisSpec(b.order, bool(b.zero_at_domain_start), bool(b.zero_at_domain_end))


def _path(cfg: RunConfig) -> ScalingPath:
    p = cfg.path
    return ScalingPath(p.r0, p.xi, bool(p.two_sided))


def _channels(cfg: RunConfig) -> list[Channel]:
    ch = cfg.channels
    if cfg.problem == "water":
        return channels_up_to(ch.l_max, None)
    n = ch.n if ch.n is not None else 0
    l_min = ch.l_min if ch.l_min is not None else abs(n)
    return [Channel(l, n) for l in range(max(l_min, abs(n)), ch.l_max + 1)]


def build_system(cfg: RunConfig, f0: float | None = None) -> AssembledSystem:
    """Assemble the configured problem (optionally overriding the field)."""
    cfg = cfg.effective()
    f = cfg.field.f0 if f0 is None else f0
    grid, spec, path = _grid(cfg), _spec(cfg), _path(cfg)
    if cfg.problem == "model1d":
        return assemble_1d(grid, spec, path, f, potential=SoftCore1D())
    if cfg.problem == "oscillator":
        return assemble_1d(grid, spec, path, f, potential=HarmonicOscillator1D())
    if cfg.problem == "hydrogenic":
        return assemble_central(grid, spec, path, cfg.z, f, _channels(cfg))
    w = cfg.water
    params = WaterPotentialParams(w.alpha_o, w.alpha_h, w.n_o, w.n_h, w.r_oh, w.hoh_angle)
    return assemble_water(
        grid, spec, path, params, f, cfg.channels.l_max,
        SphereQuadrature(cfg.quadrature.n_theta, cfg.quadrature.n_phi),
    )


def _eigenvalue_csv(eigenvalues: np.ndarray, selected: int | None) -> str:
    lines = ["index,re_e,im_e,gamma_au,gamma_per_sec,selected"]
    for i, e in enumerate(eigenvalues):
        g = -2.0 * e.imag
        lines.append(
            f"{i},{e.real:.15g},{e.imag:.15g},{g:.15g},{gamma_to_inverse_seconds(g):.15g},"
            f"{int(i == selected)}"
        )
    return "\n".join(lines) + "\n"


def _record(kind: str, cfg: RunConfig, t0: float, summary: dict, system: AssembledSystem | None,
            artifacts: dict[str, str], effective_cfg: RunConfig | None = None) -> ResultRecord:
    eff: dict = {"config": (effective_cfg or cfg).effective().model_dump()}
    if system is not None:
        eff["r0_effective"] = system.meta.get("r0_effective")
        eff["left_scaling_point"] = system.meta.get("left_scaling_point")
        eff["n_dof"] = system.size
    return ResultRecord(
        kind=kind,
        config=cfg,
        effective=eff,
        version=__version__,
        elapsed_seconds=time.time() - t0,
        summary=summary,
        artifacts=sorted(artifacts),
    )


def run_solve(cfg: RunConfig) -> tuple[ResultRecord, dict[str, str]]:
    """Assemble + eigensolve + resonance selection; eigenvalue table artifact."""
    t0 = time.time()
    system = build_system(cfg)
    sol = cfg.solver
    ref = sol.reference_energy
    if sol.mode == "dense":
        result = solve_generalized(system, sol.want_vectors)
    elif sol.mode == "shift_invert":
        if ref is None:
            raise ValueError("shift_invert mode needs solver.reference_energy")
        result = solve_shift_invert(system, complex(ref), k=sol.k, want_vectors=sol.want_vectors)
    else:
        result = solve_auto(system, ref, want_vectors=sol.want_vectors, k=sol.k)
    summary: dict = {
        "n_eigenvalues": int(len(result.eigenvalues)),
        "lowest": [[float(e.real), float(e.imag)] for e in result.eigenvalues[: sol.n_lowest]],
        "method": result.provenance.get("method"),
    }
    if ref is not None:
        try:
            select_resonance(result, ref, max_abs_im=sol.max_abs_im, re_window=sol.re_window)
            e = result.selected_eigenvalue
            summary["selected"] = {
                "re_e": float(e.real),
                "im_e": float(e.imag),
                "gamma_au": float(result.gamma),
                "gamma_per_sec": float(gamma_to_inverse_seconds(result.gamma)),
                "below_numerical_floor": bool(abs(e.imag) < 1e-14),
            }
        except SelectionError as exc:
            summary["selection_error"] = str(exc)
    artifacts = {"eigenvalues.csv": _eigenvalue_csv(result.eigenvalues, result.selected)}
    if cfg.dump_matrices:
        artifacts["matrix_h.csv"] = dump_matrix_triplets(system.h)
        artifacts["matrix_s.csv"] = dump_matrix_triplets(system.s)
    rec = _record("solve", cfg, t0, summary, system, artifacts)
    return rec, artifacts


def run_scan(cfg: RunConfig) -> tuple[ResultRecord, dict[str, str]]:
    """One-axis scan of the tracked resonance; CSV table artifact."""
    t0 = time.time()
    axis, values = cfg.scan.axis, list(cfg.scan.values)
    if not values:
        raise ValueError("scan.values is empty")
    sol = cfg.solver
    if sol.reference_energy is None:
        raise ValueError("scans need solver.reference_energy for tracking")

    def build(v: float) -> AssembledSystem:
        if axis == "f0":
            return build_system(cfg, f0=v)
        sub = cfg.model_copy(deep=True)
        if axis == "xi":
            sub.path.xi = v
        elif axis == "r0":
            sub.path.r0 = v
        elif axis == "basis":
            sub.basis.order = int(round(v))
        return build_system(sub)

    table = scan(
        build, axis, values, sol.reference_energy,
        max_abs_im=sol.max_abs_im, re_window=sol.re_window,
        solver=sol.mode, k=sol.k,
    )
    ok = [r for r in table.rows if r.converged]
    summary = {
        "axis": axis,
        "n_rows": len(table.rows),
        "n_converged": len(ok),
        "rows": [[float(r.axis_value), float(r.eigenvalue.real), float(r.eigenvalue.imag)] for r in ok],
    }
    artifacts = {"scan.csv": table.to_csv()}
    rec = _record("scan", cfg, t0, summary, None, artifacts)
    return rec, artifacts


def _initial_state(cfg: RunConfig, system: AssembledSystem) -> np.ndarray:
    """Field-free eigenstate nearest the reference, unit norm under the Gram matrix."""
    ref = cfg.solver.reference_energy
    if ref is None:
        raise ValueError("time propagation needs solver.reference_energy for the initial state")
    free = build_system(cfg, f0=0.0)
    res = solve_generalized(free, want_vectors=True)
    select_resonance(res, ref, max_abs_im=cfg.solver.max_abs_im or 0.01)
    c0 = res.selected_vector()
    g = gram_matrix(system)
    return c0 / np.sqrt((np.conj(c0) @ (g @ c0)).real)


def run_propagate(cfg: RunConfig) -> tuple[ResultRecord, dict[str, str]]:
    """RK4 propagation with ramped field: norms, populations, decay fit."""
    t0 = time.time()
    eff = cfg.effective()
    if eff.tdse.use_scaling and eff.path.xi > 0:
        eff.basis.zero_at_domain_end = True
    else:
        eff.path = eff.path.model_copy(update={"xi": 0.0})
    system = build_system(eff)
    c0 = _initial_state(eff, system)
    env = FieldEnvelope(eff.field.f0, eff.field.t_on)
    traj = propagate(system, c0, env, eff.tdse.t_end, eff.tdse.dt, eff.tdse.store_every)
    r_cut = eff.tdse.r_cut
    p = truncated_norm(traj, r_cut)
    p_norm = p / p[0]
    pops = l_populations(traj, r_cut)

    lines = ["t,field,truncated_norm"]
    for i, t in enumerate(traj.times):
        lines.append(f"{t:.15g},{env(t):.15g},{p_norm[i]:.15g}")
    artifacts = {"norm.csv": "\n".join(lines) + "\n"}
    ls = sorted(pops)
    lines = ["t," + ",".join(f"pop_l{l}" for l in ls)]
    for i, t in enumerate(traj.times):
        lines.append(f"{t:.15g}," + ",".join(f"{pops[l][i]:.15g}" for l in ls))
    artifacts["populations.csv"] = "\n".join(lines) + "\n"

    summary: dict = {
        "final_norm": float(p_norm[-1]),
        "norm_drift": float(np.max(np.abs(p_norm - p_norm[0]))),
    }
    if eff.tdse.profile_times:
        r_grid = np.linspace(system.grid.x_min, system.grid.x_max, 400)
        lines = ["t,r,abs_psi_sq"]
        for t_snap in eff.tdse.profile_times:
            k = int(np.searchsorted(traj.times, t_snap))
            k = min(k, len(traj.times) - 1)
            prof = profile_slice(traj, k, 0.0, r_grid)
            for r, v in zip(r_grid, prof):
                lines.append(f"{traj.times[k]:.15g},{r:.15g},{v:.15g}")
        artifacts["profile.csv"] = "\n".join(lines) + "\n"
    if r_cut is not None and eff.tdse.t_fall < eff.tdse.t_end:
        try:
            fit = fit_decay(traj.times, p_norm, eff.tdse.t_fall)
            sweep = []
            for tf in np.linspace(
                eff.tdse.t_fall - eff.tdse.t_fall_sweep, eff.tdse.t_fall + eff.tdse.t_fall_sweep, 5
            ):
                if eff.field.t_on < tf < eff.tdse.t_end - 2.0:
                    try:
                        f2 = fit_decay(traj.times, p_norm, float(tf))
                        sweep.append([float(tf), f2.gamma])
                    except ValueError:
                        continue
            summary["decay_fit"] = {
                "t_fall": fit.t_fall,
                "gamma_au": fit.gamma,
                "gamma_interval": list(fit.gamma_interval),
                "amplitude": fit.amplitude,
                "t_fall_sweep": sweep,
            }
        except ValueError as exc:
            summary["decay_fit_error"] = str(exc)
    rec = _record("propagate", cfg, t0, summary, system, artifacts, effective_cfg=eff)
    return rec, artifacts


def run_fcrit(cfg: RunConfig) -> tuple[ResultRecord, dict[str, str]]:
    """Field scan of Re E against the barrier top: critical field extraction."""
    t0 = time.time()
    rec_scan, artifacts = run_scan(cfg)
    rows = rec_scan.summary["rows"]
    if len(rows) < 3:
        raise ValueError("fcrit needs at least 3 converged scan rows")
    f0s = np.array([r[0] for r in rows])
    re_e = np.array([r[1] for r in rows])
    if cfg.problem == "hydrogenic":
        v_of_r = CentralCoulomb(cfg.z).value
    elif cfg.problem == "water":
        from .potentials import water_asymptotic_charge

        w = cfg.water
        q = water_asymptotic_charge(WaterPotentialParams(w.alpha_o, w.alpha_h, w.n_o, w.n_h, w.r_oh, w.hoh_angle))
        v_of_r = CentralCoulomb(q).value
    else:
        v_of_r = SoftCore1D().value
    crossing = barrier_and_fcrit(v_of_r, f0s, re_e)
    summary = dict(rec_scan.summary)
    summary["f_crit"] = crossing.f_crit
    summary["barrier_height"] = crossing.barrier_height
    summary["r_star"] = crossing.r_star
    artifacts["fcrit.csv"] = (
        "f_crit,barrier_height,r_star\n"
        f"{crossing.f_crit:.15g},{crossing.barrier_height:.15g},{crossing.r_star:.15g}\n"
    )
    rec = _record("fcrit", cfg, t0, summary, None, artifacts)
    return rec, artifacts


def run_validate(seed: int = 0, inject_dc_sign_error: bool = False) -> tuple[ResultRecord, dict[str, str]]:
    """Built-in verification battery with per-check tolerances.

    inject_dc_sign_error flips the sign of the upper-triangle field blocks of
    a test system before the symmetry check; the resulting failure is the
    mutation test showing the battery has teeth.
    """
    t0 = time.time()
    rng = np.random.default_rng(seed)
    checks: list[dict] = []

    def add(name: str, tolerance: float, measured: float) -> None:
        checks.append(
            {"name": name, "tolerance": tolerance, "measured": float(measured),
             "passed": bool(measured <= tolerance)}
        )

    # oscillator spectrum
    grid = ElementGrid(-10.0, 10.0, 40)
    sys_ = assemble_1d(grid, BasisSpec(8), ScalingPath(9.5, 0.0), 0.0, potential=HarmonicOscillator1D())
    w = solve_generalized(sys_).eigenvalues[:3].real
    add("oscillator-spectrum", 1e-8, float(np.max(np.abs(w - np.array([0.5, 1.5, 2.5])))))

    # quadrature polynomial exactness
    rule = QuadratureRule(64, 0.0)
    worst = 0.0
    for _ in range(50):
        a, b = np.sort(rng.uniform(-10, 10, 2))
        if b - a < 1e-2:
            continue
        d = int(rng.integers(0, 31))
        exact = (b ** (d + 1) - a ** (d + 1)) / (d + 1)
        got = integrate(lambda x, d=d: x ** float(d), a, b, rule)
        worst = max(worst, abs(got - exact) / max(abs(exact), 1e-300))
    add("quadrature-polynomial-exactness", 1e-12, worst)

    # 3j orthogonality
    worst = 0.0
    for l1 in range(4):
        for l2 in range(4):
            for l3 in range(abs(l1 - l2), min(l1 + l2, 6) + 1):
                for m3 in range(-l3, l3 + 1):
                    s = sum(
                        (2 * l3 + 1) * wigner3j(l1, l2, l3, m1, -m1 - m3, m3) ** 2
                        for m1 in range(-l1, l1 + 1)
                        if abs(m1 + m3) <= l2
                    )
                    worst = max(worst, abs(s - 1.0))
    add("wigner3j-orthogonality", 1e-12, worst)

    # Hermitian limit + complex symmetry of a hydrogen assembly
    grid_r = ElementGrid(0.0, 30.0, 30)
    spec_r = BasisSpec(5, zero_at_domain_start=True)
    sys0 = assemble_central(grid_r, spec_r, ScalingPath(10.0, 0.0), 1.0, 0.02, channels_up_to(2, 0))
    h0 = sys0.h
    if inject_dc_sign_error:
        import scipy.sparse as sp

        upper = sp.triu(sys0.h_field, k=1)
        h0 = (sys0.h_static + 0.02 * (sys0.h_field - 2 * upper)).tocsr()
    asym = np.abs((h0 - h0.T).toarray()).max()
    add("hermitian-limit-symmetry", 1e-12, float(asym))
    w0 = solve_generalized(sys0).eigenvalues
    add("hermitian-limit-real-spectrum", 1e-8, float(np.abs(w0.imag).max()))
    sys1 = assemble_central(grid_r, spec_r, ScalingPath(10.0, 0.5), 1.0, 0.02, channels_up_to(2, 0))
    add("complex-symmetry", 1e-12, float(np.abs((sys1.h - sys1.h.T).toarray()).max()))
    add("overlap-complex-symmetry", 1e-12, float(np.abs((sys1.s - sys1.s.T).toarray()).max()))

    # legendre triple integral vs quadrature-free identities
    add("legendre-triple-000", 1e-12, abs(legendre_triple_integral(0, 0, 0) - 4 * np.pi))

    passed = all(c["passed"] for c in checks)
    lines = ["check,tolerance,measured,passed"]
    for c in checks:
        lines.append(f"{c['name']},{c['tolerance']:.3g},{c['measured']:.6g},{int(c['passed'])}")
    artifacts = {"validate.csv": "\n".join(lines) + "\n"}
    rec = ResultRecord(
        kind="validate",
        config=RunConfig(),
        version=__version__,
        elapsed_seconds=time.time() - t0,
        summary={"all_passed": passed, "checks": checks, "seed": seed},
        artifacts=sorted(artifacts),
    )
    return rec, artifacts
