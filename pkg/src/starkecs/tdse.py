"""Time propagation of the coupled-channel coefficients under a ramped DC field.

The matrix equation i S dc/dt = (H_static + F(t) H_field) c is integrated
with classic RK4 after factoring S once.  Observables follow the
expectation-value convention: inner products use the plain (no-Jacobian)
radial Gram matrix, optionally truncated at a radius R_cut so the
instability-prone outer region never enters norms or decay fits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla
from scipy.stats import t as student_t

from .assembly import AssembledSystem, gram_matrix
from .basis import basis_values_on_element

__all__ = [
    "FieldEnvelope",
    "Trajectory",
    "DecayFit",
    "PropagationError",
    "propagate",
    "truncated_norm",
    "l_populations",
    "fit_decay",
    "profile_slice",
]


class PropagationError(RuntimeError):
    """Divergence (non-finite norm) during time stepping."""


@dataclass(frozen=True)
class FieldEnvelope:
    """sin^2 ramp to a constant: F(t) = F0 sin^2(pi t / (2 t_on)) for t <= t_on."""

    f0: float
    t_on: float

    def __call__(self, t: float) -> float:
        if t >= self.t_on:
            return self.f0
        return self.f0 * np.sin(0.5 * np.pi * t / self.t_on) ** 2


@dataclass
class Trajectory:
    """Stored coefficient snapshots plus the system context for observables."""

    times: np.ndarray
    coefficients: np.ndarray  # (n_stored, n_dof)
    system: AssembledSystem
    envelope: FieldEnvelope
    dt: float

    def field_values(self) -> np.ndarray:
        return np.array([self.envelope(t) for t in self.times])


def propagate(
    system: AssembledSystem,
    c0: np.ndarray,
    envelope: FieldEnvelope,
    t_end: float,
    dt: float = 0.002,
    store_every: float = 0.05,
) -> Trajectory:
    """RK4 integration of dc/dt = -i S^{-1} (H_static + F(t) H_field) c.

    S is LU-factored once; each stage costs one sparse mat-vec per matrix
    plus a solve.  Snapshots are stored every ``store_every`` atomic time
    units (always including t = 0 and t_end).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    h0 = system.h_static.tocsc()
    h1 = system.h_field.tocsc()
    lu = spla.splu(system.s.tocsc())

    def rhs(t: float, c: np.ndarray) -> np.ndarray:
        f = envelope(t)
        return -1j * lu.solve(h0 @ c + f * (h1 @ c))

    n_steps = int(round(t_end / dt))
    stride = max(1, int(round(store_every / dt)))
    c = np.asarray(c0, dtype=complex).copy()
    times = [0.0]
    stored = [c.copy()]
    t = 0.0
    for step in range(1, n_steps + 1):
        k1 = rhs(t, c)
        k2 = rhs(t + 0.5 * dt, c + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, c + 0.5 * dt * k2)
        k4 = rhs(t + dt, c + dt * k3)
        c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = step * dt
        if step % stride == 0 or step == n_steps:
            if not np.all(np.isfinite(c)):
                raise PropagationError(f"non-finite coefficients at step {step} (t = {t:.3f})")
            times.append(t)
            stored.append(c.copy())
    return Trajectory(np.array(times), np.array(stored), system, envelope, dt)


def truncated_norm(trajectory: Trajectory, r_cut: float | None = None) -> np.ndarray:
    """P(t) = <psi|psi> with radial integration limited to [0, r_cut].

    Uses the no-Jacobian Gram matrix, so the result is real for any
    coefficient vector; the tiny imaginary residue is checked and dropped.
    """
    g = gram_matrix(trajectory.system, r_cut)
    vals = np.einsum("ti,ti->t", np.conj(trajectory.coefficients), trajectory.coefficients @ g.T.toarray())
    scale = np.maximum(np.abs(vals.real), 1.0)
    if np.max(np.abs(vals.imag) / scale, initial=0.0) > 1e-10:
        raise PropagationError("truncated norm acquired an imaginary part")
    return vals.real


def l_populations(trajectory: Trajectory, r_cut: float | None = None) -> dict[int, np.ndarray]:
    """Per-l probability: the l-block quadratic form of the Gram matrix."""
    g = gram_matrix(trajectory.system, r_cut).toarray()
    dpc = trajectory.system.dof_map.dofs_per_channel
    out: dict[int, np.ndarray] = {}
    for idx, chan in enumerate(trajectory.system.channels):
        sl = slice(idx * dpc, (idx + 1) * dpc)
        block = g[sl, sl]
        c = trajectory.coefficients[:, sl]
        pop = np.einsum("ti,ti->t", np.conj(c), c @ block.T).real
        out[chan.l] = out.get(chan.l, 0.0) + pop
    return out


@dataclass(frozen=True)
class DecayFit:
    """Exponential fit P(t) = A exp(-Gamma (t - t_fall)) over [t_fall, t_end]."""

    t_fall: float
    gamma: float
    amplitude: float
    gamma_interval: tuple[float, float]
    n_samples: int


def fit_decay(times: np.ndarray, norms: np.ndarray, t_fall: float, confidence: float = 0.95) -> DecayFit:
    """Least squares on ln P over the decay window, with the regression CI.

    Nonpositive samples are trimmed from the window with their neighbours to
    the right (a warning case the caller can detect from n_samples).
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    mask = times >= t_fall
    if np.count_nonzero(mask) < 10:
        raise ValueError("fit window must contain at least 10 samples")
    tw, pw = times[mask], norms[mask]
    good = pw > 0
    tw, pw = tw[good], pw[good]
    if len(tw) < 10:
        raise ValueError("fit window has fewer than 10 positive samples after trimming")
    x = tw - t_fall
    y = np.log(pw)
    n = len(x)
    (slope, intercept), cov = np.polyfit(x, y, 1, cov=True)
    gamma = -float(slope)
    se = float(np.sqrt(cov[0, 0]))
    tval = float(student_t.ppf(0.5 + 0.5 * confidence, n - 2))
    return DecayFit(
        t_fall=float(t_fall),
        gamma=gamma,
        amplitude=float(np.exp(intercept)),
        gamma_interval=(gamma - tval * se, gamma + tval * se),
        n_samples=n,
    )


def profile_slice(
    trajectory: Trajectory, step_index: int, theta: float, r_grid: np.ndarray
) -> np.ndarray:
    """|psi(r, theta)|^2 on the given radial grid for one stored snapshot."""
    from scipy.special import sph_harm_y

    system = trajectory.system
    grid, spec, dof_map = system.grid, system.spec, system.dof_map
    c = trajectory.coefficients[step_index]
    r_grid = np.asarray(r_grid, dtype=float)
    psi = np.zeros_like(r_grid, dtype=complex)
    ang = {
        idx: complex(sph_harm_y(ch.l, ch.n, theta, 0.0)) for idx, ch in enumerate(system.channels)
    }
    elem_of_r = np.clip(np.searchsorted(grid.breakpoints, r_grid, side="right") - 1, 0, grid.n_elements - 1)
    for i in range(grid.n_elements):
        sel = elem_of_r == i
        if not np.any(sel):
            continue
        vals = basis_values_on_element(grid, spec, i, r_grid[sel])  # (order, n_sel)
        orders, _ = dof_map.element_slots(i)
        for idx in range(len(system.channels)):
            _, slots = dof_map.element_slots(i, idx)
            coeffs = c[slots]
            psi[sel] += ang[idx] * (coeffs @ vals[orders - 1])
    return np.abs(psi) ** 2
