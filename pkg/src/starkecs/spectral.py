"""Generalized eigensolvers, resonance selection and parameter scans.

The pencil H c = E S c is complex symmetric under scaling.  Small systems go
through the dense QZ decomposition for the full spectrum; large ones use a
shift-invert Arnoldi pass around a reference energy, which is how the
minutes-scale 3D runs stay interactive.  Resonances are tracked by real-part
proximity to a reference with an imaginary-part admissibility cut, and field
scans update the reference adiabatically row by row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .assembly import AssembledSystem

__all__ = [
    "SpectralResult",
    "ScanTable",
    "SelectionError",
    "SolverError",
    "solve_generalized",
    "solve_shift_invert",
    "solve_auto",
    "select_resonance",
    "scan",
    "gamma_to_inverse_seconds",
]

INVERSE_ATOMIC_TIME = 4.134e16  # 1/s per atomic unit of energy width
_IM_NOISE = 1e-8
_DENSE_LIMIT = 1200


class SelectionError(LookupError):
    """No admissible eigenvalue in the requested window."""


class SolverError(RuntimeError):
    """Factorization or convergence failure in an eigensolve."""


@dataclass
class SpectralResult:
    """Eigenvalues (sorted by real part) and the tracked resonance, if selected."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    selected: int | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def selected_eigenvalue(self) -> complex:
        if self.selected is None:
            raise SelectionError("no resonance has been selected")
        return complex(self.eigenvalues[self.selected])

    @property
    def e_r(self) -> float:
        return self.selected_eigenvalue.real

    @property
    def gamma(self) -> float:
        """Width Gamma = -2 Im E of the selected state (raw, may be tiny negative)."""
        return -2.0 * self.selected_eigenvalue.imag

    def selected_vector(self) -> np.ndarray:
        if self.selected is None or self.eigenvectors is None:
            raise SelectionError("no selected eigenvector available")
        return self.eigenvectors[:, self.selected]


def gamma_to_inverse_seconds(gamma: float) -> float:
    """Decay width in atomic units -> decay rate in 1/s."""
    return gamma * INVERSE_ATOMIC_TIME


def _sorted_result(w: np.ndarray, v: np.ndarray | None, provenance: dict) -> SpectralResult:
    order = np.argsort(w.real, kind="stable")
    w = w[order]
    if v is not None:
        v = v[:, order]
    return SpectralResult(w, v, provenance=provenance)


def solve_generalized(system: AssembledSystem, want_vectors: bool = False) -> SpectralResult:
    """Full spectrum of H c = E S c by dense QZ (real-symmetric fast path at xi = 0)."""
    h = system.h_dense()
    s = system.s_dense()
    hermitian = (
        np.abs(h.imag).max(initial=0.0) < 1e-13 and np.abs(s.imag).max(initial=0.0) < 1e-13
    )
    try:
        if hermitian:
            if want_vectors:
                w, v = sla.eigh(h.real, s.real)
            else:
                w, v = sla.eigh(h.real, s.real, eigvals_only=True).astype(complex), None
            w = np.asarray(w, dtype=complex)
        elif want_vectors:
            w, v = sla.eig(h, s)
        else:
            w, v = sla.eig(h, s, right=False), None
    except (sla.LinAlgError, ValueError) as exc:
        raise SolverError(f"dense QZ factorization failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        cond = np.linalg.cond(s)
        raise SolverError(f"non-finite eigenvalues from QZ; cond(S) ~ {cond:.3e}")
    return _sorted_result(w, v, {"method": "dense-qz", "size": system.size})


def solve_shift_invert(
    system: AssembledSystem,
    sigma: complex,
    k: int = 12,
    want_vectors: bool = False,
) -> SpectralResult:
    """k eigenvalues nearest sigma via sparse LU + Arnoldi on (H - sigma S)^-1 S."""
    h = system.h.tocsc()
    s = system.s.tocsc()
    try:
        lu = spla.splu((h - sigma * s).tocsc())
    except RuntimeError as exc:
        raise SolverError(f"sparse LU at shift {sigma} failed: {exc}") from exc
    op = spla.LinearOperator(h.shape, matvec=lambda x: lu.solve(s @ x), dtype=complex)
    k = min(k, h.shape[0] - 2)
    v0 = np.full(h.shape[0], 1.0 / np.sqrt(h.shape[0]), dtype=complex)  # deterministic start
    try:
        mu, vecs = spla.eigs(op, k=k, which="LM", v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise SolverError(f"Arnoldi did not converge at shift {sigma}: {exc}") from exc
    w = sigma + 1.0 / mu
    v = None
    if want_vectors:
        v = vecs
        # refine by normalizing residual vectors against S
        for j in range(v.shape[1]):
            nrm = np.sqrt(abs(v[:, j].conj() @ (s @ v[:, j])))
            if nrm > 0:
                v[:, j] /= nrm
    return _sorted_result(w, v, {"method": "shift-invert", "sigma": sigma, "k": k, "size": system.size})


def solve_auto(
    system: AssembledSystem,
    reference_energy: float | None = None,
    want_vectors: bool = False,
    k: int = 16,
) -> SpectralResult:
    """Dense solve for small systems, shift-invert near the reference for large ones."""
    if system.size <= _DENSE_LIMIT or reference_energy is None:
        return solve_generalized(system, want_vectors)
    return solve_shift_invert(system, complex(reference_energy), k=k, want_vectors=want_vectors)


def select_resonance(
    result: SpectralResult,
    reference_energy: float,
    max_abs_im: float | None = None,
    re_window: tuple[float, float] | None = None,
) -> int:
    """Pick the tracked state: nearest Re E to the reference among admissible ones.

    Admissible states have Im E below the noise ceiling (resonances live in
    the lower half plane), optionally bounded |Im E| and a real-part window.
    Ties break toward the smaller |Im E|.
    """
    w = result.eigenvalues
    if len(w) == 0:
        raise SelectionError("empty spectrum")
    ok = w.imag <= _IM_NOISE
    if max_abs_im is not None:
        ok &= np.abs(w.imag) <= max_abs_im
    if re_window is not None:
        lo, hi = re_window
        ok &= (w.real >= lo) & (w.real <= hi)
    if not np.any(ok):
        nearest = w[np.argsort(np.abs(w.real - reference_energy))[:5]]
        raise SelectionError(
            f"no admissible eigenvalue near {reference_energy}; nearest rejected: "
            + np.array2string(nearest, precision=6)
        )
    idx = np.nonzero(ok)[0]
    cand = w[idx]
    dist = np.abs(cand.real - reference_energy)
    best = dist.min()
    tied = idx[np.abs(dist - best) <= 1e-14]
    sel = tied[np.argmin(np.abs(w[tied].imag))]
    result.selected = int(sel)
    return int(sel)


@dataclass
class ScanRow:
    axis_value: float
    eigenvalue: complex
    gamma: float
    converged: bool
    note: str = ""


@dataclass
class ScanTable:
    """Rows of a one-axis parameter scan of the tracked resonance."""

    axis: str
    rows: list[ScanRow]

    def to_csv(self) -> str:
        lines = ["axis_value,re_e,im_e,gamma_au,gamma_per_sec,converged"]
        for r in self.rows:
            lines.append(
                f"{r.axis_value:.15g},{r.eigenvalue.real:.15g},{r.eigenvalue.imag:.15g},"
                f"{r.gamma:.15g},{gamma_to_inverse_seconds(r.gamma):.15g},{int(r.converged)}"
            )
        return "\n".join(lines) + "\n"


def scan(
    build_system,
    axis: str,
    values: Sequence[float],
    reference_energy: float,
    max_abs_im: float | None = None,
    re_window: tuple[float, float] | None = None,
    solver: str = "auto",
    k: int = 16,
) -> ScanTable:
    """Track the resonance across axis values.

    build_system(value) assembles the system for one row.  Field scans update
    the selection reference to the previous row's Re E (adiabatic tracking);
    other axes keep it fixed.  Failed rows are flagged and the scan continues.
    """
    if not np.all(np.diff(values) != 0.0):
        raise ValueError("scan values must be distinct and monotone")
    rows: list[ScanRow] = []
    ref = reference_energy
    for val in values:
        try:
            system = build_system(val)
            if solver == "dense":
                res = solve_generalized(system)
            elif solver == "shift_invert":
                res = solve_shift_invert(system, complex(ref), k=k)
            else:
                res = solve_auto(system, ref, k=k)
            sel = select_resonance(res, ref, max_abs_im=max_abs_im, re_window=re_window)
            e = complex(res.eigenvalues[sel])
            rows.append(ScanRow(float(val), e, -2.0 * e.imag, True))
            if axis.lower() in ("f0", "field"):
                ref = e.real
        except (SelectionError, SolverError) as exc:
            rows.append(ScanRow(float(val), complex(np.nan, np.nan), float("nan"), False, str(exc)))
    return ScanTable(axis, rows)
