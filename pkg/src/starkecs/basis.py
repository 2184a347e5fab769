"""Finite-element radial/1D basis and the complex scaling path.

Each element carries M polynomial basis functions f_{im} built from the
monomial fundamentals h_1 = 1, h_m = u^(m-1)/(m-1) on the unit interval by a
boundary-value map W: f_1 is 1 at the element's left edge, f_2 is 1 at the
right edge, all others vanish at both edges.  Sharing the coefficient of
f_{i,2} with f_{i+1,1} makes the assembled function continuous; flags on
BasisSpec drop the edge functions pinned to the ends of the domain.

The coordinate path bends outward segments of the axis into the complex
plane: identity up to the scaling radius, then a straight ray at angle xi.
Basis functions stay real; the path enters matrix elements only through its
(piecewise constant) Jacobian and the analytic continuation of operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "ElementGrid",
    "BasisSpec",
    "ScalingPath",
    "DofMap",
    "build_w_matrix",
    "fundamental_values",
    "evaluate_basis",
    "evaluate_basis_derivative",
    "basis_values_on_element",
    "build_dof_map",
]


@dataclass(frozen=True)
class ElementGrid:
    """Partition of [x_min, x_max] into elements (uniform unless breakpoints given)."""

    x_min: float
    x_max: float
    n_elements: int
    breakpoints: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.breakpoints is None:
            pts = np.linspace(self.x_min, self.x_max, self.n_elements + 1)
            object.__setattr__(self, "breakpoints", pts)
        else:
            pts = np.asarray(self.breakpoints, dtype=float)
            object.__setattr__(self, "breakpoints", pts)
        if len(self.breakpoints) != self.n_elements + 1:
            raise ValueError("breakpoints length must be n_elements + 1")
        if not np.all(np.diff(self.breakpoints) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if abs(self.breakpoints[0] - self.x_min) > 1e-12 or abs(self.breakpoints[-1] - self.x_max) > 1e-12:
            raise ValueError("breakpoints must start at x_min and end at x_max")

    def element(self, i: int) -> tuple[float, float]:
        return float(self.breakpoints[i]), float(self.breakpoints[i + 1])

    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def nearest_breakpoint(self, x: float) -> float:
        return float(self.breakpoints[np.argmin(np.abs(self.breakpoints - x))])

    def is_breakpoint(self, x: float, tol: float = 1e-9) -> bool:
        return bool(np.min(np.abs(self.breakpoints - x)) <= tol)


@dataclass(frozen=True)
class BasisSpec:
    """Per-element basis order and edge constraints.

    zero_at_domain_start removes the function that is nonzero at x_min
    (radial problems: the adjusted wave function vanishes at r = 0);
    zero_at_domain_end removes the one nonzero at x_max (used to stabilize
    time propagation with scaling on).
    """

    order: int = 8
    zero_at_domain_start: bool = False
    zero_at_domain_end: bool = False

    def __post_init__(self) -> None:
        if self.order < 3:
            raise ValueError(f"basis order must be >= 3, got {self.order}")


def _bh_matrix(order: int) -> list[list[Fraction]]:
    """Boundary values of the fundamentals: rows (u=0, u=1), columns m."""
    row0 = [Fraction(1)] + [Fraction(0)] * (order - 1)
    row1 = [Fraction(1)] + [Fraction(1, m - 1) for m in range(2, order + 1)]
    return [row0, row1]


def build_w_matrix(order: int, zero_at_start: bool = False) -> np.ndarray:
    """Exact (rational) change of basis W with B_h @ W = B_f, as float array.

    Columns express the boundary-adapted functions in the fundamentals.  With
    zero_at_start the first column is zeroed: the function that is 1 at the
    element's left edge is removed, leaving a basis that vanishes there.
    """
    if order < 3:
        raise ValueError(f"basis order must be >= 3, got {order}")
    bh = _bh_matrix(order)
    # P = first two columns, Q = the rest; W = [[P^-1, -P^-1 Q], [0, I]].
    a, b = bh[0][0], bh[0][1]
    c, d = bh[1][0], bh[1][1]
    det = a * d - b * c
    pinv = [[d / det, -b / det], [-c / det, a / det]]
    w = [[Fraction(0)] * order for _ in range(order)]
    for r in range(2):
        for s in range(2):
            w[r][s] = pinv[r][s]
    for col in range(2, order):
        for r in range(2):
            w[r][col] = -(pinv[r][0] * bh[0][col] + pinv[r][1] * bh[1][col])
        w[col][col] = Fraction(1)
    arr = np.array([[float(v) for v in row] for row in w])
    if zero_at_start:
        arr[:, 0] = 0.0
    return arr


def fundamental_values(order: int, u: np.ndarray, derivative: bool = False) -> np.ndarray:
    """h_m(u) (or h_m'(u)) for m = 1..order, shape (order, len(u))."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty((order, u.size))
    if derivative:
        out[0] = 0.0
        for m in range(2, order + 1):
            out[m - 1] = u ** (m - 2)
    else:
        out[0] = 1.0
        for m in range(2, order + 1):
            out[m - 1] = u ** (m - 1) / (m - 1)
    return out


def basis_values_on_element(
    grid: ElementGrid, spec: BasisSpec, i: int, x: np.ndarray, derivative: bool = False
) -> np.ndarray:
    """All f_{im}(x) (or derivatives) on element i, shape (order, len(x)).

    Points are taken at face value; callers keep x inside the element.
    Derivatives carry the 1/width chain factor.
    """
    a, b = grid.element(i)
    width = b - a
    u = (np.asarray(x, dtype=float) - a) / width
    w = build_w_matrix(spec.order)
    vals = w.T @ fundamental_values(spec.order, u, derivative)
    if derivative:
        vals /= width
    return vals


def evaluate_basis(grid: ElementGrid, spec: BasisSpec, i: int, m: int, x: float) -> float:
    """f_{im}(x); zero outside element i by definition."""
    a, b = grid.element(i)
    if not (a <= x <= b):
        return 0.0
    return float(basis_values_on_element(grid, spec, i, np.array([x]))[m - 1, 0])


def evaluate_basis_derivative(grid: ElementGrid, spec: BasisSpec, i: int, m: int, x: float) -> float:
    """d/dx f_{im}(x); zero outside element i."""
    a, b = grid.element(i)
    if not (a <= x <= b):
        return 0.0
    return float(basis_values_on_element(grid, spec, i, np.array([x]), derivative=True)[m - 1, 0])


@dataclass(frozen=True)
class ScalingPath:
    """Complex coordinate path: identity inside r0, ray at angle xi beyond.

    two_sided extends the bend to the mirror region x < -r0 for problems on
    the whole axis; xi = 0 reproduces the identity path.
    """

    r0: float
    xi: float
    two_sided: bool = False

    def __post_init__(self) -> None:
        if not (0.0 <= self.xi < np.pi / 2 + 1e-12):
            raise ValueError(f"scaling angle must satisfy 0 <= xi <= pi/2, got {self.xi}")
        if self.r0 <= 0:
            raise ValueError(f"scaling radius must be positive, got {self.r0}")

    @property
    def phase(self) -> complex:
        return complex(np.exp(1j * self.xi))

    def map(self, r):
        """r -> r tilde along the path (vectorized)."""
        r = np.asarray(r, dtype=float)
        out = r.astype(complex)
        e = self.phase
        right = r > self.r0
        out = np.where(right, e * (r - self.r0) + self.r0, out)
        if self.two_sided:
            left = r < -self.r0
            out = np.where(left, e * (r + self.r0) - self.r0, out)
        if out.ndim == 0:
            return complex(out)
        return out

    def jacobian(self, r):
        """d r tilde / dr: 1 inside, e^{i xi} outside (discontinuous at r0)."""
        r = np.asarray(r, dtype=float)
        scaled = r > self.r0
        if self.two_sided:
            scaled = scaled | (r < -self.r0)
        out = np.where(scaled, self.phase, 1.0 + 0.0j)
        if out.ndim == 0:
            return complex(out)
        return out


@dataclass(frozen=True)
class DofMap:
    """Global indexing of (element, local order, channel) with shared edge dofs.

    Within each element the local orders are laid out [1, 3, 4, ..., M, 2] so
    the right-edge function lands last and overlaps the next element's
    left-edge slot.  Suppressed edge functions map to -1.  Channel blocks are
    contiguous (channel-major).
    """

    n_elements: int
    order: int
    n_channels: int
    dofs_per_channel: int
    index: np.ndarray = field(repr=False)  # (n_elements, order) -> radial dof or -1

    @property
    def total(self) -> int:
        return self.n_channels * self.dofs_per_channel

    def global_index(self, i: int, m: int, channel: int = 0) -> int:
        """Global dof of f_{im} in the given channel block; -1 if suppressed."""
        radial = int(self.index[i, m - 1])
        if radial < 0:
            return -1
        return channel * self.dofs_per_channel + radial

    def element_slots(self, i: int, channel: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """(local orders 1-based, global dofs) of the active functions of element i."""
        radial = self.index[i]
        active = radial >= 0
        orders = np.nonzero(active)[0] + 1
        return orders, radial[active] + channel * self.dofs_per_channel


def build_dof_map(grid: ElementGrid, spec: BasisSpec, n_channels: int = 1) -> DofMap:
    """Continuity-sharing dof layout over the grid for n_channels channels."""
    n, m = grid.n_elements, spec.order
    index = np.full((n, m), -1, dtype=int)
    # slot position of local order within an element block: [1, 3, ..., M, 2]
    slot_of_order = np.empty(m, dtype=int)
    slot_of_order[0] = 0
    for k in range(3, m + 1):
        slot_of_order[k - 1] = k - 2
    slot_of_order[1] = m - 1
    for i in range(n):
        index[i] = i * (m - 1) + slot_of_order
    if spec.zero_at_domain_start:
        index -= 1
        index[0, 0] = -1
    if spec.zero_at_domain_end:
        index[n - 1, 1] = -1
    total = n * (m - 1) + 1
    total -= int(spec.zero_at_domain_start) + int(spec.zero_at_domain_end)
    return DofMap(n, m, n_channels, total, index)
