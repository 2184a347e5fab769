"""Run configuration and result-record models.

A RunConfig fully determines a computation; every output embeds the
effective config (defaults filled in, scaling radius snapped) so any
published number can be traced back to one.  All quantities are atomic
units.
"""

from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

__all__ = [
    "GridConfig",
    "BasisConfig",
    "PathConfig",
    "ChannelsConfig",
    "FieldConfig",
    "SolverConfig",
    "QuadratureConfig",
    "WaterConfig",
    "TdseConfig",
    "ScanConfig",
    "RunConfig",
    "ResultRecord",
]


class GridConfig(BaseModel):
    x_min: float = 0.0
    x_max: float = 100.0
    n_elements: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "GridConfig":
        if not self.x_min < self.x_max:
            raise ValueError(f"grid needs x_min < x_max, got [{self.x_min}, {self.x_max}]")
        return self


class BasisConfig(BaseModel):
    order: int = Field(8, ge=3)
    zero_at_domain_start: Optional[bool] = None  # default decided by problem family
    zero_at_domain_end: Optional[bool] = None    # on for time propagation with scaling


class PathConfig(BaseModel):
    r0: float = Field(10.0, gt=0)
    xi: float = 0.5
    two_sided: Optional[bool] = None

    @field_validator("xi")
    @classmethod
    def _xi_range(cls, v: float) -> float:
        if not 0.0 <= v <= math.pi / 2:
            raise ValueError(f"scaling angle xi must lie in [0, pi/2] rad, got {v}")
        return v


class ChannelsConfig(BaseModel):
    l_max: int = Field(7, ge=0)
    l_min: Optional[int] = None  # defaults to |n| (or 0)
    n: Optional[int] = None      # fixed magnetic number; None means all n (water)


class FieldConfig(BaseModel):
    f0: float = Field(0.0, ge=0)
    t_on: float = Field(10.0, gt=0)  # used by time propagation only


class SolverConfig(BaseModel):
    mode: Literal["auto", "dense", "shift_invert"] = "auto"
    want_vectors: bool = False
    reference_energy: Optional[float] = None
    k: int = Field(16, ge=1)
    max_abs_im: Optional[float] = None
    re_window: Optional[tuple[float, float]] = None
    n_lowest: int = Field(5, ge=1)  # eigenvalues listed in records for dense solves


class QuadratureConfig(BaseModel):
    node_count: int = Field(65, ge=4)
    singularity_offset: float = Field(1e-10, ge=0)
    n_theta: int = Field(40, ge=2)
    n_phi: int = Field(80, ge=2)


class WaterConfig(BaseModel):
    alpha_o: float = 1.6025
    alpha_h: float = 0.617
    n_o: float = 7.185
    n_h: float = 0.9075
    r_oh: float = 1.8140
    hoh_angle: float = 1.8238691


class TdseConfig(BaseModel):
    dt: float = Field(0.002, gt=0)
    t_end: float = Field(40.0, gt=0)
    store_every: float = Field(0.05, gt=0)
    r_cut: Optional[float] = None
    t_fall: float = 18.75
    t_fall_sweep: float = 5.0  # half-width of the sensitivity sweep
    profile_times: list[float] = Field(default_factory=list)
    use_scaling: bool = True


class ScanConfig(BaseModel):
    axis: Literal["f0", "xi", "r0", "basis"] = "f0"
    values: list[float] = Field(default_factory=list)

    @field_validator("values")
    @classmethod
    def _monotone(cls, v: list[float]) -> list[float]:
        if len(v) >= 2:
            diffs = [b - a for a, b in zip(v[:-1], v[1:])]
            if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
                raise ValueError("scan values must be strictly monotone")
        return v


class RunConfig(BaseModel):
    problem: Literal["model1d", "hydrogenic", "water", "oscillator"] = "hydrogenic"
    z: float = Field(1.0, gt=0)
    grid: GridConfig = GridConfig()
    basis: BasisConfig = BasisConfig()
    path: PathConfig = PathConfig()
    channels: ChannelsConfig = ChannelsConfig()
    field: FieldConfig = FieldConfig()
    solver: SolverConfig = SolverConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    water: WaterConfig = WaterConfig()
    tdse: TdseConfig = TdseConfig()
    scan: ScanConfig = ScanConfig()
    dump_matrices: bool = False

    def effective(self) -> "RunConfig":
        """Fill problem-dependent defaults (boundary flags, path sidedness)."""
        cfg = self.model_copy(deep=True)
        radial = cfg.problem in ("hydrogenic", "water")
        if cfg.basis.zero_at_domain_start is None:
            cfg.basis.zero_at_domain_start = radial
        if cfg.basis.zero_at_domain_end is None:
            cfg.basis.zero_at_domain_end = False
        if cfg.path.two_sided is None:
            cfg.path.two_sided = not radial
        return cfg


class ResultRecord(BaseModel):
    """Structured output of one run: config echo, environment, headline numbers."""

    kind: str
    config: RunConfig
    effective: dict = Field(default_factory=dict)  # snapped radii, filled defaults
    version: str = ""
    elapsed_seconds: float = 0.0
    summary: dict = Field(default_factory=dict)
    artifacts: list[str] = Field(default_factory=list)
