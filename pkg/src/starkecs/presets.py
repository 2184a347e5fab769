"""Named run configurations reproducing the reference tables and figures.

Each preset pairs a workflow kind with a fully specified RunConfig, so
``starkecs scan --preset he-plus-m1-field-scan`` regenerates a table row
for row.  Preset names mirror the source tables they reproduce.
"""

from __future__ import annotations

import math

from .config import (
    BasisConfig,
    ChannelsConfig,
    FieldConfig,
    GridConfig,
    PathConfig,
    RunConfig,
    ScanConfig,
    SolverConfig,
    TdseConfig,
)

__all__ = ["PRESETS", "get_preset", "preset_names"]

_GRID_1D = GridConfig(x_min=-10.0, x_max=100.0, n_elements=100)
_GRID_R100 = GridConfig(x_min=0.0, x_max=100.0, n_elements=100)
_GRID_WATER = GridConfig(x_min=0.0, x_max=20.0, n_elements=20)

_HE_M1_FIELDS = [
    0.0005, 0.005, 0.01, 0.018, 0.02, 0.022, 0.024, 0.026, 0.028, 0.03,
    0.032, 0.034, 0.036, 0.038, 0.04, 0.045, 0.05, 0.06, 0.07,
]


def _base_1d(**over) -> RunConfig:
    return RunConfig(
        problem="model1d",
        grid=_GRID_1D,
        basis=BasisConfig(order=9),
        path=PathConfig(r0=9.8, xi=0.5),
        field=FieldConfig(f0=0.11),
        solver=SolverConfig(mode="auto", reference_energy=-0.713, max_abs_im=0.05, k=8),
        **over,
    )


PRESETS: dict[str, tuple[str, RunConfig]] = {
    # 1D model atom, resonance at F0 = 0.11
    "model1d-resonance": ("solve", _base_1d()),
    "table-1.1": (
        "scan",
        _base_1d(scan=ScanConfig(axis="xi", values=[0.5, 1.0, math.pi / 2])),
    ),
    "table-1.2": (
        "scan",
        _base_1d(scan=ScanConfig(axis="basis", values=[6, 7, 8, 9, 10, 11, 12, 13, 14])),
    ),
    # hydrogen Stark
    "table-2.1": (
        "solve",
        RunConfig(
            problem="hydrogenic",
            grid=_GRID_R100,
            basis=BasisConfig(order=8),
            channels=ChannelsConfig(l_max=7, n=0),
            path=PathConfig(r0=10.0, xi=0.5),
            field=FieldConfig(f0=0.1),
            solver=SolverConfig(reference_energy=-0.527, max_abs_im=0.05, k=8),
        ),
    ),
    "table-2.2": (
        "solve",
        RunConfig(
            problem="hydrogenic",
            grid=_GRID_R100,
            basis=BasisConfig(order=8),
            channels=ChannelsConfig(l_max=7, n=0),
            path=PathConfig(r0=10.0, xi=0.5),
            field=FieldConfig(f0=0.5),
            solver=SolverConfig(reference_energy=-0.623, max_abs_im=0.5, k=8),
        ),
    ),
    "table-2.3": (
        "scan",
        RunConfig(
            problem="hydrogenic",
            grid=_GRID_R100,
            basis=BasisConfig(order=5),
            channels=ChannelsConfig(l_max=4, n=0),
            path=PathConfig(r0=10.0, xi=0.5),
            field=FieldConfig(f0=0.1),
            solver=SolverConfig(reference_energy=-0.527, max_abs_im=0.05, k=8),
            scan=ScanConfig(axis="xi", values=[0.2, 0.5, 1.0]),
        ),
    ),
    # singly ionized helium, first excited manifold
    "table-2.4": (
        "scan",
        RunConfig(
            problem="hydrogenic",
            z=2.0,
            grid=_GRID_R100,
            basis=BasisConfig(order=7),
            channels=ChannelsConfig(l_max=5, n=1),
            path=PathConfig(r0=10.0, xi=0.5),
            solver=SolverConfig(
                mode="shift_invert", reference_energy=-0.5, max_abs_im=0.05, k=8,
                re_window=(-0.56, -0.47),
            ),
            scan=ScanConfig(axis="f0", values=_HE_M1_FIELDS),
        ),
    ),
    "table-2.5-e010": (
        "scan",
        RunConfig(
            problem="hydrogenic",
            z=2.0,
            grid=_GRID_R100,
            basis=BasisConfig(order=7),
            channels=ChannelsConfig(l_max=6, n=0),
            path=PathConfig(r0=10.0, xi=0.5),
            solver=SolverConfig(
                mode="shift_invert", reference_energy=-0.5008, max_abs_im=0.05, k=10,
                re_window=(-0.67, -0.5001),
            ),
            scan=ScanConfig(axis="f0", values=_HE_M1_FIELDS),
        ),
    ),
    "table-2.5-e100": (
        "scan",
        RunConfig(
            problem="hydrogenic",
            z=2.0,
            grid=_GRID_R100,
            basis=BasisConfig(order=7),
            channels=ChannelsConfig(l_max=6, n=0),
            path=PathConfig(r0=10.0, xi=0.5),
            solver=SolverConfig(
                mode="shift_invert", reference_energy=-0.4993, max_abs_im=0.05, k=10,
                re_window=(-0.4999, -0.40),
            ),
            scan=ScanConfig(axis="f0", values=_HE_M1_FIELDS),
        ),
    ),
    "table-5.2": (
        "scan",
        RunConfig(
            problem="hydrogenic",
            grid=_GRID_R100,
            basis=BasisConfig(order=5),
            channels=ChannelsConfig(l_max=4, n=0),
            path=PathConfig(r0=10.0, xi=0.5),
            field=FieldConfig(f0=0.1),
            solver=SolverConfig(reference_energy=-0.527, max_abs_im=0.05, k=8),
            scan=ScanConfig(axis="r0", values=[8.0, 9.0, 10.0, 11.0, 12.0]),
        ),
    ),
    "fcrit-he+": (
        "fcrit",
        RunConfig(
            problem="hydrogenic",
            z=2.0,
            grid=_GRID_R100,
            basis=BasisConfig(order=7),
            channels=ChannelsConfig(l_max=5, n=1),
            path=PathConfig(r0=10.0, xi=0.5),
            solver=SolverConfig(
                mode="shift_invert", reference_energy=-0.5, max_abs_im=0.05, k=8,
                re_window=(-0.56, -0.47),
            ),
            scan=ScanConfig(axis="f0", values=_HE_M1_FIELDS),
        ),
    ),
    # water molecule
    "table-4.1": (
        "solve",
        RunConfig(
            problem="water",
            grid=_GRID_WATER,
            basis=BasisConfig(order=10),
            channels=ChannelsConfig(l_max=2),
            path=PathConfig(r0=10.0, xi=0.0),
            solver=SolverConfig(mode="dense", n_lowest=8),
        ),
    ),
    "table-4.2": (
        "scan",
        RunConfig(
            problem="water",
            grid=_GRID_WATER,
            basis=BasisConfig(order=10),
            channels=ChannelsConfig(l_max=2),
            path=PathConfig(r0=10.0, xi=0.5),
            solver=SolverConfig(
                mode="shift_invert", reference_energy=-0.5157, max_abs_im=0.1, k=10,
            ),
            scan=ScanConfig(axis="f0", values=[0.06, 0.08, 0.10, 0.14, 0.20]),
        ),
    ),
    # time-dependent hydrogen
    "fig-3.2": (
        "propagate",
        RunConfig(
            problem="hydrogenic",
            grid=GridConfig(x_min=0.0, x_max=50.0, n_elements=25),
            basis=BasisConfig(order=4),
            channels=ChannelsConfig(l_max=5, n=0),
            path=PathConfig(r0=10.0, xi=0.0),
            field=FieldConfig(f0=0.1, t_on=10.0),
            solver=SolverConfig(reference_energy=-0.5),
            tdse=TdseConfig(dt=0.002, t_end=40.0, store_every=0.25, use_scaling=False, t_fall=38.0),
        ),
    ),
    "fig-3.5": (
        "propagate",
        RunConfig(
            problem="hydrogenic",
            grid=GridConfig(x_min=0.0, x_max=50.0, n_elements=25),
            basis=BasisConfig(order=4),
            channels=ChannelsConfig(l_max=5, n=0),
            path=PathConfig(r0=10.0, xi=0.5),
            field=FieldConfig(f0=0.1, t_on=10.0),
            solver=SolverConfig(reference_energy=-0.5),
            tdse=TdseConfig(
                dt=0.002, t_end=36.0, store_every=0.25, r_cut=30.0, t_fall=18.75, use_scaling=True,
            ),
        ),
    ),
    # Hermitian validation problem
    "oscillator": (
        "solve",
        RunConfig(
            problem="oscillator",
            grid=GridConfig(x_min=-10.0, x_max=10.0, n_elements=40),
            basis=BasisConfig(order=8),
            path=PathConfig(r0=9.5, xi=0.0),
            solver=SolverConfig(mode="dense", n_lowest=5),
        ),
    ),
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> tuple[str, RunConfig]:
    """(workflow kind, config) for a named preset; KeyError lists known names."""
    try:
        kind, cfg = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(preset_names())}") from None
    return kind, cfg.model_copy(deep=True)
