"""Stabilizer-free conforming DG solver for the Brinkman equations."""

from ._core import (
    CdgError,
    FlowResult,
    Mesh,
    converge,
    generate_mesh,
    load_mesh,
    patch_error,
    run_cli,
    solve_flow,
    synthetic_raster,
)

__all__ = [
    "CdgError",
    "FlowResult",
    "Mesh",
    "converge",
    "generate_mesh",
    "load_mesh",
    "patch_error",
    "run_cli",
    "solve_flow",
    "synthetic_raster",
]
