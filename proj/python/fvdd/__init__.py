"""DDFV and HFV drift-diffusion simulations."""

from ._fvdd import (
    CSV_HEADER,
    FvddError,
    Mesh,
    cartesian_mesh,
    compare,
    distorted_mesh,
    equilibrium,
    fit_entropy_decay,
    load_mesh,
    simulate,
    triangular_mesh,
)

__all__ = [
    "CSV_HEADER",
    "FvddError",
    "Mesh",
    "cartesian_mesh",
    "compare",
    "distorted_mesh",
    "equilibrium",
    "fit_entropy_decay",
    "load_mesh",
    "simulate",
    "triangular_mesh",
]
