"""Kernel center selection and RKHS adaptive estimation.

Arrays of points are numpy arrays of shape (n, d). Library failures raise
RkhsError whose message starts with the error code.
"""

from ._core import (
    RkhsError,
    algorithm1,
    algorithm2,
    fill_distance,
    grammian,
    hausdorff,
    interpolate,
    kernel_eval,
    lyapunov,
    min_separation,
    pe_occupancy,
    run_config,
    run_estimator,
    simulate,
)

__all__ = [
    "RkhsError",
    "algorithm1",
    "algorithm2",
    "fill_distance",
    "grammian",
    "hausdorff",
    "interpolate",
    "kernel_eval",
    "lyapunov",
    "min_separation",
    "pe_occupancy",
    "run_config",
    "run_estimator",
    "simulate",
]
