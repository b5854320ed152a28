"""Python bindings for the dsflow solver."""

from ._dsflow import (
    Error,
    Grid,
    af_check,
    elementary,
    geometry,
    invert_phi1,
    perturbed_field,
    quermassintegrals,
    quotient_F,
    run_experiment,
    set_worker_count,
    slice_phi,
    worker_count,
)

__all__ = [
    "Error",
    "Grid",
    "af_check",
    "elementary",
    "geometry",
    "invert_phi1",
    "perturbed_field",
    "quermassintegrals",
    "quotient_F",
    "run_experiment",
    "set_worker_count",
    "slice_phi",
    "worker_count",
]
