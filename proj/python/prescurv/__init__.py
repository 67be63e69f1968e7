from ._core import (
    Curve,
    PrescurvError,
    c1_distance,
    circle,
    constant_curvature_knot,
    fourier_knot,
    helix,
    min_self_distance,
    prescribe,
    read_csv,
    torus_knot,
    verify,
    write_csv,
)

__all__ = [
    "Curve",
    "PrescurvError",
    "c1_distance",
    "circle",
    "constant_curvature_knot",
    "fourier_knot",
    "helix",
    "min_self_distance",
    "prescribe",
    "read_csv",
    "torus_knot",
    "verify",
    "write_csv",
]
