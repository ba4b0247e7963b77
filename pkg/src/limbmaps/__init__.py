"""Exact surgery maps between the limbs of the Mandelbrot set and the
0-limb of the connectedness locus of lambda*z*(1+z/q)**q, with numerical
ray tracing, solvers, rendering and verification suites."""

from .circle import Angle, Arc, alpha_cycle, limb_combinatorics, orbit_type, rotation_number
from .theta import (
    symmetry_angle,
    theta_bar,
    theta_hat,
    theta_hat_inv,
    theta_interlimb,
    theta_limb,
    theta_limb_inv,
    tune_angle,
)

__version__ = "0.1.0"

__all__ = [
    "Angle", "Arc", "alpha_cycle", "limb_combinatorics", "orbit_type", "rotation_number",
    "symmetry_angle", "theta_bar", "theta_hat", "theta_hat_inv", "theta_interlimb",
    "theta_limb", "theta_limb_inv", "tune_angle",
]
