"""Joint discrete precoding and RIS-configuration optimization toolkit.

Sphere-decoder core for mixed-integer least squares, fronthaul quantizer,
Rician scene channels, the iterative weighted sum-MSE engine, and a
Monte-Carlo experiment harness.
"""

from .mils import (
    LabelSet,
    SolverOutcome,
    TriangularSystem,
    block_sesd,
    brute_force_mils,
    regularize_and_factor,
    sesd,
    sesd_complex,
    sesd_real,
)
from .quantizer import QuantizerSpec, build_quantizer, optimal_step_size, quantize

__version__ = "0.1.0"

__all__ = [
    "LabelSet",
    "TriangularSystem",
    "SolverOutcome",
    "sesd",
    "sesd_real",
    "sesd_complex",
    "block_sesd",
    "brute_force_mils",
    "regularize_and_factor",
    "QuantizerSpec",
    "build_quantizer",
    "quantize",
    "optimal_step_size",
]
