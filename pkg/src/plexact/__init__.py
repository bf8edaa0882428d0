"""Exact analysis and construction of piecewise-linear interval maps."""

from .pl_core import (
    Rat,
    PLMap,
    PLHomeo,
    RatInterval,
    IntervalSet,
    PiecewiseConstDensity,
    PLError,
    PieceCapExceeded,
    rat,
    compose,
    iterate,
    image,
    preimage,
    sup_distance,
    preserves_measure,
    measure_homeo,
    conjugate,
    invariant_density,
    parse_plmap,
    format_plmap,
)

from . import chains, cli, periodic, perturb, shadowing, structure  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "Rat",
    "PLMap",
    "PLHomeo",
    "RatInterval",
    "IntervalSet",
    "PiecewiseConstDensity",
    "PLError",
    "PieceCapExceeded",
    "rat",
    "compose",
    "iterate",
    "image",
    "preimage",
    "sup_distance",
    "preserves_measure",
    "measure_homeo",
    "conjugate",
    "invariant_density",
    "parse_plmap",
    "format_plmap",
    "chains",
    "periodic",
    "perturb",
    "shadowing",
    "structure",
    "cli",
]
