"""Exact computations with Stokes-filtered local systems of exponential type,
their spider (quiver) data on the plane, and the topological Laplace
transform between them, together with small calculators for irregularity
numbers and Newton polyhedra of twisted functions."""

from .errors import DegenerateError, InternalInvariantError, ParseError, StokesLabError, ValidationError
from .exactcore import GaussianRational, QMatrix, Ray
from .laplace import CoStokesSystem, costokes_to_stokes, laplace_bwd, laplace_fwd, roundtrip_report, transport
from .spider import SpiderSheaf, plane_cohomology, validate_spider
from .stokes import StokesSystem, filtration_cohomology, validate

__version__ = "0.1.0"

__all__ = [
    "StokesLabError",
    "ParseError",
    "ValidationError",
    "DegenerateError",
    "InternalInvariantError",
    "GaussianRational",
    "QMatrix",
    "Ray",
    "StokesSystem",
    "validate",
    "filtration_cohomology",
    "SpiderSheaf",
    "validate_spider",
    "plane_cohomology",
    "CoStokesSystem",
    "transport",
    "laplace_fwd",
    "laplace_bwd",
    "costokes_to_stokes",
    "roundtrip_report",
]
