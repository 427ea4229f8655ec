"""Exact Fedosov quantization on a single chart of a supermanifold."""

from .errors import (
    DegenerateError,
    FedosovError,
    HbarDivisionError,
    JetExhaustedError,
    NoConvergenceError,
    ParseError,
    ValidationError,
)
from .graded_algebra import C, CoordinateSystem, Element, HBAR, Ring, TruncationContext, X, Y
from .scalar import Scalar

__version__ = "0.1.0"
