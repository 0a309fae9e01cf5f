"""Graph polynomials, Dodgson polynomials and denominator reduction over the integers."""

from .dodgson import dodgson, psi
from .graph import build_graph, catalog, cycle, g8, minor, wheel
from .poly import Poly, format_poly, parse_poly
from .reduction import classify, run_reduction

__version__ = "0.1.0"

__all__ = [
    "Poly",
    "build_graph",
    "catalog",
    "classify",
    "cycle",
    "dodgson",
    "format_poly",
    "g8",
    "minor",
    "parse_poly",
    "psi",
    "run_reduction",
    "wheel",
]
