"""Hyperbolic reflection groups, Coxeter diagrams and crystallographic sphere packings."""

from .exact import ExactMatrix, ExactScalar, format_scalar, parse_scalar
from .qspace import Polyhedron, QuadraticSpace, Root, is_crystallographic_root, reflect
from .diagram import Diagram, build_diagram, find_clusters, find_isolated_roots
from .vinberg import finite_volume_check, no_roots_obstruction, run_vinberg, verify_infinite_symmetry
from .arith import verdict
from .packing import inversive_frame, orbit
from .doubling import double, facet_polyhedron, orthogonalize

__version__ = "0.1.0"

__all__ = [
    "ExactMatrix", "ExactScalar", "format_scalar", "parse_scalar",
    "Polyhedron", "QuadraticSpace", "Root", "is_crystallographic_root", "reflect",
    "Diagram", "build_diagram", "find_clusters", "find_isolated_roots",
    "finite_volume_check", "no_roots_obstruction", "run_vinberg", "verify_infinite_symmetry",
    "verdict", "inversive_frame", "orbit", "double", "facet_polyhedron", "orthogonalize",
]
