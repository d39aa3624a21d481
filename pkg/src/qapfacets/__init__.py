"""Second-order permutation polytopes: vertices, affine hull, facet families,
structural lemmas, and QAP lower bounds from facet cuts."""

from .perm import Permutation, enumerate_permutations, vertex
from .facets import GenericInequality, LinearInequality, certify, enumerate_family
from .bounds import QapInstance, cutting_plane_bound, parse_qaplib

__all__ = [
    "Permutation",
    "enumerate_permutations",
    "vertex",
    "GenericInequality",
    "LinearInequality",
    "certify",
    "enumerate_family",
    "QapInstance",
    "cutting_plane_bound",
    "parse_qaplib",
]
__version__ = "0.1.0"
