"""Graph complex for spaces of long knots in R^n.

Combinatorial side: decorated graphs on a special line, the contraction
differential, exact (rational) cohomology, and chord diagrams modulo the
four-term and one-term relations.

Geometric side: explicit long-knot cycles (resolutions of a two-double-point
immersion, clutching frames, rotated families, little-balls reparametrization)
and Monte-Carlo evaluation of configuration-space-integral pairings.
"""

from knotgc.graphs import Graph, GraphVector, Grading, SignedGraph, canonicalize, grading, new_graph, parse_graph, format_graph
from knotgc.differential import Contraction, contract, delta, delta_vec
from knotgc.cohomology import BasisTable, SparseRationalMatrix, enumerate_basis, delta_matrix, betti, euler_characteristic, kernel_representative

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "Grading",
    "SignedGraph",
    "GraphVector",
    "new_graph",
    "grading",
    "canonicalize",
    "parse_graph",
    "format_graph",
    "Contraction",
    "contract",
    "delta",
    "delta_vec",
    "BasisTable",
    "SparseRationalMatrix",
    "enumerate_basis",
    "delta_matrix",
    "betti",
    "euler_characteristic",
    "kernel_representative",
]
