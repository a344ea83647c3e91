"""Contraction differential on the graph complex.

``delta`` contracts, one at a time, every edge with at least one free
endpoint and every arc between consecutive interval vertices.  The merged
vertex keeps the smaller label, higher labels shift down by one, and an
edge joining the two merged interval vertices becomes a small loop whose
flag records the edge's orientation along the line.

Local sign: contracting an edge/arc with endpoints i < j contributes
(-1)**(j+1), times -1 if the edge was oriented j -> i.  The rule is pinned
by the exhaustive delta-squared test and the known trivalent cocycle; both
live in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from knotgc.errors import IllegalContraction, MixedGrading
from knotgc.graphs import Graph, GraphVector, SignedGraph, canonicalize, grading, new_graph

__all__ = ["Contraction", "legal_contractions", "contract", "delta", "delta_vec"]


@dataclass(frozen=True)
class Contraction:
    """A single legal contraction move and its raw (uncanonicalized) result."""

    kind: str  # "edge" or "arc"
    target: int  # edge index, or arc index i (between interval vertices i, i+1)
    resulting_graph: Graph
    local_sign: int


def _merged_graph(g, i, j, skip_edge=None, arc=False):
    """Merge vertex j into i (i < j), relabel, and rebuild a valid Graph."""

    def relab(x):
        if x == j:
            return i
        return x - 1 if x > j else x

    new_vi = g.vi - 1 if arc else g.vi
    new_vf = g.vf if arc else g.vf - 1
    edges = []
    loops = []
    for idx, (a, b) in enumerate(g.edges):
        if idx == skip_edge:
            continue
        a2, b2 = relab(a), relab(b)
        if a2 == b2:
            # an edge between the merged interval pair becomes a small loop;
            # the flag keeps track of the orientation along the line
            loops.append((a2, 1 if a < b else -1))
        else:
            edges.append((a2, b2))
    for v, flag in g.loops:
        loops.append((relab(v), flag))
    return new_graph(new_vi, new_vf, edges, loops)


def _arc_contraction(g, i):
    if not (1 <= i <= g.vi - 1):
        raise IllegalContraction(f"arc {i} out of range 1..{g.vi - 1}")
    result = _merged_graph(g, i, i + 1, arc=True)
    return Contraction("arc", i, result, (-1) ** (i + 2))


def _edge_contraction(g, idx):
    if not (0 <= idx < len(g.edges)):
        raise IllegalContraction(f"edge index {idx} out of range")
    a, b = g.edges[idx]
    if a <= g.vi and b <= g.vi:
        raise IllegalContraction(f"edge ({a},{b}) joins two interval vertices")
    i, j = min(a, b), max(a, b)
    sign = (-1) ** (j + 1)
    if a > b:
        sign = -sign
    result = _merged_graph(g, i, j, skip_edge=idx, arc=False)
    return Contraction("edge", idx, result, sign)


def legal_contractions(g):
    """All contraction moves of g, with results and local signs."""
    out = [_arc_contraction(g, i) for i in range(1, g.vi)]
    for idx, (a, b) in enumerate(g.edges):
        if max(a, b) > g.vi:
            out.append(_edge_contraction(g, idx))
    return out


def contract(g, kind, target=None):
    """Perform one contraction and canonicalize.

    Accepts ``contract(g, Contraction)`` or ``contract(g, "arc"|"edge", i)``.
    """
    if isinstance(kind, Contraction):
        c = kind
    elif kind == "arc":
        c = _arc_contraction(g, target)
    elif kind == "edge":
        c = _edge_contraction(g, target)
    else:
        raise IllegalContraction(f"unknown contraction kind {kind!r}")
    sg = canonicalize(c.resulting_graph)
    return SignedGraph(sg.graph, sg.sign * c.local_sign)


def delta(g):
    """Signed sum over all legal contractions, as a GraphVector."""
    out = GraphVector()
    for c in legal_contractions(g):
        out.add_term(c.resulting_graph, c.local_sign)
    return out


def delta_vec(v):
    """Linear extension of delta; all terms must share one grading."""
    gradings = {grading(g) for g in v.terms}
    if len(gradings) > 1:
        raise MixedGrading(f"terms carry gradings {sorted((x.ord, x.deg) for x in gradings)}")
    out = GraphVector()
    for g, coeff in v.terms.items():
        out = out + coeff * delta(g)
    return out
