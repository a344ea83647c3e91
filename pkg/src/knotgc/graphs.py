"""Decorated graphs on a special line, their gradings, and canonical forms.

A graph consists of ``vi`` interval vertices (labels 1..vi, in order along
the oriented special line), ``vf`` free vertices (labels vi+1..vi+vf),
oriented edges between distinct vertices, and small loops at interval
vertices carrying a half-edge-order flag.  The quotient relations are

  (1) a repeated vertex pair (double edge, or two loops at one vertex) is zero,
  (2) loops at free vertices are zero (rejected at construction),
  (3) relabeling free vertices / reversing an edge / flipping a loop flag
      multiplies by the sign of the operation.

Interval labels are frozen in line order; only free vertices permute.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction

from knotgc.errors import (
    BadLabel,
    DisconnectedGraph,
    LoopAtFreeVertex,
    ParseError,
    ValencyTooLow,
)

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
    "graph_to_json",
    "graph_from_json",
]


@dataclass(frozen=True)
class Graph:
    """Immutable graph; construct through :func:`new_graph` to validate."""

    vi: int
    vf: int
    edges: tuple  # ((a, b), ...) oriented a -> b
    loops: tuple  # ((v, flag), ...) flag in {+1, -1}

    @property
    def n_vertices(self):
        return self.vi + self.vf

    @property
    def n_edges(self):
        """Edge count e; small loops are edges."""
        return len(self.edges) + len(self.loops)

    def key(self):
        """Deterministic sort key (used to order canonical bases)."""
        return (self.vi, self.vf, self.edges, self.loops)

    def __repr__(self):
        return f"Graph({format_graph(self)!r})"


@dataclass(frozen=True)
class Grading:
    ord: int
    deg: int


@dataclass(frozen=True)
class SignedGraph:
    """A canonical representative with the sign relating the input to it.

    ``[input] == sign * [graph]`` in the quotient; ``sign == 0`` means the
    input is zero (double edge, or an odd self-symmetry).
    """

    graph: Graph
    sign: int


def new_graph(vi, vf, edges, loops=()):
    """Validate and build a Graph.

    Raises BadLabel, LoopAtFreeVertex, ValencyTooLow or DisconnectedGraph.
    Connectivity treats the special line as joining all interval vertices.
    """
    if vi < 0 or vf < 0:
        raise BadLabel(f"negative vertex counts ({vi}, {vf})")
    m = vi + vf
    edges = tuple((int(a), int(b)) for a, b in edges)
    norm_loops = []
    for item in loops:
        v, flag = item
        if flag in ("+", "-"):
            flag = 1 if flag == "+" else -1
        if flag not in (1, -1):
            raise BadLabel(f"loop flag must be +/-, got {flag!r}")
        norm_loops.append((int(v), flag))
    loops = tuple(norm_loops)

    for a, b in edges:
        if not (1 <= a <= m) or not (1 <= b <= m):
            raise BadLabel(f"edge ({a},{b}) outside 1..{m}")
        if a == b:
            raise BadLabel(f"edge ({a},{b}) joins a vertex to itself; use a loop")
    for v, _ in loops:
        if not (1 <= v <= m):
            raise BadLabel(f"loop vertex {v} outside 1..{m}")
        if v > vi:
            raise LoopAtFreeVertex(f"loop at free vertex {v}")

    # valency: interval vertices get +2 for their two line arcs
    ends = [0] * (m + 1)
    for a, b in edges:
        ends[a] += 1
        ends[b] += 1
    for v, _ in loops:
        ends[v] += 2
    for v in range(1, m + 1):
        val = ends[v] + (2 if v <= vi else 0)
        if val < 3:
            raise ValencyTooLow(f"vertex {v} has valency {val}")

    # connectivity: union-find with the line gluing all interval vertices
    parent = list(range(m + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    for v in range(2, vi + 1):
        union(v, 1)
    for a, b in edges:
        union(a, b)
    if m > 0:
        root = find(1) if vi > 0 else find(vi + 1)
        for v in range(1, m + 1):
            if find(v) != root:
                raise DisconnectedGraph(f"vertex {v} not connected to the line")
        if vi == 0 and vf > 0:
            # free component is internally connected but detached from the line
            raise DisconnectedGraph("no interval vertices; free part detached from the line")

    return Graph(vi, vf, edges, loops)


def grading(g):
    """ord = e - vf, deg = 2e - 3 vf - vi."""
    e = g.n_edges
    return Grading(e - g.vf, 2 * e - 3 * g.vf - g.vi)


def _relabel_encoding(g, perm):
    """Apply a free-vertex relabeling ``perm`` (dict old->new, identity on
    interval labels), normalize edge orientations low->high and loop flags
    to +, and return (edges, loops, sign_of_normalization)."""
    sign = 1
    new_edges = []
    for a, b in g.edges:
        a2 = perm.get(a, a)
        b2 = perm.get(b, b)
        if a2 > b2:
            a2, b2 = b2, a2
            sign = -sign
        new_edges.append((a2, b2))
    new_edges.sort()
    new_loops = []
    for v, flag in g.loops:
        if flag < 0:
            sign = -sign
        new_loops.append((v, 1))
    new_loops.sort()
    return tuple(new_edges), tuple(new_loops), sign


def _perm_parity(mapping, labels):
    """Parity sign of the permutation sending label -> mapping[label]."""
    seen = set()
    sign = 1
    for start in labels:
        if start in seen:
            continue
        length = 0
        x = start
        while x not in seen:
            seen.add(x)
            x = mapping[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _free_classes(g):
    """Partition free vertices by an iterated neighborhood invariant.

    Vertices in distinct classes lie in distinct automorphism orbits, so
    canonical labelings only need to permute within classes (classes are
    ordered by their invariant).
    """
    frees = list(range(g.vi + 1, g.vi + g.vf + 1))
    if not frees:
        return []
    adj = {v: [] for v in frees}
    for a, b in g.edges:
        if a > g.vi:
            adj[a].append(b)
        if b > g.vi:
            adj[b].append(a)
    # initial color: (degree, sorted interval-neighbor labels)
    color = {}
    for v in frees:
        ivs = sorted(x for x in adj[v] if x <= g.vi)
        color[v] = (len(adj[v]), tuple(ivs))
    while True:
        newcolor = {}
        for v in frees:
            nb = sorted(color[x] for x in adj[v] if x > g.vi)
            newcolor[v] = (color[v], tuple(nb))
        # re-rank to keep tuples shallow
        ranks = {c: i for i, c in enumerate(sorted(set(newcolor.values())))}
        newcolor = {v: (color[v], ranks[newcolor[v]]) for v in frees}
        if len(set(newcolor.values())) == len(set(color.values())):
            color = newcolor
            break
        color = newcolor
    classes = {}
    for v in frees:
        classes.setdefault(color[v], []).append(v)
    return [sorted(classes[c]) for c in sorted(classes)]


def _has_double(edges, loops):
    pairs = list(edges) + [(v, v) for v, _ in loops]
    return len(pairs) != len(set(pairs))


def canonicalize(g):
    """Canonical representative and sign, or sign 0 for zero graphs.

    The representative is the lexicographically least encoding over all
    class-respecting free-vertex relabelings, with edges oriented
    low->high and loop flags +.  Zero iff a double pair occurs or some
    self-symmetry carries sign -1.
    """
    classes = _free_classes(g)
    frees = [v for cls in classes for v in cls]
    # target labels are assigned blockwise in class order
    targets = list(range(g.vi + 1, g.vi + g.vf + 1))

    best = None
    best_sign = 0
    is_zero = False
    seen_signs = {}

    perm_sets = [itertools.permutations(cls) for cls in classes]
    for arrangement in itertools.product(*perm_sets):
        ordered = [v for block in arrangement for v in block]
        perm = dict(zip(ordered, targets))
        edges, loops, nsign = _relabel_encoding(g, perm)
        full = {v: perm.get(v, v) for v in range(1, g.n_vertices + 1)}
        sign = _perm_parity(full, range(1, g.n_vertices + 1)) * nsign
        enc = (edges, loops)
        if _has_double(edges, loops):
            is_zero = True
            best = enc
            break
        prev = seen_signs.get(enc)
        if prev is None:
            seen_signs[enc] = sign
        elif prev != sign:
            is_zero = True  # odd self-symmetry
        if best is None or enc < best:
            best = enc
            best_sign = sign

    rep = Graph(g.vi, g.vf, best[0], best[1])
    if is_zero:
        return SignedGraph(rep, 0)
    return SignedGraph(rep, best_sign)


# --- text and JSON serialization -------------------------------------------

_GRAPH_RE = re.compile(
    r"G\[(\d+),(\d+);E\{([^}]*)\}(?:;L\{([^}]*)\})?\]"
)


def format_graph(g):
    estr = ",".join(f"{a}>{b}" for a, b in g.edges)
    s = f"G[{g.vi},{g.vf};E{{{estr}}}"
    if g.loops:
        lstr = ",".join(f"{v}{'+' if f > 0 else '-'}" for v, f in g.loops)
        s += f";L{{{lstr}}}"
    return s + "]"


def parse_graph(text):
    """Parse the ``G[vi,vf;E{a>b,...};L{v+,...}]`` grammar."""
    m = _GRAPH_RE.fullmatch(text.strip())
    if m is None:
        # locate the first deviation for the error offset
        probe = text.strip()
        for off, ch in enumerate(probe):
            if off >= 2 and ch not in "0123456789,;>+-{}[]EGL":
                raise ParseError(f"unexpected character {ch!r}", off)
        raise ParseError("text does not match graph grammar", 0)
    vi, vf = int(m.group(1)), int(m.group(2))
    edges = []
    if m.group(3):
        for part in m.group(3).split(","):
            if ">" not in part:
                raise ParseError(f"edge {part!r} missing '>'", text.find(part))
            a, b = part.split(">")
            edges.append((int(a), int(b)))
    loops = []
    if m.group(4):
        for part in m.group(4).split(","):
            if not part or part[-1] not in "+-":
                raise ParseError(f"loop {part!r} missing flag", text.find(part))
            loops.append((int(part[:-1]), 1 if part[-1] == "+" else -1))
    return new_graph(vi, vf, edges, loops)


def graph_to_json(g):
    return {
        "vi": g.vi,
        "vf": g.vf,
        "edges": [[a, b] for a, b in g.edges],
        "loops": [[v, "+" if f > 0 else "-"] for v, f in g.loops],
    }


def graph_from_json(obj):
    return new_graph(obj["vi"], obj["vf"], obj["edges"], obj.get("loops", []))


# --- formal linear combinations ---------------------------------------------


class GraphVector:
    """Formal rational linear combination of canonical graphs.

    Terms are stored canonical-with-sign-folded-in; zero coefficients are
    dropped.  Instances are value-like; arithmetic returns new vectors.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for g, c in terms.items() if isinstance(terms, dict) else terms:
                self.add_term(g, c)

    def add_term(self, g, coeff):
        coeff = Fraction(coeff)
        if coeff == 0:
            return
        sg = canonicalize(g)
        if sg.sign == 0:
            return
        key = sg.graph
        c = self.terms.get(key, Fraction(0)) + sg.sign * coeff
        if c == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = c

    @classmethod
    def single(cls, g, coeff=1):
        v = cls()
        v.add_term(g, coeff)
        return v

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = GraphVector()
        for g, c in self.terms.items():
            out.terms[g] = c
        for g, c in other.terms.items():
            s = out.terms.get(g, Fraction(0)) + c
            if s == 0:
                out.terms.pop(g, None)
            else:
                out.terms[g] = s
        return out

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        out = GraphVector()
        if scalar != 0:
            out.terms = {g: scalar * c for g, c in self.terms.items()}
        return out

    def __eq__(self, other):
        return isinstance(other, GraphVector) and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda t: t[0].key())

    def to_json(self):
        return [
            {"coeff": str(c), "graph": format_graph(g)}
            for g, c in self.items_sorted()
        ]

    @classmethod
    def from_json(cls, obj):
        v = cls()
        for item in obj:
            v.add_term(parse_graph(item["graph"]), Fraction(item["coeff"]))
        return v

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, s):
        return cls.from_json(json.loads(s))

    def __repr__(self):
        if not self.terms:
            return "GraphVector(0)"
        bits = [f"{c}*{format_graph(g)}" for g, c in self.items_sorted()]
        return "GraphVector(" + " + ".join(bits) + ")"
