"""Chord diagrams on the oriented line, the 4T/1T quotient, and the
embedding into the graph complex at degree zero.

A diagram of order k is a perfect matching on positions 1..2k.  The
four-term relations are generated from partial diagrams with one floating
chord end: inserting the end just left/right of either endpoint of an
anchor chord, with signs +,-,-,+.  The one-term relation kills diagrams
with an isolated chord (one crossing no other chord).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from knotgc.errors import ParseError
from knotgc.graphs import new_graph

__all__ = [
    "ChordDiagram",
    "enumerate_chords",
    "has_isolated_chord",
    "four_term_relations",
    "algebra_dimension",
    "to_graph",
    "concat",
    "parse_chord",
    "format_chord",
]


@dataclass(frozen=True)
class ChordDiagram:
    k: int
    pairing: tuple  # ((a, b), ...) sorted, a < b, covering 1..2k

    def __post_init__(self):
        pts = sorted(p for ab in self.pairing for p in ab)
        if pts != list(range(1, 2 * self.k + 1)):
            raise ValueError(f"pairing does not cover 1..{2 * self.k}")

    def partner(self, p):
        for a, b in self.pairing:
            if a == p:
                return b
            if b == p:
                return a
        raise KeyError(p)


def _mk(pairs):
    norm = tuple(sorted(tuple(sorted(ab)) for ab in pairs))
    return ChordDiagram(len(norm), norm)


def enumerate_chords(k):
    """All (2k-1)!! matchings on 1..2k."""
    out = []

    def rec(points, acc):
        if not points:
            out.append(_mk(acc))
            return
        first = points[0]
        for i in range(1, len(points)):
            rec(points[1:i] + points[i + 1 :], acc + [(first, points[i])])

    rec(list(range(1, 2 * k + 1)), [])
    return out


def _crosses(c1, c2):
    a, b = c1
    c, d = c2
    return (a < c < b < d) or (c < a < d < b)


def has_isolated_chord(cd):
    for c1 in cd.pairing:
        if not any(_crosses(c1, c2) for c2 in cd.pairing if c2 != c1):
            return True
    return False


def _insert_point(pairs, slot):
    """Shift positions >= slot up by one; the new point sits at `slot`."""
    out = []
    for a, b in pairs:
        out.append((a + 1 if a >= slot else a, b + 1 if b >= slot else b))
    return out


def four_term_relations(k):
    """4T relation vectors as {ChordDiagram: coeff} dicts.

    Generated from partial diagrams: k-1 full chords on shifted positions
    plus one anchored half-chord; the floating end is inserted at the four
    slots adjacent to an anchor chord's endpoints with signs +,-,-,+.
    """
    rels = []
    if k < 2:
        return rels
    for partial in enumerate_chords(k - 1):
        # place the fixed end of the floating chord at any of 2k-1 slots
        for t in range(1, 2 * k):
            base = _insert_point(partial.pairing, t)  # points 1..2k-1, t is the fixed end
            chords = [ab for ab in base if t not in ab]
            for anchor in chords:
                vec = {}
                for endpoint, side_sign in (
                    (anchor[0], +1),
                    (anchor[0], -1),
                    (anchor[1], +1),
                    (anchor[1], -1),
                ):
                    slot = endpoint if side_sign > 0 else endpoint + 1
                    pairs = _insert_point(base, slot)
                    t2 = t + 1 if t >= slot else t
                    diagram = _mk(pairs + [(t2, slot)])
                    # (left of p) - (right of p) + (left of q) - (right of q) = 0
                    coeff = 1 if side_sign > 0 else -1
                    vec[diagram] = vec.get(diagram, 0) + coeff
                vec = {d: c for d, c in vec.items() if c != 0}
                if vec:
                    rels.append(vec)
    # dedupe
    seen = set()
    out = []
    for vec in rels:
        key = tuple(sorted((d.pairing, c) for d, c in vec.items()))
        if key not in seen and tuple(sorted((d.pairing, -c) for d, c in vec.items())) not in seen:
            seen.add(key)
            out.append(vec)
    return out


def algebra_dimension(k, use_1t=True, relations=None):
    """dim of span(diagrams) / span(4T [+ 1T])."""
    diagrams = enumerate_chords(k)
    index = {d: i for i, d in enumerate(diagrams)}
    rows = []
    for vec in relations if relations is not None else four_term_relations(k):
        rows.append({index[d]: Fraction(c) for d, c in vec.items()})
    if use_1t:
        for d in diagrams:
            if has_isolated_chord(d):
                rows.append({index[d]: Fraction(1)})
    return len(diagrams) - _rank(rows)


def _rank(rows):
    pivots = {}
    for row in rows:
        row = dict(row)
        while row:
            lead = min(row)
            if lead in pivots:
                f = row[lead]
                for c, v in pivots[lead].items():
                    nv = row.get(c, Fraction(0)) - f * v
                    if nv == 0:
                        row.pop(c, None)
                    else:
                        row[c] = nv
            else:
                inv = Fraction(1) / row[lead]
                pivots[lead] = {c: v * inv for c, v in row.items()}
                break
    return len(pivots)


def to_graph(cd):
    """Chord diagram as a degree-zero graph: 2k interval vertices, one
    low->high edge per chord."""
    return new_graph(2 * cd.k, 0, list(cd.pairing), [])


def concat(cd1, cd2):
    """Concatenation product (cd2 shifted after cd1)."""
    shift = 2 * cd1.k
    return _mk(list(cd1.pairing) + [(a + shift, b + shift) for a, b in cd2.pairing])


def format_chord(cd):
    return "C[" + ",".join(f"{a}-{b}" for a, b in cd.pairing) + "]"


def parse_chord(text):
    s = text.strip()
    if not (s.startswith("C[") and s.endswith("]")):
        raise ParseError("expected C[...]", 0)
    body = s[2:-1]
    pairs = []
    for part in body.split(","):
        if "-" not in part:
            raise ParseError(f"chord {part!r} missing '-'", text.find(part))
        a, b = part.split("-")
        pairs.append((int(a), int(b)))
    return _mk(pairs)
