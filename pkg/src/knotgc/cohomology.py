"""Bases of the graph complex, differential matrices, and exact cohomology.

For order k and degree l the vertex counts are pinned by the grading:
e = k + vf and vi = 2k - vf - l, so enumeration runs over vf, loop subsets,
and lexicographic edge subsets with degree-feasibility pruning.  All linear
algebra is exact over Fraction.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
from fractions import Fraction
from math import gcd
from pathlib import Path

from knotgc.differential import delta
from knotgc.errors import NoCohomology
from knotgc.graphs import (
    Graph,
    GraphVector,
    canonicalize,
    format_graph,
    grading,
    new_graph,
    parse_graph,
)

__all__ = [
    "BasisTable",
    "SparseRationalMatrix",
    "enumerate_basis",
    "delta_matrix",
    "betti",
    "euler_characteristic",
    "kernel_representative",
    "cohomology_summary",
    "get_cache_dir",
    "clear_cache",
    "cache_stat",
]


# --- sparse exact matrices ---------------------------------------------------


class SparseRationalMatrix:
    """Row-sparse matrix over exact rationals."""

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            for (r, c), v in entries.items():
                self[r, c] = v

    def __setitem__(self, rc, value):
        value = Fraction(value)
        if value == 0:
            self.entries.pop(rc, None)
        else:
            self.entries[rc] = value

    def __getitem__(self, rc):
        return self.entries.get(rc, Fraction(0))

    def row_dicts(self):
        rows = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows

    def apply(self, vec):
        """Matrix times a dense column vector (list of Fractions)."""
        out = [Fraction(0)] * self.rows
        for (r, c), v in self.entries.items():
            out[r] += v * vec[c]
        return out

    def matmul(self, other):
        assert self.cols == other.rows
        cols_of_other = {}
        for (r, c), v in other.entries.items():
            cols_of_other.setdefault(c, []).append((r, v))
        out = SparseRationalMatrix(self.rows, other.cols)
        rows_self = {}
        for (r, c), v in self.entries.items():
            rows_self.setdefault(r, []).append((c, v))
        for r, terms in rows_self.items():
            row_lookup = dict(terms)
            for c2 in cols_of_other:
                s = Fraction(0)
                for (mid, v2) in cols_of_other[c2]:
                    v1 = row_lookup.get(mid)
                    if v1 is not None:
                        s += v1 * v2
                if s != 0:
                    out[r, c2] = s
        return out

    def is_zero(self):
        return not self.entries

    def rank(self):
        return len(_echelon(self.row_dicts())[0])

    def nullspace(self):
        """Primitive-integer basis of the right kernel."""
        pivots, rows = _echelon(self.row_dicts())
        pivot_cols = {c: row for c, row in pivots.items()}
        free_cols = [c for c in range(self.cols) if c not in pivot_cols]
        basis = []
        for f in free_cols:
            vec = [Fraction(0)] * self.cols
            vec[f] = Fraction(1)
            # back-substitute pivot coordinates (rows are in RREF)
            for c, row in pivot_cols.items():
                vec[c] = -row.get(f, Fraction(0))
            basis.append(_primitive(vec))
        return basis


def _echelon(rows):
    """Reduced row echelon form of a list of sparse row dicts.

    Returns ({pivot_col: row_dict}, all_rows); each pivot row is scaled to a
    leading 1 and fully reduced against the others.
    """
    pivots = {}
    for row in rows:
        row = dict(row)
        while row:
            # reduce by existing pivots
            changed = True
            while changed:
                changed = False
                for c in sorted(row):
                    if c in pivots and row[c] != 0:
                        factor = row[c]
                        for c2, v2 in pivots[c].items():
                            nv = row.get(c2, Fraction(0)) - factor * v2
                            if nv == 0:
                                row.pop(c2, None)
                            else:
                                row[c2] = nv
                        changed = True
                        break
            if not row:
                break
            lead = min(row)
            inv = Fraction(1) / row[lead]
            row = {c: v * inv for c, v in row.items()}
            # eliminate the new pivot column from older pivot rows
            for c0, r0 in pivots.items():
                if lead in r0:
                    f = r0[lead]
                    for c2, v2 in row.items():
                        nv = r0.get(c2, Fraction(0)) - f * v2
                        if nv == 0:
                            r0.pop(c2, None)
                        else:
                            r0[c2] = nv
            pivots[lead] = row
            break
    return pivots, rows


def _primitive(vec):
    """Scale a rational vector to coprime integers with positive leading entry."""
    den = 1
    for v in vec:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return ints


# --- basis enumeration -------------------------------------------------------


class BasisTable:
    """Ordered canonical basis of D^{k,l}."""

    def __init__(self, k, l, graphs):
        self.k = k
        self.l = l
        self.graphs = sorted(graphs, key=lambda g: g.key())
        self.index = {g: i for i, g in enumerate(self.graphs)}

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)


def _edge_subsets(m, n_choose, minreq, pairs):
    """Lexicographic n_choose-subsets of `pairs` meeting per-vertex minimum
    edge-end requirements, with deficiency and vertex-closure pruning."""
    npairs = len(pairs)
    last_idx = [-1] * (m + 1)
    for idx, (a, b) in enumerate(pairs):
        last_idx[a] = idx
        last_idx[b] = idx
    deg = [0] * (m + 1)
    chosen = []

    total_deficit = sum(minreq[1:])

    def rec(start, remaining, deficit):
        if deficit > 2 * remaining:
            return
        if remaining == 0:
            yield tuple(chosen)
            return
        for pos in range(start, npairs - remaining + 1):
            # vertices whose last incident pair lies strictly before pos can
            # no longer gain edges; bail out if any is still deficient
            feasible = True
            for v in range(1, m + 1):
                if last_idx[v] < pos and deg[v] < minreq[v]:
                    feasible = False
                    break
            if not feasible:
                return
            a, b = pairs[pos]
            d2 = deficit
            if deg[a] < minreq[a]:
                d2 -= 1
            if deg[b] < minreq[b]:
                d2 -= 1
            deg[a] += 1
            deg[b] += 1
            chosen.append(pos)
            yield from rec(pos + 1, remaining - 1, d2)
            chosen.pop()
            deg[a] -= 1
            deg[b] -= 1

    yield from rec(0, n_choose, total_deficit)


def _connected(vi, vf, edges):
    m = vi + vf
    parent = list(range(m + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in range(2, vi + 1):
        parent[find(v)] = find(1)
    for a, b in edges:
        parent[find(a)] = find(b)
    root = find(1)
    return all(find(v) == root for v in range(1, m + 1))


def enumerate_basis(k, l, cache=True):
    """All canonical graphs with ord k, deg l."""
    cached = _load_basis(k, l) if cache else None
    if cached is not None:
        return cached

    found = {}
    for vf in range(0, 2 * k - l + 1):
        vi = 2 * k - vf - l
        if vi < 0:
            continue
        e = k + vf
        if vi == 0:
            if vf == 0 and e == 0:
                g = new_graph(0, 0, [], [])
                found[g.key()] = g
            continue
        m = vi + vf
        pairs = [(a, b) for a in range(1, m + 1) for b in range(a + 1, m + 1)]
        # loop subsets over interval vertices (at most one loop per vertex)
        import itertools as _it

        for nl in range(0, min(vi, e) + 1):
            for loopset in _it.combinations(range(1, vi + 1), nl):
                n_edges = e - nl
                if n_edges < 0 or n_edges > len(pairs):
                    continue
                minreq = [0] * (m + 1)
                for v in range(1, m + 1):
                    if v <= vi:
                        minreq[v] = 0 if v in loopset else 1
                    else:
                        minreq[v] = 3
                if sum(minreq[1:]) > 2 * n_edges:
                    continue
                for subset in _edge_subsets(m, n_edges, minreq, pairs):
                    edges = [pairs[i] for i in subset]
                    if not _connected(vi, vf, edges):
                        continue
                    g = Graph(vi, vf, tuple(edges), tuple((v, 1) for v in loopset))
                    sg = canonicalize(g)
                    if sg.sign == 0:
                        continue
                    found.setdefault(sg.graph.key(), sg.graph)

    table = BasisTable(k, l, list(found.values()))
    if cache:
        _store_basis(table)
    return table


# --- differential matrices and cohomology ------------------------------------


def delta_matrix(k, l, cache=True):
    """Matrix of delta: D^{k,l} -> D^{k,l+1}; column j is delta(basis[j])."""
    src = enumerate_basis(k, l, cache=cache)
    dst = enumerate_basis(k, l + 1, cache=cache)
    cached = _load_matrix(k, l, len(dst), len(src)) if cache else None
    if cached is not None and _spot_check(cached, src, dst):
        return cached
    mat = SparseRationalMatrix(len(dst), len(src))
    for j, g in enumerate(src):
        for term, coeff in delta(g).terms.items():
            i = dst.index.get(term)
            assert i is not None, f"delta term {format_graph(term)} missing from basis ({k},{l + 1})"
            mat[i, j] = mat[i, j] + coeff
    if cache:
        _store_matrix(k, l, mat)
    return mat


def betti(k, l, cache=True):
    """dim ker delta_(k,l) - rank delta_(k,l-1)."""
    dim = len(enumerate_basis(k, l, cache=cache))
    if dim == 0:
        return 0
    rank_out = delta_matrix(k, l, cache=cache).rank()
    rank_in = delta_matrix(k, l - 1, cache=cache).rank() if l >= 1 else 0
    return dim - rank_out - rank_in


def max_degree(k):
    """Largest l with a (possibly) nonempty basis: vi >= 1 forces l <= 2k - 1."""
    return max(2 * k - 1, 0)


def euler_characteristic(k, cache=True):
    chi = 0
    for l in range(0, max_degree(k) + 1):
        chi += (-1) ** l * len(enumerate_basis(k, l, cache=cache))
    return chi


def kernel_representative(k, l, cache=True):
    """Basis of ker delta_(k,l) modulo im delta_(k,l-1), as GraphVectors
    with coprime integer coefficients."""
    b = betti(k, l, cache=cache)
    if b < 1:
        raise NoCohomology(f"H^{{{k},{l}}} = 0")
    basis = enumerate_basis(k, l, cache=cache)
    ker = delta_matrix(k, l, cache=cache).nullspace()
    im_vectors = []
    if l >= 1:
        m_in = delta_matrix(k, l - 1, cache=cache)
        src_dim = m_in.cols
        for j in range(src_dim):
            col = [m_in[i, j] for i in range(m_in.rows)]
            if any(v != 0 for v in col):
                im_vectors.append(col)
    # reduce kernel vectors against the image, keep the independent ones
    pivots, _ = _echelon([{i: Fraction(v) for i, v in enumerate(vec) if v != 0} for vec in im_vectors])
    reps = []
    rep_rows = dict(pivots)
    for vec in ker:
        row = {i: Fraction(v) for i, v in enumerate(vec) if v != 0}
        row = _reduce_against(row, rep_rows)
        if row:
            lead = min(row)
            inv = Fraction(1) / row[lead]
            norm = {c: v * inv for c, v in row.items()}
            rep_rows[lead] = norm
            dense = [row.get(i, Fraction(0)) for i in range(len(basis))]
            reps.append(_primitive(dense))
        if len(reps) == b:
            break
    out = []
    for vec in reps:
        gv = GraphVector()
        for i, c in enumerate(vec):
            if c != 0:
                gv.add_term(basis.graphs[i], Fraction(c))
        out.append(gv)
    return out


def generator_probe(k=3, l=1, multiset=(2, 2, 2, 2, 1, 1, 1, 1, 1), probe_graph=None, trials=400, cache=True):
    """Structure probe of a one-dimensional cohomology class.

    Reports (a) whether the class admits a representative in which
    ``probe_graph`` carries a nonzero coefficient, and (b) a search over
    class representatives for one with support <= len(multiset) whose
    absolute coefficients match ``multiset`` (coprime integer scaling).

    The search walks deterministic pseudo-random coordinate orders and
    greedily eliminates coordinates of the generator against the image;
    it is a best-effort probe, not a completeness guarantee.
    """
    basis = enumerate_basis(k, l, cache=cache)
    n = len(basis)
    rep = kernel_representative(k, l, cache=cache)[0]
    dense = [Fraction(0)] * n
    for g, c in rep.terms.items():
        dense[basis.index[g]] = c

    m_in = delta_matrix(k, l - 1, cache=cache) if l >= 1 else None
    image = []
    if m_in is not None:
        for j in range(m_in.cols):
            col = [m_in[i, j] for i in range(m_in.rows)]
            if any(col):
                image.append(col)

    member = None
    if probe_graph is not None:
        i0 = basis.index.get(probe_graph)
        if i0 is None:
            member = False
        else:
            member = dense[i0] != 0 or any(col[i0] != 0 for col in image)

    target = sorted(multiset)
    found = None
    sparsest = None
    for trial in range(trials):
        order = list(range(n))
        random.Random(trial).shuffle(order)
        pos = {c: i for i, c in enumerate(order)}
        rows = [{pos[i]: x for i, x in enumerate(w) if x != 0} for w in image]
        piv, _ = _echelon(rows)
        r0 = {pos[i]: x for i, x in enumerate(dense) if x != 0}
        red = _reduce_against(r0, piv)
        if not red:
            continue
        vec = [Fraction(0)] * n
        inv = {v: kk for kk, v in pos.items()}
        for p, x in red.items():
            vec[inv[p]] = x
        prim = _primitive(vec)
        supp = sum(1 for x in prim if x != 0)
        if sparsest is None or supp < sparsest[0]:
            sparsest = (supp, prim)
        if supp <= len(target) and sorted(abs(x) for x in prim if x != 0) == target:
            found = prim
            break

    def to_vector(prim):
        gv = GraphVector()
        for i, c in enumerate(prim):
            if c != 0:
                gv.add_term(basis.graphs[i], Fraction(c))
        return gv

    return {
        "betti": betti(k, l, cache=cache),
        "probe_graph_member": member,
        "multiset_found": found is not None,
        "multiset_vector": to_vector(found) if found is not None else None,
        "sparsest_support": sparsest[0] if sparsest else None,
        "sparsest_vector": to_vector(sparsest[1]) if sparsest else None,
    }


def _reduce_against(row, pivot_rows):
    row = dict(row)
    changed = True
    while changed and row:
        changed = False
        for c in sorted(row):
            if c in pivot_rows:
                f = row[c]
                for c2, v2 in pivot_rows[c].items():
                    nv = row.get(c2, Fraction(0)) - f * v2
                    if nv == 0:
                        row.pop(c2, None)
                    else:
                        row[c2] = nv
                changed = True
                break
    return row


def cohomology_summary(k, l, cache=True):
    """CLI-facing record for one grading."""
    dim = len(enumerate_basis(k, l, cache=cache))
    rank_out = delta_matrix(k, l, cache=cache).rank() if dim else 0
    rank_in = delta_matrix(k, l - 1, cache=cache).rank() if l >= 1 else 0
    return {
        "k": k,
        "l": l,
        "dim": dim,
        "rank_out": rank_out,
        "rank_in": rank_in,
        "betti": dim - rank_out - rank_in if dim else 0,
    }


# --- advisory disk cache ------------------------------------------------------

_CODE_VERSION = None


def _code_version():
    global _CODE_VERSION
    if _CODE_VERSION is None:
        h = hashlib.sha1()
        base = Path(__file__).parent
        for name in ("graphs.py", "differential.py"):
            h.update((base / name).read_bytes())
        _CODE_VERSION = h.hexdigest()[:12]
    return _CODE_VERSION


def get_cache_dir():
    env = os.environ.get("GC_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "knotgc"


def _basis_path(k, l):
    return get_cache_dir() / f"basis_{k}_{l}_{_code_version()}.json"


def _matrix_path(k, l):
    return get_cache_dir() / f"delta_{k}_{l}_{_code_version()}.json"


def _load_basis(k, l):
    p = _basis_path(k, l)
    if not p.exists():
        return None
    try:
        names = json.loads(p.read_text())
        return BasisTable(k, l, [parse_graph(s) for s in names])
    except (ValueError, KeyError):
        return None


def _store_basis(table):
    p = _basis_path(table.k, table.l)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps([format_graph(g) for g in table.graphs]))


def _load_matrix(k, l, rows, cols):
    p = _matrix_path(k, l)
    if not p.exists():
        return None
    try:
        data = json.loads(p.read_text())
        if data["rows"] != rows or data["cols"] != cols:
            return None
        mat = SparseRationalMatrix(rows, cols)
        for r, c, v in data["entries"]:
            mat[r, c] = Fraction(v)
        return mat
    except (ValueError, KeyError):
        return None


def _store_matrix(k, l, mat):
    p = _matrix_path(k, l)
    p.parent.mkdir(parents=True, exist_ok=True)
    entries = [[r, c, str(v)] for (r, c), v in sorted(mat.entries.items())]
    p.write_text(json.dumps({"rows": mat.rows, "cols": mat.cols, "entries": entries}))


def _spot_check(mat, src, dst):
    """Revalidate a cached matrix by recomputing a few columns."""
    if not len(src):
        return True
    rng = random.Random(0)
    for j in rng.sample(range(len(src)), min(3, len(src))):
        expected = {}
        for term, coeff in delta(src.graphs[j]).terms.items():
            expected[dst.index[term]] = coeff
        actual = {r: v for (r, c), v in mat.entries.items() if c == j}
        if expected != actual:
            return False
    return True


def clear_cache():
    d = get_cache_dir()
    n = 0
    if d.exists():
        for p in d.glob("*.json"):
            p.unlink()
            n += 1
    return n


def cache_stat():
    d = get_cache_dir()
    files = sorted(p.name for p in d.glob("*.json")) if d.exists() else []
    return {"dir": str(d), "files": files, "count": len(files)}
