"""Independently coded 4T relation generator and rank computation,
used as an oracle for the chord-algebra dimensions.  Works on words of
chord ids (first-occurrence labeling) with its own insertion mechanics
and a dense rational elimination."""

from fractions import Fraction

from knotgc.chords import enumerate_chords


def _word(diagram):
    """Diagram as a word of chord ids in first-occurrence order."""
    label = {}
    out = []
    for p in range(1, 2 * diagram.k + 1):
        q = diagram.partner(p)
        key = (min(p, q), max(p, q))
        if key not in label:
            label[key] = len(label)
        out.append(label[key])
    return tuple(out)


def _word_canon(word):
    label = {}
    out = []
    for c in word:
        if c not in label:
            label[c] = len(label)
        out.append(label[c])
    return tuple(out)


def _all_words(k):
    return sorted({_word(d) for d in enumerate_chords(k)})


def _oracle_relations(k):
    """4T relations generated on words: move one occurrence of a chord next
    to both occurrences of another chord; signs (left - right) at each."""
    rels = set()
    for w in _all_words(k):
        word = list(w)
        for pos in range(len(word)):
            moving = word[pos]
            rest = word[:pos] + word[pos + 1 :]
            for anchor in set(rest) - {moving}:
                spots = [i for i, c in enumerate(rest) if c == anchor]
                vec = {}
                for spot, base_sign in ((spots[0], +1), (spots[1], +1)):
                    for offset, side in ((0, +1), (1, -1)):
                        cand = rest[: spot + offset] + [moving] + rest[spot + offset :]
                        cand = _word_canon(tuple(cand))
                        coeff = base_sign * side
                        vec[cand] = vec.get(cand, 0) + coeff
                vec = {c: v for c, v in vec.items() if v}
                if vec:
                    rels.add(tuple(sorted(vec.items())))
    return [dict(r) for r in rels]


def _oracle_rank(rows, index):
    dense = []
    for row in rows:
        v = [Fraction(0)] * len(index)
        for key, c in row.items():
            v[index[key]] = Fraction(c)
        dense.append(v)
    rank = 0
    cols = len(index)
    pivot_rows = []
    for v in dense:
        v = v[:]
        for pr, pc in pivot_rows:
            if v[pc] != 0:
                f = v[pc]
                v = [a - f * b for a, b in zip(v, pr)]
        lead = next((i for i, a in enumerate(v) if a != 0), None)
        if lead is None:
            continue
        inv = Fraction(1) / v[lead]
        v = [a * inv for a in v]
        pivot_rows.append((v, lead))
        rank += 1
    return rank


def _word_isolated(word):
    k = len(word) // 2
    for c in range(k):
        i = word.index(c)
        j = len(word) - 1 - word[::-1].index(c)
        inner = word[i + 1 : j]
        if all(inner.count(x) % 2 == 0 for x in set(inner)):
            return True
    return False


def oracle_dimension(k, use_1t=True):
    words = _all_words(k)
    index = {w: i for i, w in enumerate(words)}
    rows = _oracle_relations(k)
    if use_1t:
        rows += [{w: 1} for w in words if _word_isolated(w)]
    return len(words) - _oracle_rank(rows, index)


