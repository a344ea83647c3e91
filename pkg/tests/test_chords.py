"""Chord diagram tests; the independent 4T oracle lives in chord_oracle."""

import pytest

from knotgc.chords import (
    algebra_dimension,
    concat,
    enumerate_chords,
    format_chord,
    four_term_relations,
    has_isolated_chord,
    parse_chord,
    to_graph,
)
from knotgc.graphs import format_graph, grading


from chord_oracle import _word, _word_isolated, oracle_dimension

# --- tests ---------------------------------------------------------------------


class TestEnumeration:
    @pytest.mark.parametrize("k,count", [(1, 1), (2, 3), (3, 15)])
    def test_double_factorial_counts(self, k, count):
        assert len(enumerate_chords(k)) == count

    def test_no_duplicates(self):
        ds = enumerate_chords(3)
        assert len(set(ds)) == len(ds)


class TestDimensions:
    @pytest.mark.parametrize("k,dim", [(2, 1), (3, 1), (4, 3)])
    def test_with_one_term(self, k, dim):
        assert algebra_dimension(k, use_1t=True) == dim

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_oracle_agreement(self, k):
        assert algebra_dimension(k, use_1t=True) == oracle_dimension(k, use_1t=True)
        assert algebra_dimension(k, use_1t=False) == oracle_dimension(k, use_1t=False)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_one_term_monotone(self, k):
        assert algebra_dimension(k, use_1t=True) <= algebra_dimension(k, use_1t=False)


class TestIsolatedChords:
    def test_nested_is_isolated(self):
        assert has_isolated_chord(parse_chord("C[1-4,2-3]"))

    def test_crossing_is_not(self):
        assert not has_isolated_chord(parse_chord("C[1-3,2-4]"))

    def test_matches_oracle(self):
        for d in enumerate_chords(3):
            assert has_isolated_chord(d) == _word_isolated(_word(d))


class TestToGraph:
    def test_interleaved(self):
        g = to_graph(parse_chord("C[1-3,2-4]"))
        assert format_graph(g) == "G[4,0;E{1>3,2>4}]"
        gr = grading(g)
        assert (gr.ord, gr.deg) == (2, 0)

    def test_single_chord(self):
        assert format_graph(to_graph(parse_chord("C[1-2]"))) == "G[2,0;E{1>2}]"

    def test_nested(self):
        g = to_graph(parse_chord("C[1-4,2-3]"))
        assert format_graph(g) == "G[2,0;E{1>4,2>3}]".replace("G[2,0", "G[4,0")
        gr = grading(g)
        assert (gr.ord, gr.deg) == (2, 0)

    def test_all_diagrams_land_in_degree_zero(self):
        for d in enumerate_chords(3):
            gr = grading(to_graph(d))
            assert gr.deg == 0 and gr.ord == 3


class TestProduct:
    def test_concat_counts(self):
        a = parse_chord("C[1-2]")
        b = parse_chord("C[1-3,2-4]")
        c = concat(a, b)
        assert c.k == 3
        assert format_chord(c) == "C[1-2,3-5,4-6]"
