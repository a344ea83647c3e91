from fractions import Fraction

import pytest

from knotgc.cohomology import enumerate_basis, max_degree
from knotgc.differential import Contraction, contract, delta, delta_vec, legal_contractions
from knotgc.errors import IllegalContraction, MixedGrading
from knotgc.graphs import GraphVector, format_graph, grading, parse_graph

CHORD_V = parse_graph("G[4,0;E{1>3,2>4}]")
TRIPOD = parse_graph("G[3,1;E{1>4,2>4,3>4}]")


class TestContract:
    def test_tripod_edge_contraction(self):
        sg = contract(TRIPOD, "edge", 2)  # edge 3 -> 4
        assert format_graph(sg.graph) == "G[3,0;E{1>3,2>3}]"
        assert sg.sign != 0

    def test_chord_arc_between_1_and_2(self):
        sg = contract(CHORD_V, "arc", 1)
        assert format_graph(sg.graph) == "G[3,0;E{1>2,1>3}]"

    def test_chord_arc_between_3_and_4(self):
        sg = contract(CHORD_V, "arc", 3)
        assert format_graph(sg.graph) == "G[3,0;E{1>3,2>3}]"
        assert sg.sign != 0

    def test_arc_contraction_makes_loop(self):
        g = parse_graph("G[4,0;E{1>2,3>4}]")
        sg = contract(g, "arc", 1)
        assert format_graph(sg.graph) == "G[3,0;E{2>3};L{1+}]"

    def test_double_edge_result_is_zero(self):
        # both chords land on the merged pair after contracting arc 1-2
        g = parse_graph("G[4,1;E{1>5,2>5,3>5,4>5}]")
        sg = contract(g, "arc", 1)
        assert sg.sign == 0

    def test_interval_interval_edge_illegal(self):
        with pytest.raises(IllegalContraction):
            contract(CHORD_V, "edge", 0)

    def test_out_of_range_arc(self):
        with pytest.raises(IllegalContraction):
            contract(CHORD_V, "arc", 4)

    def test_contraction_records(self):
        moves = legal_contractions(TRIPOD)
        kinds = sorted(c.kind for c in moves)
        assert kinds == ["arc", "arc", "edge", "edge", "edge"]
        assert all(isinstance(c, Contraction) for c in moves)


class TestDelta:
    def test_trivalent_cocycle(self):
        v = GraphVector.single(CHORD_V, 1) + GraphVector.single(TRIPOD, -1)
        assert delta_vec(v).is_zero()

    def test_tripod_alone_not_closed(self):
        assert not delta(TRIPOD).is_zero()

    def test_grading_shift(self):
        g = parse_graph("G[5,0;E{1>3,1>4,2>5}]")
        for term in delta(g).terms:
            gr = grading(term)
            assert (gr.ord, gr.deg) == (3, 2)

    def test_delta_vec_zero(self):
        assert delta_vec(GraphVector()).is_zero()

    def test_delta_vec_linearity(self):
        q = Fraction(3, 7)
        v = GraphVector.single(TRIPOD, q)
        expected = q * delta(TRIPOD)
        assert delta_vec(v) == expected

    def test_mixed_grading_rejected(self):
        v = GraphVector.single(CHORD_V, 1) + GraphVector.single(
            parse_graph("G[2,0;E{1>2}]"), 1
        )
        with pytest.raises(MixedGrading):
            delta_vec(v)


class TestDeltaSquared:
    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_delta_squared_small_orders(self, k):
        for l in range(0, max_degree(k) + 1):
            for g in enumerate_basis(k, l):
                assert delta_vec(delta(g)).is_zero(), format_graph(g)


class TestSignRuleCovariance:
    def test_delta_commutes_with_presentation_change(self):
        from knotgc.graphs import Graph, canonicalize

        g = parse_graph("G[4,1;E{1>3,1>5,2>5,4>5}]")
        # same object presented with two reversed edges: class is +g
        g2 = Graph(4, 1, ((3, 1), (1, 5), (5, 2), (4, 5)), ())
        sg = canonicalize(g2)
        assert sg.graph == g and sg.sign == 1
        d1 = delta(g)
        d2 = delta(g2)
        assert d1 == d2
