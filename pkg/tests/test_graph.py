"""Exchange-graph model: construction, validation, weights, serialization."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import scanplan as sp
from scanplan.graph import effective_weight, format_rational, workload_weight

from conftest import build_quiet, random_graph


def test_double_star_shape(double_star):
    assert double_star.num_vertices == 8
    assert double_star.num_edges == 7
    assert len(double_star.v1) == 4 and len(double_star.v2) == 4


def test_smallest_admissible_instance(single_edge):
    assert single_edge.num_vertices == 2
    assert single_edge.num_edges == 1
    assert single_edge.scan_weight(sp.VertexId(1, 0)) == 5
    assert single_edge.scan_weight(sp.VertexId(2, 0)) == 3


def test_isolated_vertex_pruned_with_warning():
    with pytest.warns(UserWarning, match="pruned 1 isolated"):
        g = sp.build_graph([1, 1], [1], [(0, 0, 1)])
    assert g.num_vertices == 2
    assert g.pruned == (sp.VertexId(1, 1),)
    assert sp.VertexId(1, 1) not in g


def test_duplicate_edge_rejected():
    with pytest.raises(sp.DuplicateEdge):
        sp.build_graph([1], [1], [(0, 0, 1), (0, 0, 2)])


def test_negative_weight_rejected():
    with pytest.raises(sp.NegativeWeight):
        sp.build_graph([-1], [1], [(0, 0, 1)])
    with pytest.raises(sp.NegativeWeight):
        sp.build_graph([1], [1], [(0, 0, -2)])
    with pytest.raises(sp.ValidationError):
        sp.build_graph([float("nan")], [1], [(0, 0, 1)])


def test_index_out_of_range_rejected():
    with pytest.raises(sp.IndexOutOfRange):
        sp.build_graph([1], [1], [(0, 1, 1)])
    with pytest.raises(sp.IndexOutOfRange):
        sp.build_graph([1], [1], [(2, 0, 1)])


def test_zero_cost_edges_admitted():
    # zero verification cost does not excuse the edge from coverage
    g = sp.build_graph([1], [1], [(0, 0, 0)])
    assert g.num_edges == 1
    assert not sp.is_admissible(g, sp.Policy(g.vertex_ids, ()))


def test_effective_weight_p1_double_star(double_star):
    # hub on side 1 has degree 4; its workload price is alpha2 * 4
    obj = sp.Objective.p1(alpha1=2, alpha2=1)
    a1 = sp.VertexId(1, 0)
    assert effective_weight(double_star, a1, obj) == 4
    # independent recomputation straight from the incident edge costs
    inc = double_star.incidence()
    assert effective_weight(double_star, a1, obj) == sum(e.cost for e in inc.edges_at(a1)) * 1
    # a leaf on side 2 is priced with alpha1
    b2 = sp.VertexId(2, 1)
    assert effective_weight(double_star, b2, obj) == 2


def test_effective_weight_p2_is_scan_size():
    g = sp.build_graph([37], [4], [(0, 0, 1)])
    assert effective_weight(g, sp.VertexId(1, 0), sp.Objective.p2()) == 37


def test_effective_weight_p3_zero_omega_collapses(double_star):
    p2 = sp.Objective.p2()
    p3 = sp.Objective.p3(alpha1=3, alpha2=5, omega=0)
    for vid in double_star.vertex_ids:
        assert effective_weight(double_star, vid, p3) == effective_weight(double_star, vid, p2)


def test_effective_weight_monotone_in_omega(double_star):
    omegas = [Fraction(0), Fraction(1, 3), Fraction(1), Fraction(7, 2), Fraction(10)]
    for vid in double_star.vertex_ids:
        values = [
            effective_weight(double_star, vid, sp.Objective.p3(2, 3, w)) for w in omegas
        ]
        assert values == sorted(values)


def test_inertia_override_replaces_scan_size():
    g = sp.build_graph([10], [10], [(0, 0, 2)], v1_inertia={0: 99})
    v = sp.VertexId(1, 0)
    assert effective_weight(g, v, sp.Objective.p2()) == 99
    # p3 composes the override with the workload term
    assert effective_weight(g, v, sp.Objective.p3(1, 1, 1)) == 99 + 2
    # p1 ignores scan size entirely, so the override is irrelevant
    assert effective_weight(g, v, sp.Objective.p1(1, 1)) == 2


def test_unknown_vertex_rejected(double_star):
    with pytest.raises(sp.UnknownVertex):
        effective_weight(double_star, sp.VertexId(1, 99), sp.Objective.p2())


def test_degree_sum_is_twice_edge_count():
    rng = random.Random(11)
    for _ in range(25):
        g = random_graph(rng)
        inc = g.incidence()
        assert sum(inc.degree(vid) for vid in g.vertex_ids) == 2 * g.num_edges


def test_incidence_lists_cover_each_edge_twice(double_star):
    counts = {e.key: 0 for e in double_star.edges}
    for _, edges in double_star.incidence().items():
        for e in edges:
            counts[e.key] += 1
    assert set(counts.values()) == {2}


def test_workload_weight_sides():
    g = sp.build_graph([1, 1], [1], [(0, 0, 3), (1, 0, 5)])
    assert workload_weight(g, sp.VertexId(1, 0), 7, 2) == 2 * 3
    assert workload_weight(g, sp.VertexId(2, 0), 7, 2) == 7 * 8


# -- serialization ---------------------------------------------------------


def test_round_trip_identity(double_star):
    text = sp.dumps_graph(double_star)
    again = sp.loads_graph(text)
    assert sp.dumps_graph(again) == text
    assert again.edge_keys() == double_star.edge_keys()


def test_round_trip_preserves_exotic_rationals():
    g = sp.build_graph(
        [Fraction(1, 3), Fraction(1, 10)],
        [Fraction(7, 2)],
        [(0, 0, Fraction(2, 7)), (1, 0, 1)],
        v1_inertia={0: Fraction(5, 6)},
    )
    again = sp.loads_graph(sp.dumps_graph(g))
    assert again.vertex(sp.VertexId(1, 0)).scan_size == Fraction(1, 3)
    assert again.vertex(sp.VertexId(1, 0)).inertia == Fraction(5, 6)
    assert again.vertex(sp.VertexId(1, 1)).scan_size == Fraction(1, 10)
    assert again.edge_cost((sp.VertexId(1, 0), sp.VertexId(2, 0))) == Fraction(2, 7)


def test_decimal_strings_parse_exactly():
    text = """
    {"v1": [{"id": 0, "scan_size": 0.1}],
     "v2": [{"id": 0, "scan_size": 2.5}],
     "edges": [{"u": 0, "v": 0, "cost": 0.3}]}
    """
    g = sp.loads_graph(text)
    assert g.vertex(sp.VertexId(1, 0)).scan_size == Fraction(1, 10)
    assert g.edge_cost((sp.VertexId(1, 0), sp.VertexId(2, 0))) == Fraction(3, 10)


def test_edge_cost_defaults_to_one():
    text = '{"v1": [{"id": 0, "scan_size": 1}], "v2": [{"id": 0, "scan_size": 1}], "edges": [{"u": 0, "v": 0}]}'
    g = sp.loads_graph(text)
    assert g.edge_cost((sp.VertexId(1, 0), sp.VertexId(2, 0))) == 1


def test_malformed_json_raises_format_error():
    with pytest.raises(sp.GraphFormatError):
        sp.loads_graph("{not json")
    with pytest.raises(sp.GraphFormatError):
        sp.loads_graph('{"v1": 3, "v2": [], "edges": []}')
    with pytest.raises(sp.GraphFormatError):
        sp.loads_graph("[1, 2, 3]")


def test_format_rational_tokens():
    assert format_rational(Fraction(4)) == "4"
    assert format_rational(Fraction(7, 2)) == "3.5"
    assert format_rational(Fraction(1, 10)) == "0.1"
    assert format_rational(Fraction(-3, 8)) == "-0.375"
    assert format_rational(Fraction(1, 3)) == "1/3"


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_round_trip_identity_property(data):
    n1 = data.draw(st.integers(1, 4))
    n2 = data.draw(st.integers(1, 4))
    pairs = [(i, j) for i in range(n1) for j in range(n2)]
    chosen = data.draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    frac = st.fractions(min_value=0, max_value=20, max_denominator=9)
    w1 = [data.draw(frac) for _ in range(n1)]
    w2 = [data.draw(frac) for _ in range(n2)]
    edges = [(i, j, data.draw(frac)) for i, j in chosen]
    g = build_quiet(w1, w2, edges)
    again = sp.loads_graph(sp.dumps_graph(g))
    assert sp.dumps_graph(again) == sp.dumps_graph(g)
    assert again.edge_keys() == g.edge_keys()
    for vid in g.vertex_ids:
        assert again.vertex(vid).scan_size == g.vertex(vid).scan_size


def test_graphs_hold_no_duplicate_or_cross_side_ids():
    with pytest.raises(sp.ValidationError):
        sp.ExchangeGraph.from_vertices([(0, 1, None), (0, 2, None)], [(0, 1, None)], [(0, 0, 1)])
