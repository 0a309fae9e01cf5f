import numpy as np
import pytest
from hypothesis import given

from denomred.errors import Disconnected, EmptyGraph, InactiveEdge, TadpoleEdge, UnknownName
from denomred.graph import (
    build_graph,
    catalog,
    cycle,
    format_graph_text,
    full_incidence,
    g8,
    incidence_matrix,
    iter_graphs,
    minor,
    parse_graph_text,
    parse_two_digit,
    spanning_trees,
    wheel,
)

from strategies import graphs

TRIANGLE = build_graph([(1, 2), (2, 3), (1, 3)])
BANANA = build_graph([(1, 2), (1, 2)])


def kirchhoff(g):
    lap = np.zeros((g.num_vertices, g.num_vertices))
    for u, v, _ in g.edges:
        lap[u - 1, u - 1] += 1
        lap[v - 1, v - 1] += 1
        lap[u - 1, v - 1] -= 1
        lap[v - 1, u - 1] -= 1
    return round(np.linalg.det(lap[1:, 1:])) if g.num_vertices > 1 else 1


def test_build_graph_examples():
    assert (TRIANGLE.num_vertices, TRIANGLE.num_edges, TRIANGLE.loop_number) == (3, 3, 1)
    assert BANANA.loop_number == 1
    g = g8()
    assert (g.num_vertices, g.num_edges, g.loop_number) == (9, 16, 8)
    with pytest.raises(TadpoleEdge):
        build_graph([(1, 1)])
    with pytest.raises(EmptyGraph):
        build_graph([])


def test_first_appearance_relabelling():
    g = build_graph([(7, 3), (3, 9)])
    assert g.pairs() == [(1, 2), (2, 3)]


def test_minor_examples():
    assert minor(TRIANGLE, contract=[1]).pairs() == [(1, 2), (1, 2)]
    path = minor(TRIANGLE, delete=[1])
    assert path.loop_number == 0 and path.num_edges == 2
    a = minor(g8(), [2, 3, 5, 10], [4, 6, 9])
    assert set(a.edge_ids) == {1, 7, 8, 11, 12, 13, 14, 15, 16}
    assert dict(a.removed)[2] == "deleted" and dict(a.removed)[4] == "contracted"
    with pytest.raises(InactiveEdge):
        minor(path, delete=[1])
    with pytest.raises(ValueError):
        minor(TRIANGLE, [1], [1])


def test_tadpoles_are_recorded():
    m = minor(BANANA, contract=[1])
    assert m.num_edges == 0 and m.tadpoles == (2,)


def test_spanning_tree_examples():
    assert set(spanning_trees(TRIANGLE)) == {frozenset(s) for s in ({1, 2}, {1, 3}, {2, 3})}
    assert set(spanning_trees(BANANA)) == {frozenset({1}), frozenset({2})}
    assert len(spanning_trees(wheel(3))) == 16
    with pytest.raises(Disconnected):
        spanning_trees(minor(cycle(3), delete=[1, 2]))


def test_tree_count_matches_kirchhoff_exhaustive():
    for g in iter_graphs(6):
        assert len(spanning_trees(g)) == kirchhoff(g)


def test_incidence_matrix():
    single = build_graph([(1, 2)])
    assert incidence_matrix(single).tolist() == [[1]]
    for g in (TRIANGLE, wheel(4), g8()):
        full = full_incidence(g)
        assert (full.sum(axis=1) == 0).all()
        assert incidence_matrix(g).shape == (g.num_edges, g.num_vertices - 1)


def test_catalog():
    w = catalog("wheel", 3)
    assert (w.num_edges, w.loop_number) == (6, 3)
    assert all(w.degree(v) == 3 for v in w.vertices)
    c = catalog("cycle", 4)
    assert c.loop_number == 1
    g = catalog("g8")
    assert g.num_edges == 16 and max(g.degree(v) for v in g.vertices) <= 4
    assert catalog("wheel", 5).loop_number == 5
    with pytest.raises(UnknownName):
        catalog("zigzag", 5)
    with pytest.raises(ValueError):
        wheel(2)


def test_text_formats():
    text = "# triangle\n1 2\n\n2 3  # rim\n1 3\n"
    g = parse_graph_text(text)
    assert g.pairs() == TRIANGLE.pairs()
    assert parse_graph_text(format_graph_text(wheel(4))).pairs() == wheel(4).pairs()
    assert parse_graph_text("12 23\n13", two_digit=True).pairs() == TRIANGLE.pairs()
    assert parse_two_digit("34,14") == [(3, 4), (1, 4)]
    with pytest.raises(ValueError):
        parse_two_digit("345")
    with pytest.raises(ValueError):
        parse_graph_text("1 2 3")


@given(graphs(max_edges=7, min_edges=2))
def test_deletions_commute(g):
    ids = g.edge_ids
    a, b = ids[0], ids[-1]
    assert minor(minor(g, [a]), [b]) == minor(g, [a, b])


@given(graphs(max_edges=7))
def test_loop_number_under_minors(g):
    for e in g.edge_ids:
        d = minor(g, delete=[e])
        on_cycle = d.is_connected()
        assert d.loop_number == g.loop_number - (1 if on_cycle else 0)
        c = minor(g, contract=[e])
        assert c.loop_number + len(c.tadpoles) == g.loop_number


@given(graphs(max_edges=7))
def test_edge_ids_are_stable(g):
    e = g.edge_ids[0]
    m = minor(g, contract=[e])
    assert set(m.edge_ids) | {i for i, _ in m.removed} == set(g.edge_ids)
