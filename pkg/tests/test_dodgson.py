import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from denomred.dodgson import (
    DodgsonKey,
    bareiss_det,
    dodgson,
    graph_matrix,
    psi,
    psi_bareiss,
    psi_from_trees,
    psi_or_zero,
    three_valent_data,
)
from denomred.errors import BadKey, Disconnected, NotThreeValent
from denomred.graph import build_graph, g8, incidence_matrix, iter_graphs, minor, wheel
from denomred.poly import Poly, parse_poly
from denomred.verify import (
    check_contraction_deletion,
    check_dodgson_identity,
    contraction_deletion_instance,
    dodgson_identity_instance,
)

from strategies import graphs

TRIANGLE = build_graph([(1, 2), (2, 3), (1, 3)])


def numeric_matrix(g, point):
    """M_G at a numeric point, built directly from the incidence matrix."""
    e = incidence_matrix(g)
    n, v = e.shape
    m = sympy.zeros(n + v, n + v)
    for r, eid in enumerate(g.edge_ids):
        m[r, r] = point[eid]
        for c in range(v):
            m[r, n + c] = int(e[r, c])
            m[n + c, r] = -int(e[r, c])
    return m


def test_small_examples():
    assert psi(build_graph([(1, 2)])) == Poly.constant(1)
    assert psi(build_graph([(1, 2), (1, 2)])) == parse_poly("a1 + a2")
    assert psi(TRIANGLE) == parse_poly("a1 + a2 + a3")
    w = psi(wheel(3))
    assert len(w) == 16 and w.is_homogeneous() and w.total_degree() == 3


def test_g8_psi_shape():
    f = psi(g8())
    assert f.is_homogeneous() and f.total_degree() == 8
    assert set(f.variables()) == set(range(1, 17))


def test_psi_oracles_exhaustive():
    for g in iter_graphs(5):
        assert psi(g) == psi_from_trees(g) == psi_bareiss(g)


@given(graphs(max_edges=9))
def test_psi_equals_tree_sum(g):
    f = psi(g)
    assert f == psi_from_trees(g)
    assert all(f.degree(e) <= 1 for e in g.edge_ids)
    assert all(c > 0 for _, c in f.items())


@given(graphs(max_edges=7), st.data())
def test_orientation_independence(g, data):
    e = data.draw(st.sampled_from(g.edge_ids))
    assert psi(g.flipped(e)) == psi(g)


def test_disconnected():
    assert psi(minor(TRIANGLE, delete=[1])) == Poly.constant(1)
    assert psi_or_zero(minor(TRIANGLE, delete=[1, 2])) == Poly.zero()
    two = build_graph([(1, 2), (3, 4)])
    assert psi_or_zero(two) == Poly.zero()
    with pytest.raises(Disconnected):
        psi(two)


def test_bad_keys():
    g = wheel(3)
    with pytest.raises(BadKey):
        dodgson(g, (1,), ())
    with pytest.raises(BadKey):
        dodgson(g, (1, 1), (2, 3))
    with pytest.raises(BadKey):
        dodgson(g, (1,), (2,), (1,))
    with pytest.raises(BadKey):
        dodgson(g, (9,), (2,))


def test_empty_key_is_psi():
    g = wheel(4)
    assert dodgson(g) == psi(g)


@given(graphs(max_edges=6, min_edges=3), st.data())
def test_sign_is_complementary_minor(g, data):
    """Psi^{I,J} = det M * det W[J, I] with W = M^-1, checked at a random point."""
    ids = list(g.edge_ids)
    size = data.draw(st.integers(1, min(2, len(ids))))
    i = tuple(data.draw(st.permutations(ids))[:size])
    j = tuple(data.draw(st.permutations(ids))[:size])
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    point = {e: rng.randint(1, 50) for e in ids}
    m = numeric_matrix(g, point)
    det = m.det()
    if det == 0:
        return
    w = m.inv()
    pos = {e: r for r, e in enumerate(ids)}
    sub = sympy.Matrix([[w[pos[b], pos[a]] for a in i] for b in j])
    assert dodgson(g, i, j).evaluate(point) == det * sub.det()


@given(graphs(max_edges=6, min_edges=2), st.data())
def test_magnitude_is_the_minor(g, data):
    ids = list(g.edge_ids)
    i = tuple(sorted(data.draw(st.sets(st.sampled_from(ids), min_size=1, max_size=2))))
    j = tuple(sorted(data.draw(st.sets(st.sampled_from(ids), min_size=len(i), max_size=len(i)))))
    entries = graph_matrix(g).entries()
    pos = {e: r for r, e in enumerate(ids)}
    keep_r = [r for r in range(len(entries)) if r not in {pos[e] for e in i}]
    keep_c = [c for c in range(len(entries)) if c not in {pos[e] for e in j}]
    sub = [[entries[r][c] for c in keep_c] for r in keep_r]
    det = bareiss_det(sub) if sub else Poly.constant(1)
    f = dodgson(g, i, j)
    assert f == det or f == -det


@given(graphs(max_edges=8, min_edges=3), st.integers(0, 10**6))
def test_contraction_deletion(g, seed):
    rng = random.Random(seed)
    assert check_contraction_deletion(g, *contraction_deletion_instance(rng, g))


@given(graphs(max_edges=8, min_edges=3), st.integers(0, 10**6))
def test_dodgson_identity(g, seed):
    rng = random.Random(seed)
    assert check_dodgson_identity(g, *dodgson_identity_instance(rng, g))


def test_dodgson_identity_wheel3_first_edges():
    assert check_dodgson_identity(wheel(3), (), (), (), 1, 2, 3)


@given(graphs(max_edges=8, min_edges=2), st.data())
def test_multilinear(g, data):
    e = data.draw(st.sampled_from(g.edge_ids))
    f = dodgson(g, (e,), (g.edge_ids[0] if g.edge_ids[0] != e else e,))
    assert all(f.degree(v) <= 1 for v in g.edge_ids)


def test_deletion_contraction_minors():
    g = wheel(4)
    for e in g.edge_ids:
        assert dodgson(g, (e,), (e,)) == psi(minor(g, delete=[e]))
        assert dodgson(g, (), (), (e,)) == psi(minor(g, contract=[e]))


def test_three_valent_data():
    for g in (wheel(3), wheel(4), g8()):
        for v in g.vertices:
            if g.degree(v) != 3:
                continue
            d = three_valent_data(g, v)
            assert d.psi_structure() == psi(g)
            assert d.f0 * d.f123 == d.f1 * d.f2 + d.f1 * d.f3 + d.f2 * d.f3
            e1, e2, e3 = d.edges
            f0_alt = dodgson(g, (e1, e2), (e2, e3))
            assert f0_alt == d.f0 or f0_alt == -d.f0


def test_three_valent_g8_vertex():
    g = g8()
    v = next(v for v in g.vertices if set(g.incident(v)) == {2, 3, 4})
    d = three_valent_data(g, v)
    assert d.edges == (2, 3, 4)
    with pytest.raises(NotThreeValent):
        three_valent_data(g, next(v for v in g.vertices if g.degree(v) == 4))


def test_dodgson_key_constructor():
    k = DodgsonKey.of([2, 1], [1, 2], [3])
    assert k.I == (2, 1) and k.K == frozenset({3})
    assert dodgson(wheel(3), k) == dodgson(wheel(3), (2, 1), (1, 2), (3,))
