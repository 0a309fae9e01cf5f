import pytest

from denomred import g8pipeline as gp
from denomred.graph import g8
from denomred.poly import Poly, parse_poly

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def d11():
    return gp.g8_trace().denominator(gp.STOP).expand()


@pytest.fixture(scope="module")
def chain(d11):
    return gp.substitution_chain(d11)


def test_all_steps_defined():
    t = gp.g8_trace()
    assert len(t.steps) == gp.STOP
    assert all(s.defined for s in t.steps)


def test_d11_matches_minor_formula(d11):
    other = gp.minor_formula(g8())
    assert d11 == other or d11 == -other


def test_restriction_at_a16_zero(d11):
    target = Poly.var(14) * Poly.var(15) * gp.restriction_p()
    assert d11.subs_value(16, 0) == target


def test_bracket_has_the_extra_term(chain):
    assert chain.d_tilde.degree(14) == 1
    assert chain.p == (gp.P_LISTED + gp.P_MISSING_TERM).normalized()
    assert chain.p != gp.P_LISTED.normalized()


def test_chain_reaches_j(chain):
    assert chain.j == gp.j_poly()


def test_t_dehomogenises_to_j():
    t = gp.t_poly()
    assert t.is_homogeneous() and t.total_degree() == 4
    assert t.subs_value(4, 1) == gp.j_poly()


def test_j_text_parses_to_the_same_as_t():
    a, b, c = (Poly.var(i) for i in (1, 2, 3))
    by_hand = b * (a + c) * (a * c + b) - a * (b + c) * (c + 1)
    assert parse_poly(gp.J_TEXT) == by_hand


def test_pipeline_report(tmp_path):
    rep = gp.run_pipeline((2, 3, 5, 7, 11), outdir=tmp_path)
    assert rep.ok, rep.text()
    assert rep.j_counts == {2: 7, 3: 17, 5: 37, 7: 58, 11: 139}
    assert rep.t_counts == {2: 14, 3: 28, 5: 56, 7: 85, 11: 182}
    assert rep.probe.u == 1 and rep.probe.v == 6
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(
        [f"{n}.poly" for n in ("D11", "D_hat", "D_tilde", "P", "Q", "J", "T")] + ["trace.json", "report.json"]
    )
    assert (tmp_path / "J.poly").read_text().strip() == gp.format_poly(gp.j_poly())
