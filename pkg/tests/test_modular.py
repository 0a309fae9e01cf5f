from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denomred.errors import InsufficientPrimes, NoConsistentFit, ParseError
from denomred.modular import (
    QSeries,
    eta_expand,
    format_eta_spec,
    k3_coefficients,
    k3_modularity_probe,
    parse_eta_spec,
)

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


def naive_eta_product(spec, prefactor, nmax):
    """Multiply out the finite products term by term."""
    series = [0] * (nmax + 1)
    series[prefactor] = 1 if prefactor <= nmax else 0
    for d, k in spec:
        for n in range(1, nmax // d + 1):
            factor = [0] * (nmax + 1)
            factor[0], factor[d * n] = 1, -1
            if k < 0:
                factor = [1 if i % (d * n) == 0 else 0 for i in range(nmax + 1)]
            for _ in range(abs(k)):
                out = [0] * (nmax + 1)
                for i, a in enumerate(series):
                    if a:
                        for j, b in enumerate(factor[: nmax + 1 - i]):
                            out[i + j] += a * b
                series = out
    return series


def test_pentagonal_numbers():
    s = eta_expand([(1, 1)], 0, 15)
    assert s.coeffs == (1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1, 0, 0, -1)


def test_empty_spec_is_a_power_of_q():
    assert eta_expand([], 1, 4).coeffs == (0, 1, 0, 0, 0)


def test_partition_numbers():
    assert eta_expand([(1, -1)], 0, 10).coeffs == (1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42)


@settings(deadline=None)
@given(
    st.lists(st.tuples(st.integers(1, 4), st.integers(-3, 3)), max_size=3),
    st.integers(0, 3),
)
def test_expansion_matches_naive_product(spec, prefactor):
    nmax = 12
    assert list(eta_expand(spec, prefactor, nmax).coeffs) == naive_eta_product(spec, prefactor, nmax)


@settings(deadline=None)
@given(
    st.lists(st.tuples(st.integers(1, 4), st.integers(-3, 3)), max_size=2),
    st.lists(st.tuples(st.integers(1, 4), st.integers(-3, 3)), max_size=2),
)
def test_concatenating_specs_multiplies_series(s1, s2):
    a, b = eta_expand(s1, 0, 15), eta_expand(s2, 1, 15)
    assert (a * b).coeffs == eta_expand(s1 + s2, 1, 15).coeffs


def test_k3_form_first_coefficients():
    a = k3_coefficients(30)
    assert a[1] == 1
    assert [a[p] for p in PRIMES] == [-3, 0, 0, -7, -6, 0, 0, 0]
    # inert primes -- p = 3, 5, 6 mod 7 -- have a_p = 0
    for p in (3, 5, 13, 17, 19):
        assert a[p] == 0


def test_k3_form_is_multiplicative():
    a = k3_coefficients(120)
    for m in range(1, 12):
        for n in range(1, 12):
            if gcd(m, n) == 1 and m * n <= 120:
                assert a[m * n] == a[m] * a[n]
    # a_{p^2} = a_p^2 - chi(p) p^2 with chi(2) = 1
    assert a[4] == a[2] ** 2 - 4


def test_series_indexing():
    s = eta_expand([(1, 1)], 0, 5)
    assert s.nmax == 5
    with pytest.raises(IndexError):
        s[6]
    assert s.truncate(2).coeffs == (1, -1, -1)
    assert s.to_csv().splitlines()[:3] == ["n,a_n", "1,-1", "2,-1"]


def test_spec_round_trip():
    spec, pre = parse_eta_spec("# comment\n1 3\n7 3   # dilation 7\nprefactor 1\n")
    assert (spec, pre) == (((1, 3), (7, 3)), 1)
    assert parse_eta_spec(format_eta_spec(spec, pre)) == (spec, pre)
    with pytest.raises(ParseError):
        parse_eta_spec("1 2 3\n")
    with pytest.raises(ParseError):
        parse_eta_spec("one 2\n")


def test_eta_rejects_bad_input():
    with pytest.raises(ValueError):
        eta_expand([(0, 1)], 0, 5)
    with pytest.raises(ValueError):
        eta_expand([], -1, 5)


def synthetic(u, v, primes=PRIMES):
    a = k3_coefficients(max(primes))
    return {p: u * a[p] + 1 + p * p + v * p for p in primes}, a


def test_probe_recovers_a_synthetic_relation():
    counts, a = synthetic(3, -2)
    rep = k3_modularity_probe(counts, a)
    assert (rep.u, rep.v) == (3, -2)
    assert rep.passed and len(rep.validation) == len(PRIMES) - 2
    assert rep.document()["passed"] is True


def test_probe_rejects_a_pure_tate_count():
    # P^2: count = 1 + p + p^2 fits with u = 0, which is not a modular signal
    counts = {p: 1 + p + p * p for p in PRIMES}
    rep = k3_modularity_probe(counts, k3_coefficients(20))
    assert rep.u == 0 and rep.v == 1
    assert all(rep.validation.values()) and not rep.passed


def test_probe_reports_held_out_failures():
    counts, a = synthetic(1, 6)
    counts[13] += 1
    rep = k3_modularity_probe(counts, a)
    assert not rep.passed and rep.residuals[13] == 1


def test_probe_without_integral_fit():
    counts, a = synthetic(1, 6)
    counts[2] += 1
    rep = k3_modularity_probe(counts, a)
    assert not rep.consistent and not rep.passed
    with pytest.raises(NoConsistentFit):
        k3_modularity_probe(counts, a, strict=True)


def test_probe_calibration_on_inert_pair_is_singular():
    counts, a = synthetic(1, 6)
    with pytest.raises(NoConsistentFit):
        k3_modularity_probe(counts, a, calibration_primes=(3, 5), strict=True)


@settings(deadline=None, max_examples=30)
@given(st.permutations(PRIMES))
def test_probe_ignores_the_order_of_counts(order):
    counts, a = synthetic(2, 5)
    shuffled = {p: counts[p] for p in order}
    assert k3_modularity_probe(shuffled, a) == k3_modularity_probe(counts, a)


def test_probe_input_checks():
    counts, a = synthetic(1, 1)
    with pytest.raises(InsufficientPrimes):
        k3_modularity_probe({p: counts[p] for p in (2, 3, 5)}, a)
    with pytest.raises(InsufficientPrimes):
        k3_modularity_probe(counts, a.truncate(10))
    with pytest.raises(InsufficientPrimes):
        k3_modularity_probe({p: counts[p] for p in (3, 5, 7, 11)}, a)
    with pytest.raises(ValueError):
        k3_modularity_probe(counts, a, calibration_primes=(2, 2))


def test_qseries_product_keeps_shorter_truncation():
    s = QSeries((1, 1, 1)) * QSeries((1, -1, 0, 0, 0))
    assert s.coeffs == (1, 0, 0)
