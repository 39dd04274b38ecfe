import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pwforge.ring import (QQ, PolyParseError, PolyRing, RationalMatrix, SparseRREF, parse_poly,
                          nullspace_basis, rank_mod_p, span_coordinates, sparse_rank_mod_p)
from pwforge.ring import modrank

R = PolyRing(["x1", "x2", "rho", "t"], laurent="t")


def P(s):
    return parse_poly(s, R)


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw):
    p = R.zero()
    for _ in range(draw(st.integers(0, 4))):
        e = [draw(st.integers(0, 2)), draw(st.integers(0, 2)), draw(st.integers(0, 1)),
             draw(st.integers(-2, 2))]
        p = p + R.monomial(e, QQ(draw(coeffs)))
    return p


def test_examples():
    assert P("(x1 + 1)*(x1 - 1)") == P("x1^2 - 1")
    assert P("x1*t^-1") + P("x1*t^-1") == P("2*x1*t^-1")
    assert P("x2^2*rho").scale(QQ("-1/2")) == P("-1/2*x2^2*rho")
    assert P("x2^2").diff("x2") == P("2*x2")
    assert P("t^-1").diff("t") == P("-t^-2")


def test_rationals_are_reduced():
    q = QQ("6/-4")
    assert q.numerator == -3 and q.denominator == 2


def test_no_zero_terms_stored():
    p = P("x1 + x2") - P("x1")
    assert all(c != 0 for c in p.terms.values())
    assert len(p) == 1


def test_negative_exponent_only_for_laurent():
    with pytest.raises(ValueError):
        R.monomial([-1, 0, 0, 0])


def test_parse_errors_have_position():
    with pytest.raises(PolyParseError) as e:
        P("x1 + * 2")
    assert e.value.pos >= 0
    with pytest.raises(ValueError):
        P("zz + 1")


@given(polys(), polys(), polys())
@settings(max_examples=60, deadline=None)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == R.zero()


@given(polys(), polys())
@settings(max_examples=60, deadline=None)
def test_leibniz(a, b):
    for v in ("x1", "t"):
        assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@given(polys())
@settings(max_examples=40, deadline=None)
def test_str_round_trip(a):
    assert P(str(a)) == a


def test_nullspace_examples():
    assert nullspace_basis(RationalMatrix.identity(3)) == []
    assert len(nullspace_basis(RationalMatrix.zeros(2, 5))) == 5
    (v,) = nullspace_basis(RationalMatrix([[1, 1], [2, 2]]))
    assert v[0] == -v[1] != 0


mats = st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=5)


@given(mats)
@settings(max_examples=60, deadline=None)
def test_nullspace_rank_nullity(rows):
    M = RationalMatrix(rows)
    null = M.nullspace_basis()
    assert len(null) == 4 - M.rank()
    for v in null:
        assert all(sum(QQ(r[j]) * v[j] for j in range(4)) == 0 for r in rows)
    elim = SparseRREF(4)
    for r in rows:
        elim.add_row({j: QQ(x) for j, x in enumerate(r) if x})
    assert elim.rank == M.rank()
    assert rank_mod_p(np.array(rows)) == M.rank()


def test_span_coordinates():
    vs = [{"a": QQ(1), "b": QQ(1)}, {"b": QQ(2)}]
    c = span_coordinates(vs, {"a": QQ(3), "b": QQ(7)})
    assert c == [3, 2]
    assert span_coordinates(vs, {"c": QQ(1)}) is None


@pytest.mark.parametrize("flag", ["0", "1"])
def test_modular_rank_paths_agree(monkeypatch, flag):
    monkeypatch.setenv("PWFORGE_NUMBA", flag)
    rng = np.random.default_rng(3)
    a = rng.integers(-4, 5, size=(12, 9))
    a[5] = a[1] + a[2]
    expected = RationalMatrix(a.tolist()).rank()
    assert rank_mod_p(a) == expected
    rows = [{j: QQ(int(x)) for j, x in enumerate(r) if x} for r in a]
    assert sparse_rank_mod_p(rows, 9) == expected


def test_numba_flag():
    old = os.environ.get("PWFORGE_NUMBA")
    os.environ["PWFORGE_NUMBA"] = "0"
    try:
        assert not modrank.numba_enabled()
    finally:
        if old is None:
            del os.environ["PWFORGE_NUMBA"]
        else:
            os.environ["PWFORGE_NUMBA"] = old
