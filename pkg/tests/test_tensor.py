import random

import pytest
from hypothesis import given, settings, strategies as st

from pwforge.projective import base_chart, random_tensor
from pwforge.ring import QQ
from pwforge.tensor import Chart, Tensor, raise_index, lower_index, trace_free, trace_free_affine

C2 = base_chart(2)
C3 = base_chart(3)

seeds = st.integers(0, 10_000)


def rt(chart, sig, seed, degree=2):
    return random_tensor(chart, sig, random.Random(seed), degree)


def test_shapes_and_errors():
    with pytest.raises(ValueError):
        Tensor(C2, ("x",), [C2.zero(), C2.zero()])
    with pytest.raises(ValueError):
        Tensor(C2, ("l",), [C2.zero()] * 3)
    a = Tensor.zeros(C2, "ll")
    b = Tensor.zeros(C3, "ll")
    with pytest.raises(ValueError):
        a + b


def test_delta_trace():
    assert Tensor.delta(C3).contract(0, 1).value() == C3.const(3)


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_symmetrize_idempotent(seed):
    T = rt(C3, "lll", seed)
    S = T.symmetrize(0, 1, 2)
    assert S.symmetrize(0, 1, 2) == S
    A = T.alternate(0, 1)
    assert A.alternate(0, 1) == A
    assert (A + A.permute((1, 0, 2))).is_zero()
    assert T.symmetrize(0, 1) + T.alternate(0, 1) == T


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_trace_free_projection(seed):
    T = rt(C2, "ull", seed, degree=1)
    F = trace_free(T)
    assert F.contract(0, 1).is_zero()
    assert F.contract(0, 2).is_zero()
    assert trace_free(F) == F
    M = rt(C3, "ul", seed)
    F2 = trace_free_affine(M)
    assert F2.contract(0, 1).is_zero()
    assert trace_free_affine(F2) == F2


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_contract_with_matches_product(seed):
    a = rt(C2, "ul", seed)
    b = rt(C2, "l", seed + 1)
    assert a.contract_with(0, b, 0) == a.product(b).contract(0, 2)


def test_raise_lower_round_trip():
    g = Tensor.from_dict(C2, "ll", {(0, 1): "1", (1, 0): "1"})
    ginv = g.permute((0, 1))
    ginv = Tensor(C2, "uu", ginv.comps)
    v = Tensor.from_dict(C2, "u", {0: "x1", 1: "x2^2"})
    assert raise_index(lower_index(v, 0, g), 0, ginv) == v


def test_literal_round_trip():
    T = rt(C3, "ull", 5)
    assert Tensor.from_literal(C3, T.to_literal()) == T


def test_chart_names():
    c = Chart("M", ["a", "b"])
    assert c.dim == 2
    assert c.var("b") == c.parse("b")
    assert c.parse("a*b + 1/2") .total_degree() == 2
    assert QQ("1/2") * 2 == 1
