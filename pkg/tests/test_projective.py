import random

import pytest
from hypothesis import given, settings, strategies as st

from pwforge import bgg
from pwforge.projective import (Connection, NotSpecialError, appendix_family, base_chart, epsilon,
                                projective_change, random_poly, random_special_connection, random_tensor,
                                star_b2, star_cotton, weighted_lie_derivative)
from pwforge.ring import QQ
from pwforge.tensor import Tensor

C2 = base_chart(2)
C3 = base_chart(3)
seeds = st.integers(0, 10_000)


def test_projective_change_example():
    ups = Tensor.from_dict(C2, "l", {0: "1"})
    D = projective_change(Connection.flat(C2), ups)
    g = D.gamma
    assert g[0, 0, 0] == C2.const(2)
    assert g[1, 1, 0] == C2.const(1)
    assert g[0, 0, 1] == C2.zero()
    assert projective_change(D, Tensor.zeros(C2, "l")).gamma.tolist() == g.tolist()


def test_chart_mismatch():
    with pytest.raises(ValueError):
        projective_change(Connection.flat(C2), Tensor.zeros(C3, "l"))


def test_appendix_family_table():
    D = appendix_family(C2, a2=1, a1=2, a0=3, b1=5, b0=7)
    u1 = C2.parse("x1^2 + 2*x1 + 3")
    u2 = C2.parse("5*x2 + 7")
    g = D.gamma
    assert g[0, 0, 0] == u1.scale(2)
    assert g[0, 1, 1] == u1 and g[1, 1, 0] == u1
    assert g[1, 1, 1] == u2.scale(2)


def test_covariant_derivative_examples():
    D = Connection.flat(C2)
    assert D.covariant_derivative(Tensor.scalar(C2, "3")).is_zero()
    xi = Tensor.from_dict(C2, "u", {0: "x1"})
    Dxi = D.covariant_derivative(xi)
    assert Dxi.comps[0, 0] == C2.const(1) and Dxi.residual_size() == 1
    Phi = Tensor.from_dict(C2, "ll", {(0, 0): "x2^2"})
    DPhi = D.covariant_derivative(Phi)
    assert DPhi.comps[1, 0, 0] == C2.parse("2*x2") and DPhi.residual_size() == 1


def test_non_special_rejected():
    gamma = Connection.flat(C2).gamma.copy()
    gamma[0, 0, 1] = gamma[1, 0, 0] = C2.parse("x1")
    D = Connection(C2, gamma, check=False)
    assert not D.is_special()
    with pytest.raises(NotSpecialError):
        D.curvature()


@given(seeds, st.sampled_from([2, 3]))
@settings(max_examples=8, deadline=None)
def test_curvature_identities(seed, n):
    chart = C2 if n == 2 else C3
    D = random_special_connection(chart, random.Random(seed), 1 if n == 3 else 2, 0.3)
    pack = D.curvature()
    R, W, Y = pack.riemann, pack.weyl, pack.cotton
    assert (R + R.permute((1, 0, 2, 3))).is_zero()
    assert R.permute((0, 1, 3, 2)).alternate(0, 1, 2).is_zero()       # R_[AB]^C_D] with D moved in
    assert W.contract(0, 2).is_zero() and W.contract(1, 2).is_zero() and W.contract(2, 3).is_zero()
    assert (Y + Y.permute((0, 2, 1))).is_zero()
    assert Y.alternate(0, 1, 2).is_zero()
    if n == 2:
        assert W.is_zero()


@given(seeds)
@settings(max_examples=6, deadline=None)
def test_projectively_flat_has_no_weyl_or_cotton(seed):
    rng = random.Random(seed)
    f = random_poly(C3, rng, 3, 0.5)
    ups = Tensor.from_dict(C3, "l", {i: f.diff(C3.coords[i]) for i in range(3)})
    D = projective_change(Connection.flat(C3), ups)
    pack = D.curvature()
    assert pack.weyl.is_zero() and pack.cotton.is_zero()


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_first_scalar_operator_invariance(seed):
    rng = random.Random(seed)
    D = random_special_connection(C2, rng, 1, 0.5)
    tau = Tensor.scalar(C2, random_poly(C2, rng, 2), weight=1)
    ups = random_tensor(C2, "l", rng, 1)
    lhs = bgg.b1_scalar_hat(D, tau, ups)
    assert (lhs - bgg.b1_scalar(D, tau).with_weight(lhs.weight)).is_zero()


def test_lie_derivative_examples():
    D = Connection.flat(C2)
    f = Tensor.scalar(C2, "x1^2*x2")
    v = Tensor.from_dict(C2, "u", {0: "x1", 1: "1"})
    assert weighted_lie_derivative(v, f).value() == C2.parse("2*x1^2*x2 + x1^2")
    # weight-2 symmetric tensor against the displayed component formula
    Phi = Tensor.from_dict(C2, "ll", {(0, 0): "x2^2", (0, 1): "x1", (1, 0): "x1"}, weight=2)
    v = Tensor.from_dict(C2, "u", {0: "x1"})
    L = weighted_lie_derivative(v, Phi, D)
    Dv = D.covariant_derivative(v)    # (A, R) = D_A v^R
    expected = D.covariant_derivative(Phi).contract_with(0, v, 0)
    two = Dv.contract_with(1, Phi, 1).symmetrize(0, 1).scale(2)
    div = Dv.contract(0, 1).value()
    expected = expected + two - Phi.scale(div * QQ("2/3")).with_weight(0)
    assert (L.with_weight(0) - expected.with_weight(0)).is_zero()


def test_epsilon_and_stars():
    lo, hi = epsilon(C2)
    assert lo.comps[0, 1] == C2.const(1) and hi.comps[0, 1] == C2.const(1)
    with pytest.raises(ValueError):
        epsilon(C3)
    assert star_cotton(Tensor.zeros(C2, "lll")).is_zero()
    D = Connection.flat(C2)
    Phi = Tensor.from_dict(C2, "ll", {(0, 0): "x2^2"}, weight=2)
    s = star_b2(bgg.b2_twoform(D, Phi))
    assert s.is_constant() and s != 0
    assert star_b2(bgg.b2_twoform(D, Phi.scale(3))) == s.scale(3)
