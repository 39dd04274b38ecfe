import random

import pytest
from hypothesis import given, settings, strategies as st

from pwforge import bgg, walker
from pwforge.projective import (Connection, appendix_family, base_chart, random_poly,
                                random_special_connection, random_tensor)
from pwforge.tensor import Tensor

C2 = base_chart(2)
C3 = base_chart(3)
seeds = st.integers(0, 10_000)


def pp_phi():
    return Tensor.from_dict(C2, "ll", {(0, 0): "x2^2"}, weight=2)


def rand_phi(chart, rng, degree=2):
    return random_tensor(chart, "ll", rng, degree, 0.5, weight=2).symmetrize(0, 1)


def test_flat_pw_components():
    m = walker.build_pw(Connection.flat(C2))
    pw = m.pw
    for A in range(2):
        for B in range(2):
            assert m.g.comps[pw.x(A), pw.p(B)] == (1 if A == B else 0)
            assert m.g.comps[pw.p(A), pw.p(B)] == 0
            assert m.g.comps[pw.x(A), pw.x(B)] == 0
    cv = m.curvature()
    assert cv.riemann.is_zero() and cv.weyl.is_zero() and cv.scalar == 0


def test_appendix_family_metric_is_p_linear():
    m = walker.build_pw(appendix_family(C2, a2=1))
    pw = m.pw
    for A in range(2):
        for B in range(2):
            g = m.g.comps[pw.x(A), pw.x(B)]
            assert all(g.degree(p) <= 1 for p in pw.fibre)


def test_non_special_rejected():
    gamma = Connection.flat(C2).gamma.copy()
    gamma[0, 0, 1] = gamma[1, 0, 0] = C2.parse("x1")
    D = Connection(C2, gamma, check=False)
    assert not D.is_special()
    with pytest.raises(ValueError):
        walker.build_pw(D)


@given(seeds, st.sampled_from([2, 3]))
@settings(max_examples=6, deadline=None)
def test_inverse_and_frames(seed, n):
    rng = random.Random(seed)
    chart = C2 if n == 2 else C3
    D = random_special_connection(chart, rng, 1, 0.4)
    m = walker.build_pw(D, rand_phi(chart, rng, 1))
    prod = m.g.contract_with(1, m.ginv, 0)
    assert (prod - Tensor.delta(m.chart).permute((1, 0))).is_zero()
    fd = walker.frames(m)
    assert all(fd.checks.values())
    assert walker.homothety_defect(m).is_zero()


def test_pp_difference_tensor_and_b2():
    m = walker.build_pw(Connection.flat(C2), pp_phi())
    F = walker.difference_tensor(m)
    assert (walker.connection_difference(m) - F).is_zero()
    pw = m.pw
    # strictly horizontal once lowered: no vertical lower slots, no x upper slot
    for A in range(2):
        for a in range(4):
            for b in range(4):
                assert F.comps[pw.p(A), a, b].is_zero()
                assert F.comps[a, b, pw.p(A)].is_zero()
                assert F.comps[a, pw.x(A), b].is_zero()
    gt = m.standard()
    B2t = walker.conformal_b2(gt, m.phi_pullback())
    B2 = bgg.b2_twoform(m.base_connection, m.Phi)
    assert (B2t - pw.pullback(B2.with_weight(0)).with_weight(B2t.weight)).is_zero()
    W = m.curvature().weyl_low
    assert not W.is_zero()
    assert (W + pw.pullback(B2.with_weight(0)).with_weight(W.weight).scale(2)).is_zero()


@given(seeds)
@settings(max_examples=5, deadline=None)
def test_relations_dimension_two(seed):
    rng = random.Random(seed)
    D = random_special_connection(C2, rng, 1, 0.4)
    rep = walker.check_relations(D, rand_phi(C2, rng))
    for key in ("riemann", "ricci_modified_standard", "ricci_pullback_twice", "schouten",
                "schouten_pullback", "weyl", "b2_pullback", "intcon"):
        assert rep.checks[key], key


def test_riemann_relation_needs_projective_weyl_zero():
    # holds for a curved but projectively flat connection in dimension 3
    f = C3.parse("x1^2*x2 + x3^3")
    ups = Tensor.from_dict(C3, "l", {i: f.diff(C3.coords[i]) for i in range(3)})
    from pwforge.projective import projective_change
    D = projective_change(Connection.flat(C3), ups)
    Phi = Tensor.from_dict(C3, "ll", {(1, 2): "1", (2, 1): "1", (0, 0): "x2"}, weight=2)
    assert walker.check_relations(D, Phi).checks["riemann"]
    # and fails once the projective Weyl tensor is nonzero
    D = random_special_connection(C3, random.Random(7), 1, 0.15)
    assert not D.curvature().weyl.is_zero()
    rep = walker.check_relations(D, Phi)
    assert not rep.checks["riemann"]
    assert rep.checks["weyl"] and rep.checks["intcon"]


def test_ricci_flat_iff():
    m_flat = walker.ricci_flat_iff(Connection.flat(C2), pp_phi())
    assert m_flat == (True, True)
    D = appendix_family(C2, a1=1)
    assert walker.ricci_flat_iff(D, pp_phi()) == (False, False)


def test_flatness_examples():
    D = Connection.flat(C2)
    phi = Tensor.from_dict(C2, "l", {0: "x2^2", 1: "x1*x2"}, weight=2)
    verdict, w = walker.is_conformally_flat(D, bgg.b1_oneform(D, phi))
    assert verdict and w["metric_weyl_zero"]
    verdict, w = walker.is_conformally_flat(D, pp_phi())
    assert not verdict and not w["metric_weyl_zero"]


def test_lift_examples_and_round_trip():
    m = walker.build_pw(Connection.flat(C2), pp_phi())
    L = walker.lifts(m, alpha=Tensor.from_dict(C2, "l", {0: "1"}, weight=2))
    assert L.plus.is_zero() and L.zero.is_zero()
    assert L.minus.comps[m.pw.p(0)] == m.chart.const(1)
    rng = random.Random(11)
    D = random_special_connection(C2, rng, 1, 0.4)
    m = walker.build_pw(D, rand_phi(C2, rng, 1))
    w = Tensor.from_dict(C2, "uu", {(0, 1): random_poly(C2, rng, 1), }, weight=-2)
    w.comps[1, 0] = -w.comps[0, 1]
    v = random_tensor(C2, "u", rng, 2)
    alpha = random_tensor(C2, "l", rng, 2, weight=2)
    psi0 = random_poly(C2, rng, 1)
    back = walker.extract(m, walker.lifts(m, w, v, alpha, psi0))
    assert (back.w - w).is_zero() and (back.v - v).is_zero() and (back.alpha - alpha).is_zero()
    assert back.psi0 == psi0


def test_homothety_decompose():
    m = walker.build_pw(Connection.flat(C2), pp_phi())
    fd = walker.frames(m)
    parts = walker.homothety_decompose(m.pw, fd.k_up)
    assert parts.plus.is_zero() and parts.minus.is_zero() and parts.zero == fd.k_up
    e9 = Tensor.from_dict(m.chart, "u", {2: "x2", 3: "-x1"})
    parts = walker.homothety_decompose(m.pw, e9)
    assert parts.minus == e9
    bad = Tensor.from_dict(m.chart, "u", {0: "p1^3"})
    with pytest.raises(ValueError):
        walker.homothety_decompose(m.pw, bad)


@given(seeds)
@settings(max_examples=4, deadline=None)
def test_regauging_preserves_s2f(seed):
    rng = random.Random(seed)
    D = random_special_connection(C2, rng, 1, 0.4)
    m = walker.build_pw(D, rand_phi(C2, rng, 1))
    assert walker.s2f_residual(m).is_zero()
    alpha = random_tensor(C2, "l", rng, 2, weight=2)
    assert walker.s2f_residual(m, alpha).is_zero()


def test_ricci_is_twice_the_pullback():
    D = appendix_family(C2, a1=2, b0=1)
    m = walker.build_pw(D, pp_phi())
    ric = m.curvature().ricci
    base = m.pw.pullback(D.ricci())
    assert not base.is_zero()
    assert (ric - base.scale(2)).is_zero()
    assert (m.curvature().schouten - m.pw.pullback(D.curvature().schouten)).is_zero()
