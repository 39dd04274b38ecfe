"""First and second operators of the five projective BGG sequences.

Every operator takes the connection ``D`` (special, so densities are
trivialised and weights only matter for Lie derivatives) and returns a
:class:`Tensor`.  Slot orders follow the index names in the docstrings.
The ``*_composition`` functions give the curvature expression that
``B2(B1(x))`` must equal; tests evaluate both sides on random data.
"""
from __future__ import annotations

import numpy as np

from .projective import Connection, weighted_lie_derivative
from .ring import QQ
from .tensor import LOW, UP, Tensor, trace_free, trace_free_affine

HALF = QQ("1/2")
QUARTER = QQ("1/4")


def _need(T: Tensor, sig, what: str, weight=None):
    if T.sig != tuple(sig):
        raise ValueError(f"{what}: expected signature {tuple(sig)}, got {T.sig}")
    if weight is not None and T.weight != weight:
        raise ValueError(f"{what}: expected weight {weight}, got {T.weight}")


def _pack(D: Connection):
    return D.curvature()


# -- scalar sequence: E(1) -> E_(AB)(1) -> E_[CA]B(1) ---------------------

def b1_scalar(D: Connection, tau: Tensor) -> Tensor:
    """(D_A D_B + P_AB) tau, slots (A, B)."""
    _need(tau, (), "b1_scalar", 1)
    out = D.hessian(tau) + _pack(D).schouten.scale(tau.value())
    if not (out - out.permute((1, 0))).is_zero():
        raise AssertionError("first scalar operator is not symmetric")
    return out.with_weight(1)


def b2_scalar(D: Connection, T: Tensor) -> Tensor:
    """D_[C T_A]B, slots (C, A, B)."""
    _need(T, (LOW, LOW), "b2_scalar")
    DT = D.covariant_derivative(T)
    return DT.alternate(0, 1).with_weight(T.weight)


def scalar_composition(D: Connection, tau: Tensor) -> Tensor:
    """-1/2 (W_CA^R_B D_R tau - Y_BCA tau), slots (C, A, B).

    The skew pair is (C, A) as in the second operator; B is the free slot.
    """
    pk = _pack(D)
    dtau = D.covariant_derivative(tau)
    Wd = pk.weyl.contract_with(2, dtau, 0)          # W_CA^R_B tau_R -> (C, A, B)
    Y = pk.cotton.permute((1, 2, 0))                 # Y_BCA as (C, A, B)
    return (Wd - Y.scale(tau.value())).scale(-HALF).with_weight(tau.weight)


# -- one-form sequence: E_B(2) -> E_(AB)(2) -> E_[AB][CD](2) ---------------

def b1_oneform(D: Connection, phi: Tensor) -> Tensor:
    """D_(A phi_B)."""
    _need(phi, (LOW,), "b1_oneform")
    return D.covariant_derivative(phi).symmetrize(0, 1).with_weight(phi.weight)


def b2_twoform(D: Connection, Phi: Tensor) -> Tensor:
    """Pair-skew part of D_A D_C Phi_BD + P_AC Phi_BD + 1/4 W_AB^R_C Phi_DR - 1/4 W_CD^R_A Phi_BR.

    Slots (A, B, C, D).
    """
    _need(Phi, (LOW, LOW), "b2_twoform")
    pk = _pack(D)
    W = pk.weyl
    ddphi = D.hessian(Phi).permute((0, 2, 1, 3))                 # (A,C,B,D) -> (A,B,C,D)
    pphi = pk.schouten.product(Phi).permute((0, 2, 1, 3))
    w1 = W.contract_with(2, Phi, 1)                               # (A,B,C,D)
    w2 = W.contract_with(2, Phi, 1).permute((2, 3, 0, 1))         # (C,D,A,B) -> (A,B,C,D)
    inner = ddphi + pphi + (w1 - w2).scale(QUARTER)
    return inner.pair_skew().with_weight(Phi.weight)


def oneform_composition(D: Connection, phi: Tensor) -> Tensor:
    """Curvature expression equal to b2_twoform(b1_oneform(phi)), slots (A, B, C, D).

    Pair-skew part of
      -1/2 W_AB^R_C D_[R phi_D] - 1/2 W_CD^R_A D_[R phi_B]
      +1/4 W_AB^R_C D_(D phi_R) + 1/4 W_CD^R_A D_(B phi_R)
      -1/2 (D_A W_CD^R_B) phi_R - 1/2 phi_C Y_DAB.

    The two symmetric-derivative terms enter with the same sign: the left
    side is symmetric under exchanging the pairs (A, B) and (C, D), which
    swaps them.
    """
    pk = _pack(D)
    W, Y = pk.weyl, pk.cotton
    dphi = D.covariant_derivative(phi)              # (R, D) = D_R phi_D
    skew = dphi.alternate(0, 1)
    sym = dphi.symmetrize(0, 1)
    t1 = W.contract_with(2, skew, 0)                 # W_AB^R_C skew_RD -> (A,B,C,D)
    t2 = W.contract_with(2, skew, 0).permute((2, 3, 0, 1))   # (C,D,A,B) -> (A,B,C,D)
    t3 = W.contract_with(2, sym, 1)                  # W_AB^R_C sym_DR -> (A,B,C,D)
    t4 = W.contract_with(2, sym, 1).permute((2, 3, 0, 1))
    DW = D.covariant_derivative(W)                   # (A, C, D, R, B)
    t5 = DW.contract_with(3, phi, 0)                 # (A, C, D, B)
    t5 = t5.permute((0, 3, 1, 2))                    # -> (A, B, C, D)
    t6 = phi.product(Y).permute((2, 3, 0, 1))        # phi_C Y_DAB: (C,D,A,B) -> (A,B,C,D)
    inner = (t1 + t2 + t5 + t6).scale(-HALF) + (t3 + t4).scale(QUARTER)
    return inner.pair_skew().with_weight(phi.weight)


# -- vector sequence: E^B(-1) -> (E_A^B)_0 -> (E_[CA]^B)_0 ------------------

def b1_vector(D: Connection, xi: Tensor) -> Tensor:
    """(D_A xi^B)_0, slots (A, B)."""
    _need(xi, (UP,), "b1_vector")
    return trace_free_affine(D.covariant_derivative(xi)).with_weight(xi.weight)


def b2_vector(D: Connection, Xi: Tensor) -> Tensor:
    """(D_[C Xi_A]^B)_0, slots (C, A, B)."""
    _need(Xi, (LOW, UP), "b2_vector")
    return trace_free(D.covariant_derivative(Xi).alternate(0, 1)).with_weight(Xi.weight)


def vector_composition(D: Connection, xi: Tensor) -> Tensor:
    """1/2 W_CA^B_R xi^R."""
    return _pack(D).weyl.contract_with(3, xi, 0).scale(HALF).with_weight(xi.weight)


# -- bivector sequence: E^[AB](-2) -> (E_D^[AB])_0 -> (E_[CD]^[AB])_0 ------

def _check_bivector(w: Tensor):
    _need(w, (UP, UP), "bivector")
    if not (w + w.permute((1, 0))).is_zero():
        raise ValueError("bivector input must be skew")


def b1_bivector(D: Connection, w: Tensor) -> Tensor:
    """(D_D w^AB)_0, slots (D, A, B)."""
    _check_bivector(w)
    return trace_free(D.covariant_derivative(w)).with_weight(w.weight)


def b2_bivector(D: Connection, V: Tensor) -> Tensor:
    """(D_[C V_D]^AB)_0, slots (C, D, A, B)."""
    _need(V, (LOW, UP, UP), "b2_bivector")
    if D.n < 4:
        raise ValueError("the second bivector operator needs dimension at least 4")
    return trace_free(D.covariant_derivative(V).alternate(0, 1)).with_weight(V.weight)


def bivector_composition(D: Connection, w: Tensor) -> Tensor:
    """-(W_CD^[A_R w^B]R)_0, slots (C, D, A, B)."""
    W = _pack(D).weyl
    t = W.contract_with(3, w, 1)                     # W_CD^A_R w^BR -> (C, D, A, B)
    return trace_free(t.alternate(2, 3)).scale(-1).with_weight(w.weight)


def bivector_nu(D: Connection, w: Tensor) -> Tensor:
    """nu^C = D_R w^RC / (n - 1)."""
    return D.covariant_derivative(w).contract(0, 1).scale(QQ(1) / (D.n - 1))


def prolongation_check(D: Connection, w: Tensor):
    """Residuals of the two prolongation equations of the first bivector operator.

    First:  D_A w^BC - 2 delta_A^[B nu^C]
    Second: D_A nu^B + P_AR w^RB + w^RS W_RS^B_A / (2 (n - 2))
    """
    n = D.n
    nu = bivector_nu(D, w)
    Dw = D.covariant_derivative(w)                               # (A, B, C)
    dn = Tensor.delta(D.chart).permute((1, 0)).product(nu)       # delta_A^B nu^C -> (A, B, C)
    first = Dw - (dn - dn.permute((0, 2, 1)))
    pk = _pack(D)
    second = D.covariant_derivative(nu) + pk.schouten.contract_with(1, w, 0)
    if n > 2:
        ww = pk.weyl.contract_with(0, w, 0).contract(0, 3)       # W_RS^B_A w^RS -> (B, A)
        second = second + ww.permute((1, 0)).scale(QQ(1) / (2 * (n - 2)))
    return first, second


# -- adjoint sequence: E^C -> (E_(AB)^C)_0 -> (E_[DA]B^C)_0 -----------------

def _adjoint_core(D: Connection, v: Tensor) -> Tensor:
    _need(v, (UP,), "adjoint")
    pk = _pack(D)
    return D.hessian(v) + pk.schouten.product(v)


def b1_adjoint(D: Connection, v: Tensor) -> Tensor:
    """(D_(A D_B) v^C + P_AB v^C)_0, slots (A, B, C)."""
    return trace_free(_adjoint_core(D, v).symmetrize(0, 1))


def weyl_term_adjoint(D: Connection, v: Tensor) -> Tensor:
    """v^R W_R(A^C_B), slots (A, B, C)."""
    W = _pack(D).weyl
    t = W.contract_with(0, v, 0)          # (A, C, B)
    return t.permute((0, 2, 1)).symmetrize(0, 1)


def b1_adjoint_modified(D: Connection, v: Tensor) -> Tensor:
    """(D_(A D_B) v^C + P_AB v^C + v^R W_R(A^C_B))_0, slots (A, B, C)."""
    return trace_free((_adjoint_core(D, v) + weyl_term_adjoint(D, v)).symmetrize(0, 1))


def b2_adjoint(D: Connection, V: Tensor) -> Tensor:
    """(D_[D V_A]B^C)_0, slots (D, A, B, C)."""
    _need(V, (LOW, LOW, UP), "b2_adjoint")
    return trace_free(D.covariant_derivative(V).alternate(0, 1))


def lie_weyl(D: Connection, v: Tensor) -> Tensor:
    """Lie derivative of the Weyl tensor along v, slots (A, B, C, D) of W_AB^C_D."""
    return weighted_lie_derivative(v, _pack(D).weyl, D)


def adjoint_composition(D: Connection, v: Tensor) -> Tensor:
    """1/2 (L_v W)_DA^C_B arranged in slots (D, A, B, C)."""
    return lie_weyl(D, v).permute((0, 1, 3, 2)).scale(HALF)


# -- coupling operators -----------------------------------------------------

def _phi_bracket(D: Connection, Phi: Tensor) -> Tensor:
    """D_(A Phi_B)R - 1/2 D_R Phi_AB, slots (A, B, R)."""
    dphi = D.covariant_derivative(Phi)                       # (A, B, R) = D_A Phi_BR
    sym = dphi.symmetrize(0, 1)
    return sym - dphi.permute((1, 2, 0)).scale(HALF)          # D_R Phi_AB as (A, B, R)


def coupling_F_xi(D: Connection, xi: Tensor, Phi: Tensor) -> Tensor:
    """xi^R (D_(A Phi_B)R - 1/2 D_R Phi_AB) + (1/n)(D_R xi^R) Phi_AB."""
    _need(xi, (UP,), "coupling_F_xi")
    _need(Phi, (LOW, LOW), "coupling_F_xi")
    out = _phi_bracket(D, Phi).contract_with(2, xi, 0)
    return (out + Phi.scale(D.divergence(xi) * (QQ(1) / D.n))).with_weight(1)


def coupling_F_w(D: Connection, w: Tensor, Phi: Tensor) -> Tensor:
    """w^RC (D_(A Phi_B)R - 1/2 D_R Phi_AB) + nu^C Phi_AB, slots (C, A, B)."""
    _check_bivector(w)
    _need(Phi, (LOW, LOW), "coupling_F_w")
    br = _phi_bracket(D, Phi)                                 # (A, B, R)
    t = br.contract_with(2, w, 0)                             # (A, B, C)
    t = t.permute((2, 0, 1))
    nu = bivector_nu(D, w)
    return t + nu.product(Phi)


def closedness_residual(D: Connection, w: Tensor, Phi: Tensor) -> Tensor:
    """w^RS (D_[A D_|R Phi_S|B] + P_[A|R Phi_S|B]), slots (A, B)."""
    pk = _pack(D)
    dd = D.hessian(Phi)                                       # (A, R, S, B)
    pp = pk.schouten.product(Phi)                             # (A, R, S, B)
    t = (dd + pp).contract_with(1, w, 0).contract(1, 3)       # contract R then S
    return t.alternate(0, 1)


def lie_derivative_phi(D: Connection, v: Tensor, Phi: Tensor) -> Tensor:
    """Projective Lie derivative of Phi in E_(AB)(2)."""
    return weighted_lie_derivative(v, Phi.with_weight(2), D)


def dimension_two_star(D: Connection):
    """Volume-form contractions of the Cotton tensor (dimension two only)."""
    from .projective import star_cotton
    return star_cotton(_pack(D).cotton)


# -- invariance helper ------------------------------------------------------

def b1_scalar_hat(D: Connection, tau: Tensor, upsilon: Tensor) -> Tensor:
    """First scalar operator computed for the projectively changed connection.

    Uses the weighted transformation rule for both derivatives and the
    transformed Schouten tensor, all in the original trivialisation.
    """
    from .projective import transform_weighted, transformed_schouten
    d1 = transform_weighted(D, tau, upsilon)
    d2 = transform_weighted(D, d1, upsilon)
    P_hat = transformed_schouten(D, _pack(D).schouten, upsilon)
    return d2 + P_hat.scale(tau.value())


def window_defect(B: Tensor) -> Tensor:
    """Skew part over the first three slots; zero for window-symmetric tensors."""
    return B.alternate(0, 1, 2)


def as_array(T: Tensor) -> np.ndarray:
    return T.comps


# -- composition oracle -----------------------------------------------------

def composition_pairs(D: Connection) -> dict:
    """sequence -> (B2 o B1, curvature expression), both as callables of the input."""
    pairs = {
        "scalar": (lambda x: b2_scalar(D, b1_scalar(D, x)), lambda x: scalar_composition(D, x)),
        "oneform": (lambda x: b2_twoform(D, b1_oneform(D, x)), lambda x: oneform_composition(D, x)),
        "vector": (lambda x: b2_vector(D, b1_vector(D, x)), lambda x: vector_composition(D, x)),
        "adjoint": (lambda x: b2_adjoint(D, b1_adjoint_modified(D, x)), lambda x: adjoint_composition(D, x)),
    }
    if D.n >= 4:
        pairs["bivector"] = (lambda x: b2_bivector(D, b1_bivector(D, x)), lambda x: bivector_composition(D, x))
    return pairs


def random_input(D: Connection, sequence: str, rng, degree: int = 2) -> Tensor:
    from .projective import random_tensor
    ch = D.chart
    if sequence == "scalar":
        return random_tensor(ch, (), rng, degree, weight=1)
    if sequence == "oneform":
        return random_tensor(ch, (LOW,), rng, degree, weight=2)
    if sequence == "vector":
        return random_tensor(ch, (UP,), rng, degree, weight=-1)
    if sequence == "adjoint":
        return random_tensor(ch, (UP,), rng, degree)
    if sequence == "bivector":
        w = random_tensor(ch, (UP, UP), rng, degree, weight=-2)
        return (w - w.permute((1, 0))).with_weight(-2)
    raise ValueError(f"unknown BGG sequence {sequence!r}")


def verify_compositions(D: Connection, rng, trials: int = 1, degree: int = 2) -> dict:
    """sequence -> True when B2(B1(x)) equals the curvature expression on every trial."""
    out = {}
    for seq, (lhs, rhs) in composition_pairs(D).items():
        ok = True
        for _ in range(trials):
            x = random_input(D, seq, rng, degree)
            if not (lhs(x) - rhs(x)).is_zero():
                ok = False
                break
        out[seq] = ok
    return out
