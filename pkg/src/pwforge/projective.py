"""Affine connections, projective change and the projective curvature stack.

Conventions (fixed throughout the package):

* Christoffel array ``gamma[A, C, B]`` stands for Gamma_A^C_B, so
  D_A xi^C = d_A xi^C + Gamma_A^C_B xi^B.
* Curvature: (D_A D_B - D_B D_A) xi^C = R_AB^C_D xi^D, stored as
  ``R[A, B, C, D]``.
* Ric_AB = R_RA^R_B and, for special connections, P_AB = Ric_AB / (n - 1).
* W_AB^C_D = R_AB^C_D + P_AD delta^C_B - P_BD delta^C_A.
* Y_CAB = D_A P_BC - D_B P_AC.
* Derivative slots are always prepended.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .ring import QQ, Poly, PolyRing
from .tensor import LOW, UP, Chart, Tensor, _fix


class NotSpecialError(ValueError):
    """Raised when a Schouten-dependent quantity is requested for a non-special connection."""


def base_chart(n: int, names=None, ring: PolyRing | None = None) -> Chart:
    names = tuple(names) if names else tuple(f"x{i + 1}" for i in range(n))
    if len(names) != n:
        raise ValueError(f"expected {n} coordinate names, got {names}")
    return Chart("M", names, ring)


def gamma_terms(gamma: np.ndarray, T: Tensor) -> np.ndarray:
    """Sum over slots of the connection terms acting on T, derivative slot first.

    Upper slot c gets + gamma[A, c, R] T^..R..; lower slot b gets
    - gamma[A, R, b] T_..R...
    """
    n = T.dim
    shape = (n,) + T.comps.shape
    acc = None
    for k, s in enumerate(T.sig):
        if s == UP:
            t = np.tensordot(gamma, T.comps, axes=([2], [k]))  # (A, c, rest)
            t = np.moveaxis(t, 1, k + 1)
        else:
            t = -np.tensordot(gamma, T.comps, axes=([1], [k]))  # (A, b, rest)
            t = np.moveaxis(t, 1, k + 1)
        acc = t if acc is None else acc + t
    if acc is None:
        return None
    return np.asarray(acc, dtype=object).reshape(shape)


class Connection:
    """Torsion-free connection on a chart given by Christoffel symbols.

    ``density_denominator`` is n+1 for projective weights on the base and
    the chart dimension for conformal weights on a metric chart.
    """

    def __init__(self, chart: Chart, gamma, density_denominator=None, check: bool = True):
        n = chart.dim
        g = np.asarray(gamma, dtype=object)
        if g.shape != (n, n, n):
            raise ValueError(f"Christoffel array must have shape {(n, n, n)}")
        self.chart = chart
        self.gamma = _fix(g, chart.ring)
        self.n = n
        self.density_denominator = QQ(density_denominator if density_denominator is not None else n + 1)
        if check:
            for A in range(n):
                for B in range(A + 1, n):
                    for C in range(n):
                        if self.gamma[A, C, B] != self.gamma[B, C, A]:
                            raise ValueError("connection has torsion (Gamma not symmetric)")
        self._pack = None

    @classmethod
    def flat(cls, chart: Chart):
        return cls(chart, np.full((chart.dim,) * 3, chart.zero(), dtype=object))

    @classmethod
    def from_dict(cls, chart: Chart, entries: dict, one_based: bool = True, density_denominator=None):
        """Entries keyed by (A, C, B); the symmetric partner is filled in and must agree."""
        n = chart.dim
        g = np.full((n, n, n), chart.zero(), dtype=object)
        seen = {}
        for key, val in entries.items():
            A, C, B = (k - 1 for k in key) if one_based else key
            p = chart.ring.coerce(val) if isinstance(val, Poly) else chart.parse(val)
            for idx in ((A, C, B), (B, C, A)):
                if idx in seen and seen[idx] != p:
                    raise ValueError(f"conflicting symmetric entries for Gamma{tuple(i + 1 for i in idx)}")
                seen[idx] = p
                g[idx] = p
        return cls(chart, g, density_denominator)

    def to_ring(self, ring: PolyRing, chart: Chart | None = None) -> "Connection":
        chart = chart or self.chart.with_ring(ring)
        return Connection(chart, _fix(self.gamma, ring), self.density_denominator, check=False)

    def is_flat_coordinates(self) -> bool:
        return all(not v for v in self.gamma.flat)

    def to_literal(self) -> dict:
        out = {}
        n = self.n
        for A in range(n):
            for C in range(n):
                for B in range(A, n):
                    v = self.gamma[A, C, B]
                    if v:
                        out[f"{A + 1},{C + 1},{B + 1}"] = str(v)
        return out

    # -- derivatives -------------------------------------------------------
    def covariant_derivative(self, T: Tensor) -> Tensor:
        """D T with the new lower slot first; densities get no extra term."""
        if T.chart.coords != self.chart.coords:
            raise ValueError("chart mismatch")
        dT = T.partial()
        extra = gamma_terms(self.gamma, T)
        if extra is None:
            return dT
        return Tensor(T.chart, dT.sig, _fix(dT.comps + extra, T.chart.ring), T.weight, _checked=True)

    D = covariant_derivative

    def divergence(self, v: Tensor) -> Poly:
        """D_R v^R for a vector field."""
        return self.covariant_derivative(v).contract(0, 1).value()

    def hessian(self, f: Tensor) -> Tensor:
        return self.covariant_derivative(self.covariant_derivative(f))

    # -- curvature ---------------------------------------------------------
    def riemann(self) -> Tensor:
        return riemann_from_gamma(self.chart, self.gamma)

    def ricci(self) -> Tensor:
        return self.riemann().contract(0, 2)

    def is_special(self) -> bool:
        ric = self.ricci()
        return (ric - ric.permute((1, 0))).is_zero()

    def curvature(self) -> "CurvaturePack":
        if self._pack is None:
            self._pack = curvature_pack(self)
        return self._pack


def riemann_from_gamma(chart: Chart, gamma: np.ndarray) -> Tensor:
    """R[A,B,C,D] = d_A G_B^C_D - d_B G_A^C_D + G_A^C_R G_B^R_D - G_B^C_R G_A^R_D."""
    n = chart.dim
    dG = np.empty((n,) * 4, dtype=object)
    for a, name in enumerate(chart.coords):
        for idx in np.ndindex(n, n, n):
            dG[(a,) + idx] = gamma[idx].diff(name)
    GG = np.tensordot(gamma, gamma, axes=([2], [1]))          # (A, C, B, D)
    GG = np.transpose(GG, (0, 2, 1, 3))                         # (A, B, C, D)
    R = dG - np.transpose(dG, (1, 0, 2, 3)) + GG - np.transpose(GG, (1, 0, 2, 3))
    return Tensor(chart, (LOW, LOW, UP, LOW), _fix(R, chart.ring), _checked=True)


@dataclass
class CurvaturePack:
    riemann: Tensor
    ricci: Tensor
    schouten: Tensor
    weyl: Tensor
    cotton: Tensor


def curvature_pack(D: Connection) -> CurvaturePack:
    n = D.n
    if n < 2:
        raise ValueError("curvature stack needs dimension at least 2")
    R = D.riemann()
    ric = R.contract(0, 2)
    if not (ric - ric.permute((1, 0))).is_zero():
        raise NotSpecialError("Ricci tensor is not symmetric: connection is not special")
    P = ric.scale(QQ(1) / (n - 1))
    delta = Tensor.delta(D.chart)
    # P_AD delta^C_B in slot order (A, B, C, D)
    PD = P.product(delta)                       # (A, D, C, B)
    W = R + PD.permute((0, 3, 2, 1)) - PD.permute((3, 0, 2, 1))
    DP = D.covariant_derivative(P)              # (A, B, C) = D_A P_BC
    Yp = DP.permute((2, 0, 1))                  # (C, A, B)
    Y = Yp - Yp.permute((0, 2, 1))
    return CurvaturePack(R, ric, P, W, Y)


# -- projective change -----------------------------------------------------

def difference_gamma(chart: Chart, upsilon: Tensor) -> np.ndarray:
    """Q_A^C_B = delta_A^C Y_B + delta_B^C Y_A for a one-form Y."""
    n = chart.dim
    Q = np.full((n, n, n), chart.zero(), dtype=object)
    for A in range(n):
        for B in range(n):
            Q[A, A, B] = Q[A, A, B] + upsilon.comps[B]
            Q[A, B, B] = Q[A, B, B] + upsilon.comps[A]
    return Q


def projective_change(D: Connection, upsilon: Tensor) -> Connection:
    if upsilon.sig != (LOW,):
        raise ValueError("projective change needs a one-form")
    if upsilon.chart.coords != D.chart.coords:
        raise ValueError("chart mismatch")
    Q = difference_gamma(D.chart, upsilon.to_ring(D.chart.ring))
    return Connection(D.chart, _fix(D.gamma + Q, D.chart.ring), D.density_denominator)


def transform_weighted(D: Connection, T: Tensor, upsilon: Tensor, DT: Tensor | None = None) -> Tensor:
    """Derivative of T for the projectively changed connection in the same trivialisation.

    D^_A T = D_A T + w Y_A T + (difference tensor acting on each slot).
    """
    if DT is None:
        DT = D.covariant_derivative(T)
    Q = difference_gamma(D.chart, upsilon)
    extra = gamma_terms(Q, T)
    comps = DT.comps if extra is None else DT.comps + extra
    out = Tensor(T.chart, DT.sig, _fix(np.asarray(comps, dtype=object).reshape(DT.comps.shape), T.chart.ring),
                 T.weight, _checked=True)
    if T.weight:
        out = out + upsilon.product(T).scale(T.weight).with_weight(T.weight)
    return out


def transformed_schouten(D: Connection, P: Tensor, upsilon: Tensor) -> Tensor:
    """P^_AB = P_AB - D_A Y_B + Y_A Y_B."""
    return P - D.covariant_derivative(upsilon) + upsilon.product(upsilon)


# -- Lie derivatives -------------------------------------------------------

def weighted_lie_derivative(v: Tensor, T: Tensor, D: Connection | None = None) -> Tensor:
    """Lie derivative of a weighted tensor along a vector field.

    The tensorial part uses coordinate derivatives; the density term is
    -(w / den) (D_R v^R) T with den taken from the connection.
    """
    if v.sig != (UP,):
        raise ValueError("Lie derivative needs a vector field")
    chart = T.chart
    n = chart.dim
    dT = T.partial()
    out = _contract_first(dT, v)
    dv = v.partial()                    # dv[a, c] = d_a v^c
    for k, s in enumerate(T.sig):
        if s == UP:
            # - d_R v^c T^..R..
            t = np.tensordot(dv.comps, T.comps, axes=([0], [k]))   # (c, rest)
            t = np.moveaxis(t, 0, k)
            out = Tensor(chart, T.sig, _fix(out.comps - t, chart.ring), T.weight, _checked=True)
        else:
            # + d_b v^R T_..R..
            t = np.tensordot(dv.comps, T.comps, axes=([1], [k]))   # (b, rest)
            t = np.moveaxis(t, 0, k)
            out = Tensor(chart, T.sig, _fix(out.comps + t, chart.ring), T.weight, _checked=True)
    if T.weight:
        if D is None:
            raise ValueError("weighted Lie derivative needs a connection for the divergence")
        div = D.divergence(v)
        out = out - T.scale(div * (T.weight / D.density_denominator))
    return out.with_weight(T.weight)


def _contract_first(dT: Tensor, v: Tensor) -> Tensor:
    """v^R d_R T."""
    comps = np.tensordot(v.comps, dT.comps, axes=([0], [0]))
    comps = np.asarray(comps, dtype=object)
    if comps.shape == ():
        a = np.empty((), dtype=object)
        a[()] = comps[()]
        comps = a
    return Tensor(dT.chart, dT.sig[1:], _fix(comps, dT.chart.ring), dT.weight, _checked=True)


def lie_bracket(u: Tensor, v: Tensor) -> Tensor:
    """[u, v]^a = u^b d_b v^a - v^b d_b u^a."""
    return _contract_first(v.partial(), u) - _contract_first(u.partial(), v)


# -- dimension two ---------------------------------------------------------

def epsilon(chart: Chart):
    """(eps_AB, eps^AB) with eps_12 = eps^12 = 1."""
    if chart.dim != 2:
        raise ValueError("the volume form helper is for dimension 2")
    lo = Tensor.from_dict(chart, (LOW, LOW), {(0, 1): 1, (1, 0): -1}, weight=3)
    hi = Tensor.from_dict(chart, (UP, UP), {(0, 1): 1, (1, 0): -1}, weight=-3)
    # eps_AR eps^BR = delta_A^B
    check = lo.contract_with(1, hi, 1)          # slots (A lower, B upper)
    if not (check.permute((1, 0)) - Tensor.delta(chart)).is_zero():
        raise AssertionError("volume form sign convention broken")
    return lo, hi


def star_cotton(Y: Tensor) -> Tensor:
    """(*Y)^A = Y_CDE eps^AC eps^DE."""
    _, eu = epsilon(Y.chart)
    n = 2
    out = Tensor.zeros(Y.chart, (UP,))
    for A in range(n):
        acc = Y.chart.zero()
        for C in range(n):
            for Dd in range(n):
                for E in range(n):
                    e = eu.comps[A, C] * eu.comps[Dd, E]
                    if e and Y.comps[C, Dd, E]:
                        acc = acc + Y.comps[C, Dd, E] * e
        out.comps[A] = acc
    return out


def star_b2(B: Tensor) -> Poly:
    """B_ABCD eps^AB eps^CD."""
    _, eu = epsilon(B.chart)
    acc = B.chart.zero()
    for idx in np.ndindex(2, 2, 2, 2):
        e = eu.comps[idx[0], idx[1]] * eu.comps[idx[2], idx[3]]
        if e and B.comps[idx]:
            acc = acc + B.comps[idx] * e
    return acc


# -- generators of test connections ---------------------------------------

def appendix_family_upsilon(chart: Chart, a2=0, a1=0, a0=0, b1=0, b0=0) -> Tensor:
    """Y = (a2 x1^2 + a1 x1 + a0) dx1 + (b1 x2 + b0) dx2 on a 2-dimensional chart."""
    x1, x2 = chart.var(0), chart.var(1)
    u1 = x1 * x1 * QQ(a2) + x1 * QQ(a1) + chart.const(a0)
    u2 = x2 * QQ(b1) + chart.const(b0)
    return Tensor.from_dict(chart, (LOW,), {0: u1, 1: u2})


def appendix_family(chart: Chart, **params) -> Connection:
    """Projective change of the flat connection by the two-parameter family above."""
    return projective_change(Connection.flat(chart), appendix_family_upsilon(chart, **params))


def random_poly(chart: Chart, rng: random.Random, degree: int, density: float = 0.6,
                coeff_range: int = 3, names=None) -> Poly:
    names = names or chart.coords
    out = chart.zero()
    ring = chart.ring
    for key in ring.monomials_upto(names, degree):
        if rng.random() < density:
            c = rng.randint(-coeff_range, coeff_range)
            if c:
                out = out + Poly(ring, {key: QQ(c) / rng.choice((1, 1, 2, 3))})
    return out


def random_special_connection(chart: Chart, rng: random.Random, degree: int = 2, density: float = 0.5) -> Connection:
    """Random symmetric connection made special by removing its trace projectively.

    With Y_B = -Gamma_R^R_B / (n+1) the changed connection is trace-free in
    R and B, so its Ricci tensor is symmetric.
    """
    n = chart.dim
    g = np.full((n, n, n), chart.zero(), dtype=object)
    for A in range(n):
        for B in range(A, n):
            for C in range(n):
                p = random_poly(chart, rng, degree, density)
                g[A, C, B] = p
                g[B, C, A] = p
    D = Connection(chart, g)
    tr = Tensor(chart, (LOW,), np.array([sum((g[R, R, B] for R in range(n)), chart.zero()) for B in range(n)],
                                        dtype=object))
    special = projective_change(D, tr.scale(QQ(-1) / (n + 1)))
    if not special.is_special():
        raise AssertionError("trace removal failed to produce a special connection")
    return special


def random_tensor(chart: Chart, sig, rng: random.Random, degree: int = 2, density: float = 0.5,
                  weight=0) -> Tensor:
    t = Tensor.zeros(chart, sig, weight)
    for idx in np.ndindex(*t.comps.shape):
        t.comps[idx] = random_poly(chart, rng, degree, density)
    return t
