"""Patterson-Walker metrics on the cotangent chart and their curvature.

The doubled chart has coordinates (x1..xn, p1..pn).  For a special
connection D and a symmetric Phi on the base, the modified PW metric has
components

    g(dx^A, dp_B) = delta_A^B,   g(dx^A, dx^B) = -2 Gamma_A^C_B p_C + Phi_AB,

and vanishing p-p block.  Phi enters with coefficient +1 and the pairing
block is the identity; constant rescalings of the metric are irrelevant for
every conformal statement checked here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .projective import Connection, base_chart, weighted_lie_derivative
from .ring import QQ, Poly, PolyRing
from .tensor import LOW, UP, Chart, Tensor, _fix, raise_index, trace_free_metric, window_trace_free

HALF = QQ("1/2")
QUARTER = QQ("1/4")


# -- charts ------------------------------------------------------------------

class PWChart:
    """The chart (x, p) on the cotangent bundle of a base chart."""

    def __init__(self, base: Chart, fibre_names=None):
        n = base.dim
        fibre = tuple(fibre_names) if fibre_names else tuple(f"p{i + 1}" for i in range(n))
        if len(fibre) != n or set(fibre) & set(base.ring.names):
            raise ValueError("fibre variable names must be n fresh names")
        self.base = base
        self.n = n
        self.fibre = fibre
        ring = base.ring.union(PolyRing(fibre))
        self.chart = Chart("PW", base.coords + fibre, ring)
        self.ring = ring

    @property
    def dim(self) -> int:
        return 2 * self.n

    def x(self, A: int) -> int:
        return A

    def p(self, A: int) -> int:
        return self.n + A

    def pvar(self, A: int) -> Poly:
        return self.ring.var(self.fibre[A])

    def lift_function(self, f: Poly) -> Poly:
        return f.to_ring(self.ring)

    def pullback(self, T: Tensor) -> Tensor:
        """Pull back a covariant base tensor (all slots lower) along the projection."""
        if any(s != LOW for s in T.sig):
            raise ValueError("only covariant tensors pull back")
        out = Tensor.zeros(self.chart, T.sig, T.weight)
        for idx, v in T.nonzero_items():
            out.comps[idx] = v.to_ring(self.ring)
        return out

    def is_horizontal(self, T: Tensor) -> bool:
        """Covariant tensor annihilated by every vertical vector in every slot."""
        n = self.n
        for idx, v in T.nonzero_items():
            if any(i >= n for i in idx):
                return False
        return True

    def restrict(self, T: Tensor) -> Tensor:
        """Base tensor from the x-block of a p-independent covariant tensor."""
        n = self.n
        out = Tensor.zeros(self.base, T.sig, T.weight)
        for idx, v in T.nonzero_items():
            if any(i >= n for i in idx):
                raise ValueError("tensor is not horizontal")
            if any(v.degree(p) for p in self.fibre):
                raise ValueError("tensor depends on the fibre variables")
            out.comps[idx] = v.to_ring(self.base.ring)
        return out


# -- metrics -------------------------------------------------------------------

@dataclass
class MetricCurvature:
    riemann: Tensor          # R_ab^c_d
    riemann_low: Tensor      # R_ab^r_d g_rc in slots (a, b, c, d)
    ricci: Tensor
    scalar: Poly
    schouten: Tensor
    weyl: Tensor             # W_ab^c_d
    weyl_low: Tensor


def _christoffel(chart: Chart, g: Tensor, ginv: Tensor) -> np.ndarray:
    """gamma[a, c, b] = 1/2 g^{cd} (d_a g_db + d_b g_da - d_d g_ab)."""
    dg = g.partial().comps                                       # dg[d, a, b] = d_d g_ab
    # first kind, d first: dg[a, d, b] + dg[b, a, d] - dg[d, a, b]
    first = dg.transpose(1, 0, 2) + dg.transpose(2, 1, 0) - dg
    gam = np.tensordot(ginv.comps, first, axes=([1], [0]))          # (c, a, b)
    gam = _fix(np.asarray(np.transpose(gam, (1, 0, 2)), dtype=object), chart.ring)
    half = np.frompyfunc(lambda v: v * HALF, 1, 1)
    return _fix(half(gam), chart.ring)


class Metric:
    """Symmetric covariant 2-tensor with an exact inverse and its Levi-Civita connection."""

    def __init__(self, g: Tensor, ginv: Tensor | None = None, name: str = "g"):
        if g.sig != (LOW, LOW):
            raise ValueError("metric must have two lower slots")
        if not (g - g.permute((1, 0))).is_zero():
            raise ValueError("metric is not symmetric")
        self.chart = g.chart
        self.g = g
        self.name = name
        if ginv is None:
            raise ValueError("an explicit inverse is required (see walker_inverse)")
        prod = g.contract_with(1, ginv, 0)                  # g_ar g^rb -> (a, b)
        if not (prod.permute((1, 0)) - Tensor.delta(self.chart)).is_zero():
            raise ZeroDivisionError("supplied inverse does not invert the metric")
        self.ginv = ginv
        self._lc = None
        self._curv = None

    @property
    def dim(self) -> int:
        return self.chart.dim

    def levi_civita(self) -> Connection:
        if self._lc is None:
            gamma = _christoffel(self.chart, self.g, self.ginv)
            self._lc = Connection(self.chart, gamma, density_denominator=self.dim, check=False)
        return self._lc

    def lower(self, v: Tensor) -> Tensor:
        """v_a = g_ab v^b for a vector field."""
        return self.g.contract_with(1, v, 0)

    def lie_derivative(self, v: Tensor) -> Tensor:
        """L_v g from coordinate derivatives only."""
        return weighted_lie_derivative(v, self.g)

    def curvature(self) -> MetricCurvature:
        if self._curv is None:
            self._curv = metric_curvature(self)
        return self._curv


def metric_curvature(m: Metric) -> MetricCurvature:
    N = m.dim
    if N < 3:
        raise ValueError("conformal curvature needs dimension at least 3")
    R = m.levi_civita().riemann()
    Rlow = R.contract_with(2, m.g, 0).permute((0, 1, 3, 2))
    ric = R.contract(0, 2)
    scal = _trace(ric, m.ginv)
    P = (ric - m.g.scale(scal * (QQ(1) / (2 * (N - 1))))).scale(QQ(1) / (N - 2))
    gP = m.g.product(P).permute((0, 2, 1, 3))          # g_ac P_bd -> (a, b, c, d)
    Wlow = Rlow - gP.pair_skew().scale(4)
    W = raise_index(Wlow, 2, m.ginv)
    return MetricCurvature(R, Rlow, ric, scal, P, W, Wlow)


def _trace(T: Tensor, ginv: Tensor) -> Poly:
    acc = T.chart.zero()
    for idx, v in T.nonzero_items():
        gi = ginv.comps[idx]
        if gi:
            acc = acc + gi * v
    return acc


def walker_inverse(g: Tensor, n: int) -> Tensor:
    """Inverse of [[A, I], [I, 0]] in (x, p) ordering: [[0, I], [I, -A]]."""
    inv = Tensor.zeros(g.chart, (UP, UP))
    one = g.chart.ring.one()
    for A in range(n):
        inv.comps[A, n + A] = one
        inv.comps[n + A, A] = one
        for B in range(n):
            if g.comps[n + A, n + B]:
                raise ValueError("metric has a nonzero vertical block")
            if g.comps[A, n + B] != (1 if A == B else 0):
                raise ValueError("pairing block is not the identity")
            inv.comps[n + A, n + B] = -g.comps[A, B]
    return inv


# -- PW construction -------------------------------------------------------------

def _check_phi(D: Connection, Phi: Tensor | None) -> Tensor:
    if Phi is None:
        return Tensor.zeros(D.chart, (LOW, LOW), weight=2)
    if Phi.sig != (LOW, LOW):
        raise ValueError("Phi must be a symmetric covariant 2-tensor")
    if not (Phi - Phi.permute((1, 0))).is_zero():
        raise ValueError("Phi must be symmetric")
    return Phi.to_ring(D.chart.ring, D.chart) if Phi.chart.ring is not D.chart.ring else Phi


def pw_components(pw: PWChart, D: Connection, Phi: Tensor | None = None) -> Tensor:
    n = pw.n
    Phi = _check_phi(D, Phi)
    g = Tensor.zeros(pw.chart, (LOW, LOW))
    one = pw.ring.one()
    for A in range(n):
        g.comps[A, n + A] = one
        g.comps[n + A, A] = one
        for B in range(n):
            acc = Phi.comps[A, B].to_ring(pw.ring)
            for C in range(n):
                gam = D.gamma[A, C, B]
                if gam:
                    acc = acc - gam.to_ring(pw.ring) * pw.pvar(C) * 2
            g.comps[A, B] = acc
    return g


class PWMetric(Metric):
    """Modified PW metric of (D, Phi) together with its chart data."""

    def __init__(self, D: Connection, Phi: Tensor | None = None, fibre_names=None, check_special: bool = True):
        if check_special and not D.is_special():
            from .projective import NotSpecialError
            raise NotSpecialError("PW metrics are built from special connections")
        self.base_connection = D
        self.pw = PWChart(D.chart, fibre_names)
        self.Phi = _check_phi(D, Phi)
        g = pw_components(self.pw, D, self.Phi)
        super().__init__(g, walker_inverse(g, self.pw.n), name="gbar")

    @property
    def n(self) -> int:
        return self.pw.n

    def standard(self) -> "PWMetric":
        """The unmodified PW metric of the same connection."""
        return PWMetric(self.base_connection, None, self.pw.fibre, check_special=False)

    def phi_pullback(self) -> Tensor:
        return self.pw.pullback(self.Phi)


def build_pw(D: Connection, Phi: Tensor | None = None, fibre_names=None) -> PWMetric:
    return PWMetric(D, Phi, fibre_names)


# -- frames ----------------------------------------------------------------------

@dataclass
class FrameData:
    chi_up: list        # chi^{aA} = d/dp_A
    eta_up: list        # d/dx^A + Gamma_A^C_B p_C d/dp_B
    chi_low: list       # dx^A
    eta_low: list       # dp_A - Gamma_A^C_B p_C dx^B
    k_up: Tensor
    k_low: Tensor
    mu: Tensor          # D~_[a k_b]
    checks: dict = field(default_factory=dict)


def frames(m: PWMetric, verify: bool = True) -> FrameData:
    pw, D = m.pw, m.base_connection
    n, ch, ring = pw.n, pw.chart, pw.ring
    chi_up, eta_up, chi_low, eta_low = [], [], [], []
    for A in range(n):
        cu = Tensor.zeros(ch, (UP,))
        cu.comps[pw.p(A)] = ring.one()
        eu = Tensor.zeros(ch, (UP,))
        eu.comps[pw.x(A)] = ring.one()
        cl = Tensor.zeros(ch, (LOW,))
        cl.comps[pw.x(A)] = ring.one()
        el = Tensor.zeros(ch, (LOW,))
        el.comps[pw.p(A)] = ring.one()
        for B in range(n):
            acc = ring.zero()
            for C in range(n):
                if D.gamma[A, C, B]:
                    acc = acc + D.gamma[A, C, B].to_ring(ring) * pw.pvar(C)
            eu.comps[pw.p(B)] = eu.comps[pw.p(B)] + acc
            el.comps[pw.x(B)] = el.comps[pw.x(B)] - acc
        chi_up.append(cu)
        eta_up.append(eu)
        chi_low.append(cl)
        eta_low.append(el)
    k_up = Tensor.zeros(ch, (UP,))
    k_low = Tensor.zeros(ch, (LOW,))
    for A in range(n):
        k_up.comps[pw.p(A)] = pw.pvar(A) * 2
        k_low.comps[pw.x(A)] = pw.pvar(A) * 2
    gt = m.standard()
    Dk = gt.levi_civita().covariant_derivative(k_low)
    mu = Dk.alternate(0, 1)
    fd = FrameData(chi_up, eta_up, chi_low, eta_low, k_up, k_low, mu)
    if verify:
        fd.checks = verify_frames(gt, fd, Dk)
        bad = [k for k, ok in fd.checks.items() if not ok]
        if bad:
            raise AssertionError(f"frame invariants failed: {bad}")
    return fd


def _pair(form: Tensor, vec: Tensor) -> Poly:
    return form.contract_with(0, vec, 0).value()


def verify_frames(gt: Metric, fd: FrameData, Dk: Tensor | None = None) -> dict:
    n = len(fd.chi_up)
    ch = gt.chart
    ok_xinu = True
    for A in range(n):
        for B in range(n):
            if _pair(fd.chi_low[A], fd.chi_up[B]) != 0:
                ok_xinu = False
            if _pair(fd.eta_low[B], fd.eta_up[A]) != 0:
                ok_xinu = False
            if _pair(fd.chi_low[A], fd.eta_up[B]) != (1 if A == B else 0):
                ok_xinu = False
    # lowered frames agree with the metric
    ok_lower = all(gt.lower(fd.chi_up[A]) == fd.chi_low[A] and gt.lower(fd.eta_up[A]) == fd.eta_low[A]
                   for A in range(n))
    acc = Tensor.zeros(ch, (LOW, LOW))
    for A in range(n):
        acc = acc + fd.chi_low[A].product(fd.eta_low[A])
    ok_split = (acc + acc.permute((1, 0)) - gt.g).is_zero()
    if Dk is None:
        Dk = gt.levi_civita().covariant_derivative(fd.k_low)
    ok_hom = (Dk - fd.mu - gt.g).is_zero()
    ok_mu = True
    for A in range(n):
        if not (fd.mu.contract_with(1, fd.chi_up[A], 0) + fd.chi_low[A]).is_zero():
            ok_mu = False
        if not (fd.mu.contract_with(1, fd.eta_up[A], 0) - fd.eta_low[A]).is_zero():
            ok_mu = False
    ok_lie = (gt.lie_derivative(fd.k_up) - gt.g.scale(2)).is_zero()
    return {"xinu": ok_xinu, "lowered": ok_lower, "g_chi_eta": ok_split, "k_homothety": ok_hom,
            "mu_action": ok_mu, "lie_k": ok_lie}


# -- difference tensor -------------------------------------------------------------

def difference_tensor(m: PWMetric) -> Tensor:
    """F_a^c_d = D~_(a Phi_d)^c - 1/2 D~^c Phi_ad, indices moved with the standard metric."""
    gt = m.standard()
    Phi = m.phi_pullback()
    DPhi = gt.levi_civita().covariant_derivative(Phi)          # (a, d, r)
    t1 = raise_index(DPhi, 2, gt.ginv).symmetrize(0, 1).permute((0, 2, 1))   # (a, c, d)
    t2 = raise_index(DPhi, 0, gt.ginv).permute((1, 0, 2))                     # (c, a, d) -> (a, c, d)
    return t1 - t2.scale(HALF)


def connection_difference(m: PWMetric) -> Tensor:
    """Christoffels of the modified metric minus those of the standard one, as (a, c, d)."""
    gb = m.levi_civita().gamma
    gt = m.standard().levi_civita().gamma
    return Tensor(m.chart, (LOW, UP, LOW), _fix(gb - gt, m.chart.ring), _checked=True)


# -- conformal second BGG operator and relations -----------------------------------

def conformal_b2(gt: Metric, Phi: Tensor) -> Tensor:
    """Window trace-free part of the pair-skew of
    D_a D_c Phi_bd + P_ac Phi_bd + 1/4 W_ab^r_c Phi_dr - 1/4 W_cd^r_a Phi_br."""
    cv = gt.curvature()
    LC = gt.levi_civita()
    dd = LC.hessian(Phi).permute((0, 2, 1, 3))
    pp = cv.schouten.product(Phi).permute((0, 2, 1, 3))
    w1 = cv.weyl.contract_with(2, Phi, 1)
    w2 = w1.permute((2, 3, 0, 1))
    inner = (dd + pp + (w1 - w2).scale(QUARTER)).pair_skew()
    return window_trace_free(inner, gt.g, gt.ginv)


@dataclass
class RelationReport:
    checks: dict
    residuals: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def check_relations(D: Connection, Phi: Tensor | None = None, fibre_names=None) -> RelationReport:
    """Riemann, Ricci, Schouten and Weyl relations between the standard and modified PW metrics."""
    from .bgg import b2_twoform

    mb = build_pw(D, Phi, fibre_names)
    gt = mb.standard()
    pw = mb.pw
    cb, ct = mb.curvature(), gt.curvature()
    Phi_t = mb.phi_pullback()
    LC = gt.levi_civita()
    res = {}
    # Riemann relation
    S = LC.hessian(Phi_t).alternate(1, 2)                       # D_c D_[a Phi_b]d as (c, a, b, d)
    t2 = S.permute((1, 2, 0, 3))
    t3 = S.permute((1, 2, 3, 0))
    t4 = ct.riemann.contract_with(2, Phi_t, 1).alternate(2, 3)
    rhs = ct.riemann_low - t2 + t3 - t4
    res["riemann"] = cb.riemann_low - rhs
    # Ricci and Schouten
    ric_base = pw.pullback(D.ricci())
    res["ricci_modified_standard"] = cb.ricci - ct.ricci
    res["ricci_pullback"] = cb.ricci - ric_base
    # what holds with P = Ric/(n-1) and the conformal Schouten (Ric - J g)/(N-2)
    res["ricci_pullback_twice"] = cb.ricci - ric_base.scale(2)
    res["schouten"] = cb.schouten - ct.schouten
    P_base = pw.pullback(D.curvature().schouten)
    res["schouten_pullback"] = ct.schouten - P_base
    res["scalar"] = Tensor.scalar(mb.chart, cb.scalar)
    # Weyl relation
    B2t = conformal_b2(gt, Phi_t)
    a1 = ct.weyl.contract_with(2, Phi_t, 1).alternate(2, 3)
    a2 = a1.permute((2, 3, 0, 1))
    rhsW = ct.weyl_low - B2t.scale(2) - (a1 + a2).scale(HALF)
    res["weyl"] = cb.weyl_low - rhsW
    res["b2_pullback"] = B2t - pw.pullback(b2_twoform(D, mb.Phi).with_weight(0)).with_weight(B2t.weight)
    # integrability condition on vertical pairs
    n = pw.n
    ic = Tensor.zeros(mb.chart, (LOW, UP))
    bad = mb.chart.zero()
    for i in range(n):
        for j in range(n):
            for b in range(2 * n):
                for c in range(2 * n):
                    v = cb.weyl.comps[pw.p(i), b, c, pw.p(j)]
                    if v:
                        bad = bad + v * v
    res["intcon"] = Tensor.scalar(mb.chart, bad)
    checks = {k: v.is_zero() for k, v in res.items() if k != "scalar"}
    checks["scalar"] = cb.scalar == 0 if D.ricci().is_zero() else True
    sizes = {k: v.residual_size() for k, v in res.items() if k != "scalar"}
    return RelationReport(checks, sizes)


def ricci_flat_iff(D: Connection, Phi: Tensor | None = None) -> tuple:
    """(metric Ricci-flat, base Ricci-flat); these agree for every input."""
    mb = build_pw(D, Phi)
    return mb.curvature().ricci.is_zero(), D.ricci().is_zero()


def is_conformally_flat(D: Connection, Phi: Tensor | None = None) -> tuple:
    """Projective flatness plus vanishing second BGG operator, with the metric Weyl witness.

    Returns (verdict, witness dict).  The witness records both the projective
    criterion and whether the metric Weyl tensor vanishes; they must agree.
    """
    from .bgg import b2_twoform

    n = D.n
    pk = D.curvature()
    proj_flat = pk.cotton.is_zero() if n == 2 else pk.weyl.is_zero()
    Phi = _check_phi(D, Phi)
    b2_zero = b2_twoform(D, Phi).is_zero()
    verdict = proj_flat and b2_zero
    weyl_zero = build_pw(D, Phi).curvature().weyl.is_zero()
    return verdict, {"projectively_flat": proj_flat, "b2_zero": b2_zero, "metric_weyl_zero": weyl_zero,
                     "agree": verdict == weyl_zero}


# -- homothety residuals -------------------------------------------------------------

def s2f_residual(m: PWMetric, alpha: Tensor | None = None) -> Tensor:
    """Residual of trace-free D_(a k'_b) = -Phi'_ab with k' = k + alpha and Phi' = Phi - D_(alpha).

    alpha is a base one-form (None means zero); the metric is kept fixed.
    """
    from .bgg import b1_oneform

    fd = frames(m, verify=False)
    k_low = fd.k_low
    Phi_new = m.phi_pullback()
    if alpha is not None:
        k_low = k_low + m.pw.pullback(alpha).with_weight(0)
        Phi_new = Phi_new - m.pw.pullback(b1_oneform(m.base_connection, alpha)).with_weight(Phi_new.weight)
    Dk = m.levi_civita().covariant_derivative(k_low).symmetrize(0, 1)
    return trace_free_metric(Dk, m.g, m.ginv) + Phi_new.with_weight(0)


def homothety_defect(m: PWMetric) -> Tensor:
    """L_k g - 2 g + 2 Phi, which vanishes for every modified PW metric."""
    fd = frames(m, verify=False)
    return m.lie_derivative(fd.k_up) - m.g.scale(2) + m.phi_pullback().with_weight(0).scale(2)


# -- lifts ----------------------------------------------------------------------------

def _base(T: Tensor | None, D: Connection, sig, weight=0) -> Tensor:
    if T is None:
        return Tensor.zeros(D.chart, sig, weight)
    if T.sig != tuple(sig):
        raise ValueError(f"expected signature {tuple(sig)}, got {T.sig}")
    return T


def phi_matrix(D: Connection, Phi: Tensor, w: Tensor, v: Tensor, psi0: Poly) -> Tensor:
    """phi_A^B = -(D_A v^B + w^SB Phi_SA)_0 + ((n-1)/(n(n+1)) D_S v^S + psi0) delta_A^B."""
    n = D.n
    inner = D.covariant_derivative(v) + w.contract_with(0, Phi, 0).permute((1, 0))   # w^SB Phi_SA -> (B, A) -> (A, B)
    tr = inner.contract(0, 1).value()
    delta = Tensor.delta(D.chart).permute((1, 0))                                     # (A lower, B upper)
    tf = inner - delta.scale(tr * (QQ(1) / n))
    coeff = D.divergence(v) * (QQ(n - 1) / (n * (n + 1))) + psi0
    return delta.scale(coeff) - tf


def nu_of(D: Connection, w: Tensor) -> Tensor:
    return D.covariant_derivative(w).contract(0, 1).scale(QQ(1) / (D.n - 1))


@dataclass
class Lift:
    plus: Tensor
    zero: Tensor
    minus: Tensor

    def total(self) -> Tensor:
        return self.plus + self.zero + self.minus


def lifts(m: PWMetric, w: Tensor | None = None, v: Tensor | None = None, alpha: Tensor | None = None,
          psi0=0, phi: Tensor | None = None) -> Lift:
    """Vector fields v+, v0, v- on the PW chart from base data (w, v, alpha, psi0).

    ``phi`` overrides the phi_A^B coefficient; by default it is computed from
    the other data and the modification tensor.
    """
    D, pw = m.base_connection, m.pw
    n, ring = pw.n, pw.ring
    w = _base(w, D, (UP, UP), -2)
    v = _base(v, D, (UP,))
    alpha = _base(alpha, D, (LOW,), 2)
    if not (w + w.permute((1, 0))).is_zero():
        raise ValueError("w must be skew")
    psi0 = psi0 if isinstance(psi0, Poly) else D.chart.const(psi0)
    psi0 = psi0.to_ring(D.chart.ring)
    if phi is None:
        phi = phi_matrix(D, m.Phi, w, v, psi0)
    nu = nu_of(D, w) if n > 1 else Tensor.zeros(D.chart, (UP,))
    fd = frames(m, verify=False)
    L = lambda f: f.to_ring(ring)
    plus = Tensor.zeros(pw.chart, (UP,))
    zero = Tensor.zeros(pw.chart, (UP,))
    minus = Tensor.zeros(pw.chart, (UP,))
    for A in range(n):
        up_w = ring.zero()
        beta2 = ring.zero()
        beta1 = ring.zero()
        for B in range(n):
            if w.comps[A, B]:
                up_w = up_w + L(w.comps[A, B]) * pw.pvar(B)
            if phi.comps[A, B]:
                beta1 = beta1 + L(phi.comps[A, B]) * pw.pvar(B)
        # psi_A^BC p_B p_C with psi = delta_A^(B nu^C) gives p_A (nu^C p_C)
        nup = ring.zero()
        for C in range(n):
            if nu.comps[C]:
                nup = nup + L(nu.comps[C]) * pw.pvar(C)
        beta2 = pw.pvar(A) * nup
        plus = plus + fd.eta_up[A].scale(up_w) + fd.chi_up[A].scale(beta2)
        if v.comps[A]:
            zero = zero + fd.eta_up[A].scale(L(v.comps[A]))
        zero = zero + fd.chi_up[A].scale(beta1)
        if alpha.comps[A]:
            minus = minus + fd.chi_up[A].scale(L(alpha.comps[A]))
    return Lift(plus, zero, minus)


@dataclass
class LiftData:
    w: Tensor
    v: Tensor
    alpha: Tensor
    psi0: Poly


def extract(m: PWMetric, lift: Lift) -> LiftData:
    """Recover (w, v, alpha, psi0) from the three graded pieces.

    w is read from the vertical derivative of the horizontal part of v+:
    w^AB = chi^{aB} chi^A_b D~_a v+^b, so that v+ = w^AB p_B eta_A + ... .
    psi0 uses the divergence of v0 and its contraction with mu.
    """
    gt = m.standard()
    pw, D = m.pw, m.base_connection
    n = pw.n
    LC = gt.levi_civita()
    fd = frames(m, verify=False)
    br = D.chart.ring
    w = Tensor.zeros(D.chart, (UP, UP), -2)
    Dp = LC.covariant_derivative(lift.plus)                   # (a, b)
    for A in range(n):
        for B in range(n):
            w.comps[A, B] = _frame_component(Dp, fd.chi_up[B], fd.chi_low[A]).to_ring(br)
    v = Tensor.zeros(D.chart, (UP,))
    alpha = Tensor.zeros(D.chart, (LOW,), 2)
    for A in range(n):
        v.comps[A] = _pair(fd.chi_low[A], lift.zero).to_ring(br)
        alpha.comps[A] = _pair(fd.eta_low[A], lift.minus).to_ring(br)
    D0 = LC.covariant_derivative(lift.zero)                   # (a, b) = D_a v^b
    div = D0.contract(0, 1).value()
    mu_up = raise_index(fd.mu, 0, gt.ginv)                    # mu^a_b
    mud = mu_up.contract_with(0, D0, 0).contract(0, 1).value()
    psi0 = (div * (QQ(1) / n) - mud) * (QQ(1) / (n + 1))
    return LiftData(w, v, alpha, psi0.to_ring(br))


def _frame_component(T: Tensor, vec: Tensor, form: Tensor) -> Poly:
    """vec^a form_b T_a^b for a (lower, upper) tensor T."""
    return T.contract_with(0, vec, 0).contract_with(0, form, 0).value()


def homothety_decompose(pw: PWChart, v: Tensor) -> Lift:
    """Split a vector field into L_k-eigencomponents with eigenvalues 2, 0, -2.

    An x-component of p-degree d has eigenvalue 2d and a p-component of
    p-degree d has eigenvalue 2d - 2.  Anything else is not of lift shape.
    """
    n = pw.n
    parts = {2: Tensor.zeros(pw.chart, (UP,)), 0: Tensor.zeros(pw.chart, (UP,)), -2: Tensor.zeros(pw.chart, (UP,))}
    pidx = [pw.ring.index[name] for name in pw.fibre]
    for a in range(2 * n):
        shift = 0 if a < n else -2
        for key, c in v.comps[a].terms.items():
            exps = pw.ring.decode(key)
            d = sum(exps[i] for i in pidx)
            ev = 2 * d + shift
            if ev not in parts:
                raise ValueError(f"component {a} has L_k eigenvalue {ev}: not of lift form")
            parts[ev].comps[a] = parts[ev].comps[a] + Poly(pw.ring, {key: c})
    return Lift(parts[2], parts[0], parts[-2])


def conformal_killing_residual(m: Metric, v: Tensor) -> Tensor:
    """Trace-free part of L_v g; zero exactly for conformal Killing fields."""
    return trace_free_metric(m.lie_derivative(v), m.g, m.ginv)


__all__ = [
    "PWChart", "Metric", "MetricCurvature", "PWMetric", "FrameData", "Lift", "LiftData", "RelationReport",
    "build_pw", "pw_components", "walker_inverse", "metric_curvature", "frames", "verify_frames",
    "difference_tensor", "connection_difference", "conformal_b2", "check_relations", "ricci_flat_iff",
    "is_conformally_flat", "s2f_residual", "homothety_defect", "lifts", "extract", "phi_matrix", "nu_of",
    "homothety_decompose", "conformal_killing_residual", "base_chart",
]
