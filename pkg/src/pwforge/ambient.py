"""Explicit Fefferman-Graham ambient metrics of modified PW metrics.

The ambient chart has coordinates (t, x1..xn, p1..pn, rho) with t a Laurent
variable.  Components follow the normal form

    G_tt = 2 rho,   G_t rho = t,   G_ab = t^2 h(rho)_ab   (a, b on the PW chart),

where h(rho) is a Walker-type block: zero p-p block, p-x block s * identity
for a scalar polynomial s (s = 1 except for the extra modification).  The
inverse is therefore M / s^2 with M a Laurent polynomial matrix, and Ricci
curvature is certified through its s-cleared numerator.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .projective import Connection
from .ring import QQ, Poly, PolyRing
from .tensor import LOW, UP, Chart, Tensor
from .walker import Metric, PWMetric, build_pw, walker_inverse

HALF = QQ("1/2")


@dataclass
class AmbientMetric:
    chart: Chart
    G: Tensor
    inv_numerator: Tensor          # G^{-1} = inv_numerator / denominator
    denominator: Poly
    pw: Metric                     # the conformal representative at rho = 0, t = 1
    n: int
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def t_index(self) -> int:
        return 0

    def rho_index(self) -> int:
        return self.chart.dim - 1


def ambient_chart(pw_chart: Chart, t: str = "t", rho: str = "rho") -> Chart:
    if t in pw_chart.ring.names or rho in pw_chart.ring.names:
        raise ValueError("ambient variable names clash with the PW chart")
    names = (t,) + tuple(pw_chart.ring.names) + (rho,)
    ring = PolyRing(names, laurent=t)
    return Chart("ambient", (t,) + pw_chart.coords + (rho,), ring)


def _is_horizontal(T: Tensor, n: int) -> bool:
    return all(i < n and j < n for (i, j), _ in T.nonzero_items())


def _assemble(pw_metric: Metric, n: int, blocks: list, meta: dict) -> AmbientMetric:
    """Normal-form ambient metric from h(rho) = sum_k rho^k blocks[k] (PW-chart tensors).

    The x-p block of h must be s * identity for one scalar s, which becomes
    the square root of the inverse denominator.
    """
    chart = ambient_chart(pw_metric.chart)
    ring = chart.ring
    N = chart.dim
    t = ring.var(chart.coords[0])
    rho = ring.var(chart.coords[-1])
    h = Tensor.zeros(chart, (LOW, LOW))
    for k, B in enumerate(blocks):
        if B is None:
            continue
        rk = rho ** k
        for (a, b), v in B.nonzero_items():
            h.comps[a + 1, b + 1] = h.comps[a + 1, b + 1] + v.to_ring(ring) * rk
    s = h.comps[1, 1 + n]
    if not s:
        raise ValueError("degenerate pairing block")
    for A in range(n):
        for B in range(n):
            want = s if A == B else ring.zero()
            if h.comps[1 + A, 1 + n + B] != want or h.comps[1 + n + A, 1 + B] != want:
                raise ValueError("pairing block of h is not a scalar multiple of the identity")
            if h.comps[1 + n + A, 1 + n + B]:
                raise ValueError("h has a nonzero vertical block")
    G = h.scale(QQ(1)).map(lambda v: v * t * t)
    G.comps[0, 0] = rho * 2
    G.comps[0, N - 1] = t
    G.comps[N - 1, 0] = t
    # inverse numerator with common denominator s^2
    s2 = s * s
    tinv = t ** -1
    M = Tensor.zeros(chart, (UP, UP))
    M.comps[0, N - 1] = s2 * tinv
    M.comps[N - 1, 0] = s2 * tinv
    M.comps[N - 1, N - 1] = -(s2 * rho * 2) * tinv * tinv
    for A in range(n):
        M.comps[1 + A, 1 + n + A] = s * tinv * tinv
        M.comps[1 + n + A, 1 + A] = s * tinv * tinv
        for B in range(n):
            M.comps[1 + n + A, 1 + n + B] = -h.comps[1 + A, 1 + B] * tinv * tinv
    prod = G.contract_with(1, M, 0)
    target = Tensor.delta(chart).map(lambda v: v * s2)
    if not (prod.permute((1, 0)) - target).is_zero():
        raise ArithmeticError("ambient block inverse failed")
    return AmbientMetric(chart, G, M, s2, pw_metric, n, meta)


def build_ambient(D: Connection, Phi: Tensor | None = None) -> AmbientMetric:
    """t^2 (gbar + 2 rho Pbar) in normal form; Pbar is the PW Schouten tensor."""
    m = build_pw(D, Phi)
    P = m.curvature().schouten
    if not _is_horizontal(P, m.n):
        raise ArithmeticError("PW Schouten tensor is not horizontal")
    return _assemble(m, m.n, [m.g, P.scale(2)], {"kind": "pw"})


def k_form(m: Metric, n: int) -> Tensor:
    """k_a for the homothety k = 2 p_A d/dp_A of the standard PW metric."""
    k = Tensor.zeros(m.chart, (LOW,))
    for A in range(n):
        k.comps[A] = m.chart.ring.var(m.chart.coords[n + A]) * 2
    return k


def laplacian(m: Metric, f: Poly) -> Poly:
    H = m.levi_civita().hessian(Tensor.scalar(m.chart, f))
    acc = m.chart.zero()
    for (a, b), v in H.nonzero_items():
        if m.ginv.comps[a, b]:
            acc = acc + m.ginv.comps[a, b] * v
    return acc


def extra_pw(D: Connection, Phi: Tensor | None, alpha: Poly) -> tuple:
    """(standard PW metric, extra modified metric g + Phi + alpha k k)."""
    m = build_pw(D, Phi)
    st = m.standard()
    k = k_form(st, m.n)
    a = alpha.to_ring(m.chart.ring)
    g = m.g + k.product(k).map(lambda v: v * a)
    return st, Metric(g, walker_inverse(g, m.n), name="gbarbar")


def build_ambient_extra(D: Connection, Phi: Tensor | None, alpha, c=0) -> AmbientMetric:
    """Ambient metric of the extra modified PW metric (base dimension 2 only).

    The rho^2 block is alpha^2 gbb + 2 alpha dalpha.k (symmetrized with weight
    1/2) plus c times (Lap alpha) gbb - 2 alpha dalpha.k, where Lap is the
    Laplacian of the standard PW metric.
    """
    if D.n != 2:
        raise ValueError("the extra modified ambient metric is only available for n = 2")
    st, gbb = extra_pw(D, Phi, alpha if isinstance(alpha, Poly) else D.chart.parse(str(alpha)))
    n = D.n
    ring = gbb.chart.ring
    a = (alpha if isinstance(alpha, Poly) else D.chart.parse(str(alpha))).to_ring(ring)
    c = QQ(c)
    P = gbb.curvature().schouten                             # not horizontal: carries alpha * gbb
    k = k_form(st, n)
    da = Tensor.scalar(gbb.chart, a).partial()
    dak = da.product(k).symmetrize(0, 1).scale(2)            # dalpha (.) k, weight 1/2 each order
    lap = laplacian(st, a)
    coef = a * a + lap * c                                   # multiplies gbb in the rho^2 block
    quad = gbb.g.map(lambda v: v * coef) + dak.map(lambda v: v * a * (1 - c))
    return _assemble(gbb, n, [gbb.g, P.scale(2), quad],
                     {"kind": "extra", "alpha": str(a), "c": str(c)})


# -- certification -------------------------------------------------------------------------

def _christoffel_numerators(am: AmbientMetric) -> np.ndarray:
    """N[c, a, b] with Gamma^c_ab = N / denominator."""
    dG = am.G.partial().comps                               # dG[d, a, b]
    # first[d, a, b] = d_a G_db + d_b G_da - d_d G_ab
    first = dG.transpose(1, 0, 2) + dG.transpose(2, 1, 0) - dG
    N = np.tensordot(am.inv_numerator.comps, first, axes=([1], [0]))   # (c, a, b)
    zero = am.chart.zero()
    half = np.frompyfunc(lambda v: (v * HALF) if isinstance(v, Poly) else zero, 1, 1)
    return half(N)


def ricci_numerator(am: AmbientMetric) -> Tensor:
    """denominator^2 * Ric(G), a Laurent polynomial tensor."""
    N = _christoffel_numerators(am)
    chart = am.chart
    dim = chart.dim
    d = am.denominator
    names = chart.coords
    dd = [d.diff(x) for x in names]
    dN = {}

    def der(c, a, b, e):
        key = (c, a, b, e)
        if key not in dN:
            dN[key] = N[c, a, b].diff(names[e])
        return dN[key]
    trace = [sum((N[c, c, b] for c in range(dim)), chart.zero()) for b in range(dim)]
    out = Tensor.zeros(chart, (LOW, LOW))
    for a in range(dim):
        for b in range(a, dim):
            acc = chart.zero()
            for c in range(dim):
                if N[c, a, b]:
                    acc = acc + d * der(c, a, b, c) - N[c, a, b] * dd[c]
            dtr = sum((der(c, a, c, b) for c in range(dim)), chart.zero())
            acc = acc - d * dtr + trace[a] * dd[b]
            for e in range(dim):
                if N[e, a, b] and trace[e]:
                    acc = acc + trace[e] * N[e, a, b]
                for c in range(dim):
                    if N[c, b, e] and N[e, a, c]:
                        acc = acc - N[c, b, e] * N[e, a, c]
            out.comps[a, b] = acc
            out.comps[b, a] = acc
    return out


def verify_ricci_flat(am: AmbientMetric) -> tuple:
    """(verdict, residual monomial count) for Ric(G) = 0."""
    R = ricci_numerator(am)
    size = R.residual_size()
    return size == 0, size


def check_log_t_harmonic(am: AmbientMetric) -> tuple:
    """(verdict, residual) for the ambient Laplacian of log t.

    d log t = t^-1 dt, so with G^{-1} = M / d and Gamma = N / d the cleared
    value d^2 Lap(log t) = -d M^tt t^-2 - t^-1 sum M^ab N^t_ab.
    """
    N = _christoffel_numerators(am)
    M = am.inv_numerator.comps
    chart = am.chart
    t = chart.ring.var(chart.coords[0])
    tinv = t ** -1
    d = am.denominator
    acc = -(d * M[0, 0] * tinv * tinv) if M[0, 0] else chart.zero()
    for (a, b), v in am.inv_numerator.nonzero_items():
        if N[0, a, b]:
            acc = acc - v * N[0, a, b] * tinv
    return acc.is_zero(), acc


def homogeneity_holds(am: AmbientMetric) -> bool:
    """G pulls back to s^2 G under t -> s t (checked with a fresh symbol)."""
    chart = am.chart
    lam = "lam_"
    ring = chart.ring.union(PolyRing((lam,)))
    L = ring.var(lam)
    t = ring.var(chart.coords[0])
    for idx, v in am.G.nonzero_items():
        lifted = v.to_ring(ring)
        moved = lifted.substitute({chart.coords[0]: L * t})
        for i in idx:
            if i == 0:
                moved = moved * L
        if moved != lifted * L * L:
            return False
    return True


def restriction(am: AmbientMetric) -> Tensor:
    """The PW block at rho = 0, t = 1, on the PW chart."""
    chart = am.chart
    m = am.pw
    dim = m.dim
    out = Tensor.zeros(m.chart, (LOW, LOW))
    for a in range(dim):
        for b in range(dim):
            v = am.G.comps[a + 1, b + 1].substitute({chart.coords[0]: 1, chart.coords[-1]: 0})
            out.comps[a, b] = v.to_ring(m.chart.ring)
    return out


def perturbed(am: AmbientMetric, a: int = 0, b: int = 0, power: int = 2) -> AmbientMetric:
    """Negative control: add rho^power (dx^a.dx^b) inside the t^2 block.

    In ambient dimension N + 2 the rho^(N/2) coefficient is not determined by
    Ricci flatness, so that power goes undetected: rho^2 for N = 4, rho^3 for
    N = 6.  Any other power gives a genuine failure.
    """
    chart = am.chart
    ring = chart.ring
    t = ring.var(chart.coords[0])
    rho = ring.var(chart.coords[-1])
    n = am.n
    bump = rho ** power
    G2 = Tensor(chart, am.G.sig, am.G.comps.copy())
    M2 = Tensor(chart, am.inv_numerator.sig, am.inv_numerator.comps.copy())
    tinv = t ** -1
    # only the x-x block of h changes; the Walker inverse absorbs it in the p-p block
    for (i, j) in sorted({(a, b), (b, a)}):
        G2.comps[1 + i, 1 + j] = G2.comps[1 + i, 1 + j] + bump * t * t
        M2.comps[1 + n + i, 1 + n + j] = M2.comps[1 + n + i, 1 + n + j] - bump * tinv * tinv
    prod = G2.contract_with(1, M2, 0)
    target = Tensor.delta(chart).map(lambda v: v * am.denominator)
    if not (prod.permute((1, 0)) - target).is_zero():
        raise ArithmeticError("perturbed inverse failed")
    return AmbientMetric(chart, G2, M2, am.denominator, am.pw, n, dict(am.meta, perturbed=power))
