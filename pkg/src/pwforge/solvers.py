"""Bounded-degree polynomial ansatz solvers and Lie algebra structure.

Every overdetermined linear system is solved the same way: each unknown
tensor field is expanded in monomials up to a degree cap, the linear
operator is evaluated on every basis element, the coefficients of all
residual monomials form a sparse rational system, and its exact nullspace
is reassembled into tensor fields.  Each returned solution is pushed through
the operator again as a residual certificate, the rank is recomputed modulo
a prime, and the solve is repeated at cap + 1 as a stabilisation witness.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bgg
from .projective import Connection, lie_bracket, weighted_lie_derivative
from .ring import QQ, Poly, SparseRREF, sparse_rank_mod_p, span_coordinates
from .ring.poly import Rational
from .tensor import LOW, UP, Chart, Tensor, trace_free, trace_free_affine, trace_free_metric
from .walker import Metric, PWMetric, build_pw, conformal_killing_residual, lifts

HALF = QQ("1/2")


def max_degree_ceiling() -> int:
    return int(os.environ.get("PWFORGE_MAX_DEGREE", "8"))


def default_cap(*polys_or_tensors) -> int:
    """max(3, input degree + 2), clipped to the global ceiling."""
    deg = 0
    for obj in polys_or_tensors:
        if obj is None:
            continue
        if isinstance(obj, Connection):
            vals = obj.gamma.flat
        elif isinstance(obj, Tensor):
            vals = obj.comps.flat
        else:
            vals = [obj]
        for v in vals:
            if v:
                deg = max(deg, v.total_degree())
    return min(max(3, deg + 2), max_degree_ceiling())


# -- ansatz ----------------------------------------------------------------------

@dataclass
class Unknown:
    """A tensor-valued unknown and the monomials allowed in each component."""
    name: str
    chart: Chart
    sig: tuple
    weight: Rational
    monomials: dict          # component index -> list of monomial keys

    @property
    def size(self) -> int:
        return sum(len(v) for v in self.monomials.values())

    def zero(self) -> Tensor:
        return Tensor.zeros(self.chart, self.sig, self.weight)


def unknown(name: str, chart: Chart, sig, x_cap: int, weight=0, names=None, p_names=(), p_caps=None,
            components=None) -> Unknown:
    """Polynomial unknown with total degree <= x_cap in ``names`` (default: chart coordinates
    other than ``p_names``) and, per component, degree <= p_caps(idx) in ``p_names``."""
    ring = chart.ring
    sig = tuple(sig)
    p_names = tuple(p_names)
    names = tuple(names) if names else tuple(c for c in chart.coords if c not in p_names)
    if x_cap < 0:
        raise ValueError("degree cap must be non-negative")
    xs = ring.monomials_upto(names, x_cap)
    comps = components if components is not None else list(np.ndindex(*((chart.dim,) * len(sig))))
    mon = {}
    for idx in comps:
        pc = p_caps(idx) if callable(p_caps) else (p_caps or 0)
        if p_names and pc >= 0:
            ps = ring.monomials_upto(p_names, pc)
            keys = [a + b - ring.one_key for b in ps for a in xs]
        else:
            keys = list(xs)
        mon[tuple(idx)] = keys
    if not any(mon.values()):
        raise ValueError(f"empty ansatz for {name}")
    return Unknown(name, chart, sig, QQ(weight), mon)


def _flatten(residuals) -> dict:
    """Map (equation, component, monomial) -> coefficient."""
    out = {}
    for e, r in enumerate(residuals):
        if isinstance(r, Poly):
            items = [((), r)]
        elif isinstance(r, Tensor):
            items = r.nonzero_items()
        else:
            raise TypeError("operators must return tensors or polynomials")
        for idx, p in items:
            for key, c in p.terms.items():
                out[(e, idx, key)] = c
    return out


@dataclass
class SolutionBasis:
    names: list
    solutions: list                   # list of dicts name -> Tensor
    rank: int
    ncols: int
    rank_mod_p: int
    certified: bool
    caps: dict = field(default_factory=dict)
    stabilized: bool | None = None
    extra: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.solutions)

    def vectors(self, name: str):
        return [s[name] for s in self.solutions]


def linear_pde_solve(operator: Callable, unknowns: list, caps: dict | None = None, certify: bool = True,
                     extra_rows: list | None = None) -> SolutionBasis:
    """Solve operator(*fields) == 0 over the ansatz spanned by ``unknowns``.

    ``operator`` takes one Tensor per unknown and returns a list of Tensors or
    Polys that must all vanish.  It must be linear.
    """
    columns = []
    for u_i, u in enumerate(unknowns):
        for idx, keys in u.monomials.items():
            for key in keys:
                columns.append((u_i, idx, key))
    ncols = len(columns)
    if ncols == 0:
        raise ValueError("empty ansatz")
    zeros = [u.zero() for u in unknowns]
    base = _flatten(operator(*zeros))
    if base:
        raise ValueError("operator is not linear (nonzero at the zero input)")
    rows: dict = {}
    for col, (u_i, idx, key) in enumerate(columns):
        args = list(zeros)
        t = unknowns[u_i].zero()
        t.comps[idx] = Poly(unknowns[u_i].chart.ring, {key: QQ(1)})
        args[u_i] = t
        for rkey, c in _flatten(operator(*args)).items():
            rows.setdefault(rkey, {})[col] = c
    row_list = [rows[k] for k in sorted(rows, key=_row_sort_key)]
    if extra_rows:
        row_list.extend(extra_rows)
    try:
        rmod = sparse_rank_mod_p(row_list, ncols)
    except ZeroDivisionError:
        rmod = -1
    if rmod == ncols:
        # rank over Q is at least the rank mod p, so the kernel is trivial
        rank, null = ncols, []
    else:
        elim = SparseRREF(ncols)
        # short rows first keeps fill-in down
        for r in sorted(row_list, key=len):
            elim.add_row(r)
            if elim.rank == ncols:
                break
        rank = elim.rank
        null = _canonical(elim.nullspace_basis(), ncols)
    sols = []
    for vec in null:
        fields = [u.zero() for u in unknowns]
        for col, c in vec.items():
            u_i, idx, key = columns[col]
            fields[u_i].comps[idx] = fields[u_i].comps[idx] + Poly(unknowns[u_i].chart.ring, {key: c})
        sols.append(fields)
    certified = True
    if certify:
        for f in sols:
            if _flatten(operator(*f)):
                certified = False
                break
    names = [u.name for u in unknowns]
    return SolutionBasis(names, [dict(zip(names, f)) for f in sols], rank, ncols, rmod, certified,
                         dict(caps or {}))


def _row_sort_key(k):
    e, idx, key = k
    return (e, idx, key)


def _canonical(null: list, ncols: int) -> list:
    """Reduced row echelon form of the solution vectors (pivot = smallest column)."""
    elim = SparseRREF(ncols)
    for v in null:
        elim.add_row(v)
    return [elim.rows[p] for p in sorted(elim.rows)]


def with_stabilization(solve: Callable[[int], SolutionBasis], cap: int) -> SolutionBasis:
    """Run ``solve(cap)`` and ``solve(cap + 1)``; record whether the dimension is unchanged."""
    res = solve(cap)
    if cap + 1 <= max_degree_ceiling():
        res_plus = solve(cap + 1)
        res.stabilized = res_plus.dim == res.dim
        res.extra["dim_at_cap_plus_1"] = res_plus.dim
    else:
        res.stabilized = None
    return res


# -- base-level solvers -------------------------------------------------------------

def _zero_phi(D: Connection, Phi):
    return Phi if Phi is not None else Tensor.zeros(D.chart, (LOW, LOW), 2)


def solve_scalar_bgg(D: Connection, cap: int) -> SolutionBasis:
    """Kernel of tau -> (D_A D_B + P_AB) tau."""
    u = unknown("tau", D.chart, (), cap, weight=1)
    return linear_pde_solve(lambda tau: [bgg.b1_scalar(D, tau)], [u], {"x_degree": cap})


def killing_forms(D: Connection, cap: int | None = None, stabilize: bool = True) -> SolutionBasis:
    """Projective Killing one-forms: D_(A alpha_B) = 0 with alpha of weight 2."""
    cap = default_cap(D) if cap is None else cap

    def run(c):
        u = unknown("alpha", D.chart, (LOW,), c, weight=2)
        return linear_pde_solve(lambda a: [bgg.b1_oneform(D, a)], [u], {"x_degree": c})
    return with_stabilization(run, cap) if stabilize else run(cap)


def affine_operator(D: Connection, v: Tensor) -> Tensor:
    """D_A D_B v^C + v^S R_SA^C_B, slots (A, B, C)."""
    R = D.riemann()                                   # (S, A, C, B)
    return D.hessian(v) + R.contract_with(0, v, 0).permute((0, 2, 1))


def lie_derivative_connection(D: Connection, v: Tensor) -> Tensor:
    """(L_v Gamma)_A^C_B from coordinate derivatives, slots (A, B, C)."""
    n = D.n
    ch = D.chart
    dv = v.partial()                                  # (A, C)
    ddv = dv.partial()                                # (A, B, C) = d_A d_B v^C
    out = Tensor.zeros(ch, (LOW, LOW, UP))
    G = D.gamma
    for A in range(n):
        for B in range(n):
            for C in range(n):
                acc = ddv.comps[A, B, C]
                for S in range(n):
                    if v.comps[S]:
                        acc = acc + v.comps[S] * G[A, C, B].diff(ch.coords[S])
                    if G[A, S, B] and dv.comps[S, C]:
                        acc = acc - G[A, S, B] * dv.comps[S, C]
                    if G[S, C, B] and dv.comps[A, S]:
                        acc = acc + G[S, C, B] * dv.comps[A, S]
                    if G[A, C, S] and dv.comps[B, S]:
                        acc = acc + G[A, C, S] * dv.comps[B, S]
                out.comps[A, B, C] = acc
    return out


def affine_symmetries(D: Connection, cap: int | None = None, stabilize: bool = True) -> SolutionBasis:
    cap = default_cap(D) if cap is None else cap

    def run(c):
        u = unknown("v", D.chart, (UP,), c)
        return linear_pde_solve(lambda v: [affine_operator(D, v)], [u], {"x_degree": c})
    return with_stabilization(run, cap) if stabilize else run(cap)


def projective_symmetries(D: Connection, cap: int | None = None, stabilize: bool = True) -> SolutionBasis:
    """Projective symmetries plus the constant-divergence criterion for each basis element."""
    cap = default_cap(D) if cap is None else cap

    def run(c):
        u = unknown("v", D.chart, (UP,), c)
        res = linear_pde_solve(lambda v: [bgg.b1_adjoint_modified(D, v)], [u], {"x_degree": c})
        # subspace with D_A (D_R v^R) = 0
        sub = linear_pde_solve(
            lambda v: [bgg.b1_adjoint_modified(D, v), Tensor.scalar(D.chart, D.divergence(v)).partial()],
            [u], {"x_degree": c})
        res.extra["constant_divergence"] = [D.divergence(s["v"]).is_constant() for s in res.solutions]
        res.extra["affine_subspace_dim"] = sub.dim
        return res
    return with_stabilization(run, cap) if stabilize else run(cap)


BGG_SEQUENCES = ("scalar", "oneform", "vector", "bivector", "adjoint")


def first_bgg_kernel(D: Connection, sequence: str, cap: int | None = None,
                     stabilize: bool = True) -> SolutionBasis:
    """Kernel of the first operator of one of the five sequences.

    In dimension two the trace-free derivative of a bivector vanishes
    identically, so the bivector kernel there is cut out by the two
    prolongation equations instead.
    """
    cap = default_cap(D) if cap is None else cap
    n = D.n
    ch = D.chart

    def run(c):
        if sequence == "scalar":
            u = unknown("tau", ch, (), c, weight=1)
            op = lambda tau: [bgg.b1_scalar(D, tau)]
        elif sequence == "oneform":
            u = unknown("alpha", ch, (LOW,), c, weight=2)
            op = lambda a: [bgg.b1_oneform(D, a)]
        elif sequence == "vector":
            u = unknown("xi", ch, (UP,), c, weight=-1)
            op = lambda xi: [bgg.b1_vector(D, xi)]
        elif sequence == "bivector":
            u = unknown("w", ch, (UP, UP), c, weight=-2,
                        components=[(A, B) for A in range(n) for B in range(A + 1, n)])

            def op(wu):
                w = skew_completion(wu)
                if n == 2:
                    return list(bgg.prolongation_check(D, w))
                return [bgg.b1_bivector(D, w)]
        elif sequence == "adjoint":
            u = unknown("v", ch, (UP,), c)
            op = lambda v: [bgg.b1_adjoint_modified(D, v)]
        else:
            raise ValueError(f"unknown BGG sequence {sequence!r}")
        res = linear_pde_solve(op, [u], {"x_degree": c})
        if sequence == "bivector":
            for s in res.solutions:
                s["w"] = skew_completion(s["w"])
        return res
    return with_stabilization(run, cap) if stabilize else run(cap)


def flat_kernel_dimension(sequence: str, n: int) -> int:
    """Kernel dimensions of the first operators on flat projective space."""
    return {"scalar": n + 1, "oneform": n * (n + 1) // 2, "vector": n + 1,
            "bivector": n * (n + 1) // 2, "adjoint": n * (n + 2)}[sequence]


# -- Einstein scales ------------------------------------------------------------------

def einstein_reduced_operator(D: Connection, Phi: Tensor):
    pk = D.curvature()
    W = pk.weyl

    def op(tau, xi):
        taxi0 = W.contract_with(0, xi, 0)                          # xi^R W_RB^C_D -> (B, C, D)
        taxi1 = trace_free_affine(D.covariant_derivative(xi))
        taxi2 = bgg.b1_scalar(D, tau) - bgg.coupling_F_xi(D, xi, Phi)
        return [taxi0, taxi1, taxi2]
    return op


def einstein_scales_reduced(D: Connection, Phi: Tensor | None = None, cap: int | None = None,
                            stabilize: bool = True) -> SolutionBasis:
    """Joint solve for (tau, xi); sigma = xi^R p_R + tau."""
    Phi = _zero_phi(D, Phi)
    cap = default_cap(D, Phi) if cap is None else cap
    op = einstein_reduced_operator(D, Phi)

    def run(c):
        ut = unknown("tau", D.chart, (), c, weight=1)
        ux = unknown("xi", D.chart, (UP,), c, weight=-1)
        return linear_pde_solve(op, [ut, ux], {"x_degree": c})
    return with_stabilization(run, cap) if stabilize else run(cap)


def assemble_sigma(m: PWMetric, tau: Tensor, xi: Tensor) -> Poly:
    pw = m.pw
    acc = tau.value().to_ring(pw.ring)
    for A in range(pw.n):
        if xi.comps[A]:
            acc = acc + xi.comps[A].to_ring(pw.ring) * pw.pvar(A)
    return acc


def einstein_direct_operator(m: PWMetric):
    """Trace-free part (w.r.t. the modified metric) of (D D + P) sigma."""
    LC = m.levi_civita()
    P = m.curvature().schouten

    def op(sigma):
        H = LC.hessian(sigma) + P.scale(sigma.value())
        return [trace_free_metric(H, m.g, m.ginv)]
    return op


def einstein_scales_direct(m: PWMetric, cap: int | None = None, p_cap: int = 1,
                           stabilize: bool = True) -> SolutionBasis:
    """Almost Einstein scales of the PW metric with sigma of p-degree <= p_cap."""
    cap = default_cap(m.base_connection, m.Phi) if cap is None else cap
    op = einstein_direct_operator(m)

    def run(c):
        u = unknown("sigma", m.chart, (), c, p_names=m.pw.fibre, p_caps=p_cap)
        return linear_pde_solve(op, [u], {"x_degree": c, "p_degree": p_cap})
    return with_stabilization(run, cap) if stabilize else run(cap)


def einstein_scalar(D: Connection, Phi: Tensor, xi: Tensor) -> Poly:
    """2n(2n-1) Phi_RS xi^R xi^S."""
    n = D.n
    acc = D.chart.zero()
    for R in range(n):
        for S in range(n):
            if Phi.comps[R, S] and xi.comps[R] and xi.comps[S]:
                acc = acc + Phi.comps[R, S] * xi.comps[R] * xi.comps[S]
    return acc * (2 * n * (2 * n - 1))


def rescaled_scalar_numerator(m: Metric, sigma: Poly) -> Poly:
    """sigma^2 Scal + 2(N-1) sigma Lap(sigma) - N(N-1) |d sigma|^2.

    This is the scalar curvature of sigma^-2 g with all sigma powers cleared;
    it equals the constant scalar curvature on the locus sigma != 0 when
    sigma is an almost Einstein scale.
    """
    N = m.dim
    s = Tensor.scalar(m.chart, sigma)
    LC = m.levi_civita()
    H = LC.hessian(s)
    lap = m.ginv.contract_with(0, H, 0).contract(0, 1).value()
    ds = s.partial()
    grad2 = m.ginv.contract_with(0, ds, 0).contract_with(0, ds, 0).value()
    scal = m.curvature().scalar
    return sigma * sigma * scal + sigma * lap * (2 * (N - 1)) - grad2 * (N * (N - 1))


def einstein_scalar_check(m: PWMetric, tau: Tensor, xi: Tensor) -> tuple:
    """(displayed scalar, scalar from the metric, agree)."""
    sigma = assemble_sigma(m, tau, xi)
    direct = rescaled_scalar_numerator(m, sigma)
    claimed = einstein_scalar(m.base_connection, m.Phi, xi).to_ring(m.pw.ring)
    return claimed, direct, claimed == direct


# -- conformal Killing fields ---------------------------------------------------------------

def skew_completion(wu: Tensor) -> Tensor:
    """w from its strictly upper-triangular part."""
    return (wu - wu.permute((1, 0))).with_weight(-2)


def killing_reduced_operator(D: Connection, Phi: Tensor):
    n = D.n
    W = D.curvature().weyl

    def op(wu, v, alpha, psi):
        # the ansatz holds w^AB for A < B only, so w^(AB) = 0 is built in
        ww = skew_completion(wu)
        t = W.contract_with(0, ww, 0)                              # (A, D, B, C)
        eqs = [t.symmetrize(0, 2).symmetrize(1, 3)]
        eqs.append(trace_free(D.covariant_derivative(ww)))        # (D_A w^BC)_0
        if n == 2:
            # in dimension two the trace-free part above vanishes identically and the
            # bivector equation is the second-order prolonged one
            eqs.append(bgg.prolongation_check(D, ww)[1])
        F = bgg.coupling_F_w(D, ww, Phi)                           # (C, A, B)
        eqs.append(bgg.b1_adjoint_modified(D, v) + trace_free(F.permute((1, 2, 0))))
        lv = bgg.lie_derivative_phi(D, v, Phi)
        eqs.append(bgg.b1_oneform(D, alpha.with_weight(2)) + lv.scale(HALF) - Phi.scale(psi.value() * HALF))
        trF = F.contract(0, 2)                                     # F^R_AR -> (A)
        eqs.append(psi.partial() - trF.scale(QQ(2) / (n + 1)))
        return eqs
    return op


def conformal_killing_reduced(D: Connection, Phi: Tensor | None = None, cap: int | None = None,
                              stabilize: bool = True, assemble: bool = True) -> SolutionBasis:
    """Joint solve for (w, v, alpha, psi0); each solution is lifted and checked on the metric."""
    Phi = _zero_phi(D, Phi)
    cap = default_cap(D, Phi) if cap is None else cap
    op = killing_reduced_operator(D, Phi)

    def run(c):
        uw = unknown("w", D.chart, (UP, UP), c, weight=-2,
                     components=[(A, B) for A in range(n) for B in range(A + 1, n)])
        uv = unknown("v", D.chart, (UP,), c)
        ua = unknown("alpha", D.chart, (LOW,), c + 1, weight=2)
        up = unknown("psi0", D.chart, (), c)
        return linear_pde_solve(op, [uw, uv, ua, up], {"x_degree": c, "alpha_x_degree": c + 1})
    n = D.n
    res = with_stabilization(run, cap) if stabilize else run(cap)
    for sol in res.solutions:
        sol["w"] = skew_completion(sol["w"])
    if assemble:
        m = build_pw(D, Phi)
        fields = []
        ok = True
        for s in res.solutions:
            L = lifts(m, w=s["w"].with_weight(-2), v=s["v"], alpha=s["alpha"], psi0=s["psi0"].value())
            vec = L.total()
            fields.append(vec)
            if not conformal_killing_residual(m, vec).is_zero():
                ok = False
        res.extra["fields"] = fields
        res.extra["lifts_are_killing"] = ok
    return res


def killing_direct_operator(m: Metric):
    def op(v):
        return [conformal_killing_residual(m, v)]
    return op


def conformal_killing_direct(m: PWMetric, cap: int | None = None, p_cap: int = 2,
                             stabilize: bool = True) -> SolutionBasis:
    """Conformal Killing fields of the PW metric with components of p-degree <= p_cap."""
    cap = default_cap(m.base_connection, m.Phi) if cap is None else cap
    op = killing_direct_operator(m)

    def run(c):
        u = unknown("v", m.chart, (UP,), c, p_names=m.pw.fibre, p_caps=p_cap)
        return linear_pde_solve(op, [u], {"x_degree": c, "p_degree": p_cap})
    return with_stabilization(run, cap) if stabilize else run(cap)


def _rank_of(vecs: list) -> int:
    keys: dict = {}
    for d in vecs:
        for k in d:
            keys.setdefault(k, len(keys))
    elim = SparseRREF(len(keys))
    for d in vecs:
        elim.add_row({keys[k]: c for k, c in d.items()})
    return elim.rank


def homothety_grading(res: SolutionBasis) -> dict:
    """Block dimensions of a reduced conformal Killing basis by L_k degree.

    The lifts of w, v and (alpha, psi0) carry L_k eigenvalue +2, 0 and -2.
    They are mixed inside one solution, so the counts come from the
    filtration w, (w, v), everything.
    """
    sols = res.solutions
    ws = [{("w",) + k: c for k, c in _vec_of(s["w"]).items()} for s in sols]
    wv = [{**w, **{("v",) + k: c for k, c in _vec_of(s["v"]).items()}} for w, s in zip(ws, sols)]
    top, both = _rank_of(ws), _rank_of(wv)
    return {2: top, 0: both - top, -2: len(sols) - both}


# -- span comparison ---------------------------------------------------------------------------

def _vec_of(T) -> dict:
    if isinstance(T, Poly):
        return {((), k): c for k, c in T.terms.items()}
    out = {}
    for idx, p in T.nonzero_items():
        for k, c in p.terms.items():
            out[(idx, k)] = c
    return out


def in_span(basis: list, target) -> list | None:
    """Coefficients expressing ``target`` in ``basis`` (Tensors or Polys), or None."""
    return span_coordinates([_vec_of(b) for b in basis], _vec_of(target))


def same_span(a: list, b: list) -> bool:
    return len(a) == len(b) and all(in_span(b, x) is not None for x in a) and \
        all(in_span(a, y) is not None for y in b)


# -- Lie algebra structure -------------------------------------------------------------------

@dataclass
class LieAlgebraTable:
    labels: list
    constants: list                 # c[i][j] = list of coefficients of [e_i, e_j]
    antisymmetric: bool
    jacobi: bool
    extra: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def ad(self, x: list):
        """Matrix of ad(x) (columns: images of basis vectors)."""
        n = self.dim
        M = [[QQ(0)] * n for _ in range(n)]
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j in range(n):
                for k, c in enumerate(self.constants[i][j]):
                    if c:
                        M[k][j] += xi * c
        return M

    def bracket(self, x: list, y: list) -> list:
        n = self.dim
        out = [QQ(0)] * n
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj:
                    continue
                for k, c in enumerate(self.constants[i][j]):
                    if c:
                        out[k] += xi * yj * c
        return out


class NotClosedError(ValueError):
    pass


def lie_structure(basis: list, labels=None) -> LieAlgebraTable:
    """Structure constants of the span of vector fields under the Lie bracket."""
    n = len(basis)
    labels = labels or [f"e{i + 1}" for i in range(n)]
    vecs = [_vec_of(b) for b in basis]
    if any(span_coordinates(vecs[:i], vecs[i]) is not None for i in range(1, n)):
        raise ValueError("basis elements are linearly dependent")
    consts = [[None] * n for _ in range(n)]
    for i in range(n):
        consts[i][i] = [QQ(0)] * n
        for j in range(i + 1, n):
            br = lie_bracket(basis[i], basis[j])
            c = span_coordinates(vecs, _vec_of(br)) if not br.is_zero() else [QQ(0)] * n
            if c is None:
                raise NotClosedError(f"[{labels[i]}, {labels[j]}] is outside the span")
            consts[i][j] = c
            consts[j][i] = [-x for x in c]
    table = LieAlgebraTable(labels, consts, True, True)
    table.antisymmetric = all(consts[i][j][k] == -consts[j][i][k] for i in range(n) for j in range(n)
                              for k in range(n))
    table.jacobi = _jacobi(table)
    return table


def _unit(n, i):
    v = [QQ(0)] * n
    v[i] = QQ(1)
    return v


def _jacobi(t: LieAlgebraTable) -> bool:
    n = t.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a = t.bracket(_unit(n, i), t.bracket(_unit(n, j), _unit(n, k)))
                b = t.bracket(_unit(n, j), t.bracket(_unit(n, k), _unit(n, i)))
                c = t.bracket(_unit(n, k), t.bracket(_unit(n, i), _unit(n, j)))
                if any(x + y + z for x, y, z in zip(a, b, c)):
                    return False
    return True


def _matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), QQ(0)) for j in range(len(B[0]))]
            for i in range(len(A))]


def _trace(A):
    return sum((A[i][i] for i in range(len(A))), QQ(0))


def killing_form(t: LieAlgebraTable, sub: list | None = None):
    """Gram matrix of tr(ad x ad y) on the given vectors (default: the basis)."""
    n = t.dim
    vs = sub if sub is not None else [_unit(n, i) for i in range(n)]
    ads = [t.ad(v) for v in vs]
    return [[_trace(_matmul(a, b)) for b in ads] for a in ads]


def _nullspace_rows(M, ncols):
    """Nullspace of a dense rational matrix (rows M)."""
    elim = SparseRREF(ncols)
    for r in M:
        elim.add_row({j: v for j, v in enumerate(r) if v})
    out = []
    for v in elim.nullspace_basis():
        out.append([v.get(j, QQ(0)) for j in range(ncols)])
    return out


def _span_basis(vectors, n):
    elim = SparseRREF(n)
    for v in vectors:
        elim.add_row({j: x for j, x in enumerate(v) if x})
    return [[elim.rows[p].get(j, QQ(0)) for j in range(n)] for p in sorted(elim.rows)]


def derived_algebra(t: LieAlgebraTable) -> list:
    n = t.dim
    return _span_basis([t.constants[i][j] for i in range(n) for j in range(i + 1, n)], n)


def solvable_radical(t: LieAlgebraTable) -> list:
    """Orthogonal complement of [g, g] under the Killing form."""
    n = t.dim
    der = derived_algebra(t)
    K = killing_form(t)
    rows = [[sum((d[i] * K[i][j] for i in range(n)), QQ(0)) for j in range(n)] for d in der]
    if not rows:
        return [_unit(n, i) for i in range(n)]
    return _span_basis(_nullspace_rows(rows, n), n)


def _combine(coeffs, vecs, n):
    out = [QQ(0)] * n
    for c, v in zip(coeffs, vecs):
        if c:
            for j in range(n):
                out[j] += c * v[j]
    return out


def _is_ideal(t: LieAlgebraTable, sub: list) -> bool:
    n = t.dim
    vecs = [{j: x for j, x in enumerate(v) if x} for v in sub]
    for i in range(n):
        for v in sub:
            br = t.bracket(_unit(n, i), v)
            if any(br) and span_coordinates(vecs, {j: x for j, x in enumerate(br) if x}) is None:
                return False
    return True


def _is_nilpotent_sub(t: LieAlgebraTable, sub: list) -> bool:
    """Every ad_g(x) for x in sub nilpotent, checked via (ad x)^n = 0 on a basis and on sums."""
    n = t.dim
    # the lower central series of the ideal terminates
    cur = sub
    for _ in range(n + 1):
        if not cur:
            return True
        nxt = [t.bracket(a, b) for a in sub for b in cur]
        cur = _span_basis([v for v in nxt if any(v)], n)
    return not cur


def nilradical(t: LieAlgebraTable) -> list:
    """Largest nilpotent ideal, as a basis of coefficient vectors.

    Candidate: elements x of the radical with tr(ad x ad y) = 0 for all y in
    the radical; it is then checked to be a nilpotent ideal.
    """
    n = t.dim
    R = solvable_radical(t)
    if not R:
        return []
    K = killing_form(t, R)
    coeffs = _nullspace_rows(K, len(R))
    cand = _span_basis([_combine(c, R, n) for c in coeffs], n)
    if not _is_ideal(t, cand) or not _is_nilpotent_sub(t, cand):
        raise ArithmeticError("nilradical candidate is not a nilpotent ideal")
    return cand


def char_poly(M) -> list:
    """Coefficients c_0..c_n of det(lambda I - M) by Faddeev-LeVerrier (c_n = 1)."""
    n = len(M)
    coeffs = [QQ(0)] * (n + 1)
    coeffs[n] = QQ(1)
    Mk = [[QQ(0)] * n for _ in range(n)]
    I = [[QQ(1) if i == j else QQ(0) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        Mk = _matmul(M, [[Mk[i][j] + (coeffs[n - k + 1] * I[i][j]) for j in range(n)] for i in range(n)])
        coeffs[n - k] = -_trace(Mk) / k
    return coeffs


def _rational_roots(coeffs) -> list:
    from math import gcd, lcm
    from gmpy2 import mpz
    den = 1
    for c in coeffs:
        den = lcm(den, int(c.denominator))
    ints = [int(c * den) for c in coeffs]
    roots = []
    while ints and ints[0] == 0:
        roots.append(QQ(0))
        ints = ints[1:]
    if len(ints) <= 1:
        return sorted(set(roots))

    def divisors(m):
        m = abs(m)
        ds = set()
        i = 1
        while i * i <= m:
            if m % i == 0:
                ds.add(i)
                ds.add(m // i)
            i += 1
        return ds
    cands = set()
    for pnum in divisors(ints[0]):
        for q in divisors(ints[-1]):
            for s in (1, -1):
                cands.add(QQ(s * pnum) / q)
    for r in cands:
        val = QQ(0)
        for c in reversed(ints):
            val = val * r + c
        if val == 0:
            roots.append(r)
    return sorted(set(roots))


def ad_eigenspaces(t: LieAlgebraTable, x: list, sub: list | None = None) -> dict:
    """Rational eigenvalues of ad(x) acting on an ad(x)-invariant subspace, with eigenspace dimensions.

    Returns {"eigenvalues": {lambda: dim}, "irrational_degree": d} where d
    counts eigenvalues (with multiplicity) that are not rational.
    """
    n = t.dim
    sub = sub if sub is not None else [_unit(n, i) for i in range(n)]
    m = len(sub)
    vecs = [{j: v for j, v in enumerate(b) if v} for b in sub]
    A = [[QQ(0)] * m for _ in range(m)]
    for j, b in enumerate(sub):
        img = t.bracket(x, b)
        c = span_coordinates(vecs, {k: v for k, v in enumerate(img) if v}) if any(img) else [QQ(0)] * m
        if c is None:
            raise ValueError("subspace is not ad-invariant")
        for i in range(m):
            A[i][j] = c[i]
    return eigen_info(A)


def eigen_info(A) -> dict:
    m = len(A)
    cp = char_poly(A)
    roots = _rational_roots(cp)
    dims = {}
    count = 0
    for r in roots:
        shifted = [[A[i][j] - (r if i == j else 0) for j in range(m)] for i in range(m)]
        d = len(_nullspace_rows(shifted, m))
        dims[r] = d
        # algebraic multiplicity by repeated division
        mult = _multiplicity(cp, r)
        count += mult
    return {"eigenvalues": dims, "irrational_degree": m - count, "char_poly": cp}


def _multiplicity(coeffs, r) -> int:
    c = list(coeffs)
    mult = 0
    while len(c) > 1:
        # synthetic division by (lambda - r)
        out = [QQ(0)] * (len(c) - 1)
        acc = QQ(0)
        for k in range(len(c) - 1, 0, -1):
            acc = acc * r + c[k]
            out[k - 1] = acc
        rem = acc * r + c[0]
        if rem != 0:
            break
        c = out
        mult += 1
    return mult


def external_ad(t: LieAlgebraTable, basis: list, x: Tensor) -> dict:
    """Eigen-analysis of u -> [x, u] for a vector field x preserving the span (need not lie in it)."""
    n = t.dim
    vecs = [_vec_of(b) for b in basis]
    A = [[QQ(0)] * n for _ in range(n)]
    for j, b in enumerate(basis):
        br = lie_bracket(x, b)
        c = span_coordinates(vecs, _vec_of(br)) if not br.is_zero() else [QQ(0)] * n
        if c is None:
            raise NotClosedError("the vector field does not preserve the span")
        for i in range(n):
            A[i][j] = c[i]
    return eigen_info(A)


__all__ = [
    "Unknown", "unknown", "SolutionBasis", "linear_pde_solve", "with_stabilization", "default_cap",
    "solve_scalar_bgg", "killing_forms", "affine_operator", "lie_derivative_connection", "affine_symmetries",
    "projective_symmetries", "einstein_scales_reduced", "einstein_scales_direct", "assemble_sigma",
    "einstein_scalar", "rescaled_scalar_numerator", "einstein_scalar_check", "conformal_killing_reduced",
    "homothety_grading",
    "conformal_killing_direct", "in_span", "same_span", "LieAlgebraTable", "NotClosedError", "lie_structure",
    "killing_form", "derived_algebra", "solvable_radical", "nilradical", "char_poly", "ad_eigenspaces",
    "eigen_info", "external_ad", "max_degree_ceiling",
]
