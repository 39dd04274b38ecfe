"""Charts and dense tensor fields with polynomial components.

Components live in a numpy object array of shape ``(dim,) * rank`` whose
entries are always :class:`Poly` (never bare ints).  Index calculus is
expressed through numpy transposes, traces and tensordots on those arrays.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial

import numpy as np

from .ring import QQ, Poly, PolyRing, RationalMatrix, parse_poly

UP, LOW = "u", "l"


class Chart:
    """Named coordinate chart; ``ring`` may hold extra variables beyond the coordinates."""

    def __init__(self, name: str, coords, ring: PolyRing | None = None):
        coords = tuple(coords)
        if len(set(coords)) != len(coords):
            raise ValueError(f"duplicate coordinates in chart {name}")
        if ring is None:
            ring = PolyRing(coords)
        for c in coords:
            if c not in ring.index:
                raise ValueError(f"coordinate {c} missing from ring {ring}")
        self.name = name
        self.coords = coords
        self.ring = ring
        self.dim = len(coords)

    def __repr__(self):
        return f"Chart({self.name!r}, {list(self.coords)!r})"

    def __eq__(self, other):
        return isinstance(other, Chart) and (self.name, self.coords, self.ring) == (other.name, other.coords, other.ring)

    def __hash__(self):
        return hash((self.name, self.coords))

    def with_ring(self, ring: PolyRing) -> "Chart":
        return Chart(self.name, self.coords, ring)

    def var(self, i_or_name) -> Poly:
        name = self.coords[i_or_name] if isinstance(i_or_name, int) else i_or_name
        return self.ring.var(name)

    def zero(self) -> Poly:
        return self.ring.zero()

    def const(self, c) -> Poly:
        return self.ring.const(c)

    def parse(self, text) -> Poly:
        return parse_poly(text, self.ring)


def _obj_array(shape, fill):
    a = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        a[idx] = fill
    return a


def _fix(a: np.ndarray, ring: PolyRing) -> np.ndarray:
    """Replace stray ints (from empty numpy reductions) by ring zeros, convert rings."""
    out = np.empty(a.shape, dtype=object)
    zero = ring.zero()
    for idx in np.ndindex(*a.shape):
        v = a[idx]
        if isinstance(v, Poly):
            out[idx] = v if v.ring is ring else v.to_ring(ring)
        else:
            out[idx] = ring.const(v) if v else zero
    return out


class Tensor:
    """Tensor field on a chart.

    ``sig`` lists slot variances ('u' upper, 'l' lower).  ``weight`` is the
    density weight; it never changes component values, only correction terms
    in Lie derivatives and under change of connection.
    """

    __slots__ = ("chart", "sig", "comps", "weight")

    def __init__(self, chart: Chart, sig, comps, weight=0, _checked=False):
        self.chart = chart
        self.sig = tuple(sig)
        for s in self.sig:
            if s not in (UP, LOW):
                raise ValueError(f"bad slot variance {s!r}")
        if not _checked:
            comps = np.asarray(comps, dtype=object) if not isinstance(comps, np.ndarray) else comps
            if comps.shape != (chart.dim,) * len(self.sig):
                raise ValueError(f"component shape {comps.shape} does not match rank {len(self.sig)}")
            comps = _fix(comps, chart.ring)
        self.comps = comps
        self.weight = QQ(weight)

    # -- construction ------------------------------------------------------
    @classmethod
    def zeros(cls, chart: Chart, sig, weight=0):
        return cls(chart, sig, _obj_array((chart.dim,) * len(sig), chart.zero()), weight, _checked=True)

    @classmethod
    def scalar(cls, chart: Chart, value, weight=0):
        a = np.empty((), dtype=object)
        a[()] = chart.ring.coerce(value) if isinstance(value, Poly) else parse_poly(value, chart.ring)
        return cls(chart, (), a, weight, _checked=True)

    @classmethod
    def from_dict(cls, chart: Chart, sig, entries: dict, weight=0, one_based: bool = False):
        t = cls.zeros(chart, sig, weight)
        for idx, val in entries.items():
            if isinstance(idx, int):
                idx = (idx,)
            if one_based:
                idx = tuple(i - 1 for i in idx)
            t.comps[tuple(idx)] = chart.ring.coerce(val) if isinstance(val, Poly) else parse_poly(val, chart.ring)
        return t

    @classmethod
    def delta(cls, chart: Chart):
        t = cls.zeros(chart, (UP, LOW))
        for i in range(chart.dim):
            t.comps[i, i] = chart.ring.one()
        return t

    def _new(self, comps, sig=None, weight=None, checked=True):
        if not isinstance(comps, np.ndarray):
            comps = self._scalar_arr(comps)
        return Tensor(self.chart, self.sig if sig is None else sig, comps,
                      self.weight if weight is None else weight, _checked=checked)

    # -- basic properties --------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.sig)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __getitem__(self, idx):
        return self.comps[idx]

    def value(self) -> Poly:
        if self.sig:
            raise ValueError("not a scalar")
        return self.comps[()]

    def is_zero(self) -> bool:
        return all(not v for v in self.comps.flat)

    def nonzero_items(self):
        """(index tuple, Poly) for nonzero components in index order."""
        return [(idx, self.comps[idx]) for idx in np.ndindex(*self.comps.shape) if self.comps[idx]]

    def residual_size(self) -> int:
        """Total number of nonzero monomials over all components."""
        return sum(len(v) for v in self.comps.flat)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.sig == other.sig and (self - other).is_zero()

    def __repr__(self):
        nz = self.nonzero_items()
        body = ", ".join(f"{idx}: {v}" for idx, v in nz[:6])
        more = " ..." if len(nz) > 6 else ""
        return f"Tensor({''.join(self.sig) or 'scalar'}, {{{body}{more}}})"

    # -- algebra -----------------------------------------------------------
    def _check_same(self, other: "Tensor"):
        if other.sig != self.sig:
            raise ValueError(f"signature mismatch {self.sig} vs {other.sig}")
        if other.chart.coords != self.chart.coords:
            raise ValueError("chart mismatch")

    def __add__(self, other):
        self._check_same(other)
        return self._new(self.comps + other.comps)

    def __sub__(self, other):
        self._check_same(other)
        return self._new(self.comps - other.comps)

    def __neg__(self):
        return self._new(-self.comps)

    def scale(self, c) -> "Tensor":
        """Multiply by a rational constant or a scalar polynomial."""
        if isinstance(c, Tensor):
            c = c.value()
        if not isinstance(c, Poly):
            c = QQ(c)
            if c == 1:
                return self
        f = np.frompyfunc(lambda v: v * c, 1, 1)
        return self._new(_fix(f(self.comps), self.chart.ring) if self.rank else self._scalar_arr(self.comps[()] * c))

    def _scalar_arr(self, v):
        a = np.empty((), dtype=object)
        a[()] = v if isinstance(v, Poly) else self.chart.ring.const(v)
        return a

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def product(self, other: "Tensor") -> "Tensor":
        """Outer product; slots of ``self`` first."""
        if not self.sig:
            return other.scale(self.value())._with_weight(self.weight + other.weight)
        if not other.sig:
            return self.scale(other.value())._with_weight(self.weight + other.weight)
        comps = np.multiply.outer(self.comps, other.comps)
        return Tensor(self.chart, self.sig + other.sig, comps, self.weight + other.weight, _checked=True)

    def _with_weight(self, w):
        return Tensor(self.chart, self.sig, self.comps, w, _checked=True)

    def with_weight(self, w) -> "Tensor":
        return self._with_weight(w)

    def contract(self, i: int, j: int) -> "Tensor":
        """Trace over one upper and one lower slot."""
        if {self.sig[i], self.sig[j]} != {UP, LOW}:
            raise ValueError("contraction needs one upper and one lower slot")
        comps = np.trace(self.comps, axis1=i, axis2=j)
        sig = tuple(s for k, s in enumerate(self.sig) if k not in (i, j))
        if not sig:
            a = np.empty((), dtype=object)
            a[()] = comps if isinstance(comps, Poly) else self.chart.ring.const(comps)
            comps = a
        return Tensor(self.chart, sig, _fix(np.asarray(comps, dtype=object), self.chart.ring), self.weight,
                      _checked=True)

    def contract_with(self, i: int, other: "Tensor", j: int) -> "Tensor":
        """Contract slot i of self with slot j of other; remaining slots: self's then other's."""
        if {self.sig[i], other.sig[j]} != {UP, LOW}:
            raise ValueError("contraction needs one upper and one lower slot")
        comps = np.tensordot(self.comps, other.comps, axes=([i], [j]))
        sig = tuple(s for k, s in enumerate(self.sig) if k != i) + tuple(s for k, s in enumerate(other.sig) if k != j)
        comps = np.asarray(comps, dtype=object)
        if not sig:
            a = np.empty((), dtype=object)
            a[()] = comps[()]
            comps = a
        return Tensor(self.chart, sig, _fix(comps, self.chart.ring), self.weight + other.weight, _checked=True)

    def permute(self, perm) -> "Tensor":
        """Reorder slots: new slot k is old slot perm[k]."""
        perm = tuple(perm)
        return Tensor(self.chart, tuple(self.sig[p] for p in perm), np.transpose(self.comps, perm), self.weight,
                      _checked=True)

    def move_slot(self, src: int, dst: int) -> "Tensor":
        order = list(range(self.rank))
        order.pop(src)
        order.insert(dst, src)
        return self.permute(order)

    # -- symmetry projections ---------------------------------------------
    def _check_slots(self, slots):
        if len(set(self.sig[s] for s in slots)) > 1:
            raise ValueError("symmetrized slots must share variance")
        if len(set(slots)) != len(slots) or any(s < 0 or s >= self.rank for s in slots):
            raise ValueError(f"bad slot spec {slots}")

    def _sym(self, slots, sign: bool) -> "Tensor":
        slots = tuple(slots)
        self._check_slots(slots)
        k = len(slots)
        acc = None
        for perm in itertools.permutations(range(k)):
            order = list(range(self.rank))
            for a, b in zip(slots, perm):
                order[a] = slots[b]
            term = np.transpose(self.comps, order)
            if sign and _parity(perm):
                term = -term
            acc = term if acc is None else acc + term
        return self._new(_fix(acc, self.chart.ring)).scale(QQ(1) / factorial(k))

    def symmetrize(self, *slots) -> "Tensor":
        return self._sym(_flat(slots), False)

    def alternate(self, *slots) -> "Tensor":
        return self._sym(_flat(slots), True)

    def pair_skew(self, first=(0, 1), second=(2, 3)) -> "Tensor":
        """Skew in each of two slot pairs (the four-term 1/4 projection)."""
        return self.alternate(*first).alternate(*second)

    # -- calculus ----------------------------------------------------------
    def map(self, fn) -> "Tensor":
        f = np.frompyfunc(fn, 1, 1)
        if not self.rank:
            return self._new(self._scalar_arr(fn(self.comps[()])))
        return self._new(_fix(f(self.comps), self.chart.ring))

    def partial(self) -> "Tensor":
        """Coordinate derivative; the new lower slot comes first."""
        comps = np.empty((self.dim,) + self.comps.shape, dtype=object)
        for a, name in enumerate(self.chart.coords):
            for idx in np.ndindex(*self.comps.shape):
                comps[(a,) + idx] = self.comps[idx].diff(name)
        return Tensor(self.chart, (LOW,) + self.sig, comps, self.weight, _checked=True)

    def to_ring(self, ring: PolyRing, chart: Chart | None = None) -> "Tensor":
        chart = chart or self.chart.with_ring(ring)
        return Tensor(chart, self.sig, _fix(self.comps, ring), self.weight, _checked=True)

    def substitute(self, values: dict, chart: Chart | None = None) -> "Tensor":
        f = np.frompyfunc(lambda v: v.substitute(values), 1, 1)
        comps = f(self.comps) if self.rank else self._scalar_arr(self.comps[()].substitute(values))
        chart = chart or self.chart
        return Tensor(chart, self.sig, _fix(np.asarray(comps, dtype=object), chart.ring), self.weight, _checked=True)

    # -- serialisation -----------------------------------------------------
    def to_literal(self) -> dict:
        comps = {}
        for idx, v in self.nonzero_items():
            comps[",".join(str(i + 1) for i in idx)] = str(v)
        out = {"chart": self.chart.name, "indices": ["up" if s == UP else "low" for s in self.sig],
               "components": comps}
        if self.weight:
            out["weight"] = str(self.weight)
        return out

    @classmethod
    def from_literal(cls, chart: Chart, lit: dict) -> "Tensor":
        sig = []
        for s in lit.get("indices", []):
            if s in ("up", "upper", "u"):
                sig.append(UP)
            elif s in ("low", "lower", "l"):
                sig.append(LOW)
            else:
                raise ValueError(f"bad index variance {s!r}")
        entries = {}
        for key, val in lit.get("components", {}).items():
            idx = tuple(int(k) - 1 for k in key.split(",")) if key else ()
            if len(idx) != len(sig) or any(i < 0 or i >= chart.dim for i in idx):
                raise ValueError(f"bad component index {key!r}")
            entries[idx] = val
        return cls.from_dict(chart, sig, entries, lit.get("weight", 0))


def _flat(slots):
    if len(slots) == 1 and isinstance(slots[0], (tuple, list)):
        return tuple(slots[0])
    return tuple(slots)


def _parity(perm) -> int:
    perm = list(perm)
    p = 0
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            p ^= 1
    return p


# -- trace-free parts ------------------------------------------------------

@lru_cache(maxsize=None)
def trace_free_projector(sig: tuple, n: int):
    """Exact matrix of the trace-free projection on tensors of signature ``sig``.

    The trace-free subspace is the kernel of all upper/lower contractions; its
    complement spanned by Kronecker-delta insertions is the orthogonal
    complement in the component inner product, so the projection is the
    orthogonal projector onto the kernel.  Returned as a sparse dict
    ``row -> {col: coeff}`` over flattened component indices.
    """
    rank = len(sig)
    shape = (n,) * rank
    size = n ** rank
    ups = [i for i, s in enumerate(sig) if s == UP]
    lows = [i for i, s in enumerate(sig) if s == LOW]
    index = list(np.ndindex(*shape))
    flat = {idx: k for k, idx in enumerate(index)}
    trace_rows = []
    for u in ups:
        for l in lows:
            rest = [i for i in range(rank) if i not in (u, l)]
            for ridx in itertools.product(range(n), repeat=len(rest)):
                row = [0] * size
                for r in range(n):
                    full = [0] * rank
                    for pos, val in zip(rest, ridx):
                        full[pos] = val
                    full[u] = full[l] = r
                    row[flat[tuple(full)]] += 1
                trace_rows.append(row)
    if not trace_rows:
        return None
    M = RationalMatrix(trace_rows, size)
    rows, pivots = M.rref()
    R = RationalMatrix(rows, size)           # independent trace functionals
    gram = R @ R.transpose()
    ginv = gram.inverse()
    # P = I - R^T (R R^T)^{-1} R
    RtG = R.transpose() @ ginv
    corr = RtG @ R
    proj = {}
    for i in range(size):
        row = {}
        for j in range(size):
            v = (1 if i == j else 0) - corr[i, j]
            if v:
                row[j] = v
        proj[i] = row
    return proj, index


def trace_free(T: Tensor) -> Tensor:
    """Trace-free part with respect to every upper/lower slot pair."""
    res = trace_free_projector(T.sig, T.dim)
    if res is None:
        return T
    proj, index = res
    flat = [T.comps[idx] for idx in index]
    out = Tensor.zeros(T.chart, T.sig, T.weight)
    zero = T.chart.zero()
    for i, idx in enumerate(index):
        acc = zero
        for j, c in proj[i].items():
            v = flat[j]
            if v:
                acc = acc + v * c
        out.comps[idx] = acc
    return out


def trace_free_affine(T: Tensor, up: int | None = None, low: int | None = None) -> Tensor:
    """Trace-free part for the shapes used by the projective operators.

    For a (1,1) tensor this is T - (1/n) tr(T) delta; higher shapes use the
    full projector of :func:`trace_free`.
    """
    if T.rank == 2 and set(T.sig) == {UP, LOW}:
        u = T.sig.index(UP)
        tr = T.contract(0, 1).value()
        d = Tensor.delta(T.chart)
        if u == 1:
            d = d.permute((1, 0))
        return T - d.scale(tr * (QQ(1) / T.dim))
    if UP not in T.sig or LOW not in T.sig:
        raise ValueError("trace-free part needs an upper and a lower slot")
    return trace_free(T)


def trace_free_metric(T: Tensor, g: Tensor, ginv: Tensor) -> Tensor:
    """T_ab - (1/N) g_ab g^{rs} T_rs for a two-index lower tensor."""
    if T.sig != (LOW, LOW):
        raise ValueError("metric trace-free part needs two lower slots")
    tr = metric_trace(T, ginv)
    return T - g.scale(tr * (QQ(1) / T.dim))


def metric_trace(T: Tensor, ginv: Tensor) -> Poly:
    acc = T.chart.zero()
    n = T.dim
    for r in range(n):
        for s in range(n):
            a, b = ginv.comps[r, s], T.comps[r, s]
            if a and b:
                acc = acc + a * b
    return acc


def window_trace_free(T: Tensor, g: Tensor, ginv: Tensor) -> Tensor:
    """Metric trace-free part of a tensor skew in slots (0,1) and in (2,3).

    Removes g_ac X_bd - g_bc X_ad - g_ad X_bc + g_bd X_ac with
    X = (S - s g / (2N - 2)) / (N - 2), where S_bd = g^{ac} T_abcd.
    """
    N = T.dim
    S = Tensor.zeros(T.chart, (LOW, LOW))
    for b in range(N):
        for d in range(N):
            acc = T.chart.zero()
            for a in range(N):
                for c in range(N):
                    gi, t = ginv.comps[a, c], T.comps[a, b, c, d]
                    if gi and t:
                        acc = acc + gi * t
            S.comps[b, d] = acc
    s = metric_trace(S, ginv)
    X = (S - g.scale(s * (QQ(1) / (2 * N - 2)))).scale(QQ(1) / (N - 2))
    gX = g.product(X)                                   # g_ac X_bd in slot order (a,c,b,d)
    term = gX.permute((0, 2, 1, 3))                      # -> (a,b,c,d)
    term4 = term.pair_skew().scale(4)
    return T - term4


def raise_index(T: Tensor, slot: int, ginv: Tensor) -> Tensor:
    """Raise ``slot`` with the inverse metric, keeping slot order."""
    if T.sig[slot] != LOW:
        raise ValueError("slot is not lower")
    return T.contract_with(slot, ginv, 1).move_slot(T.rank - 1, slot)


def lower_index(T: Tensor, slot: int, g: Tensor) -> Tensor:
    """Lower ``slot`` with the metric, keeping slot order."""
    if T.sig[slot] != UP:
        raise ValueError("slot is not upper")
    return T.contract_with(slot, g, 1).move_slot(T.rank - 1, slot)
