"""Sparse multivariate polynomials with exact rational coefficients.

A monomial is packed into a single Python int: variable ``i`` owns the bit
field ``[FIELD * i, FIELD * (i + 1))``.  Multiplying monomials is then one
integer addition.  At most one variable (the Laurent variable, ``t`` on
ambient charts) may carry negative exponents; its field stores the exponent
shifted by ``BIAS``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Integral

import gmpy2
from gmpy2 import mpq

FIELD = 20
BIAS = 1 << (FIELD - 1)
MASK = (1 << FIELD) - 1

Rational = type(mpq(0))


def QQ(value) -> Rational:
    """Coerce ints, Fractions, mpq values and ``"a/b"`` strings to an exact rational."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, (Integral, type(gmpy2.mpz(0)))):
        return mpq(int(value))
    if isinstance(value, str):
        return mpq(value.strip())
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted as exact rationals")
    raise TypeError(f"cannot coerce {value!r} to a rational")


class PolyRing:
    """Ordered variable list plus the packing scheme for monomials.

    Rings are interned, so two rings with the same names and Laurent
    variable are the same object and comparisons are cheap.
    """

    _cache: dict = {}

    def __new__(cls, names, laurent: str | None = None):
        names = tuple(names)
        key = (names, laurent)
        ring = cls._cache.get(key)
        if ring is not None:
            return ring
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if laurent is not None and laurent not in names:
            raise ValueError(f"Laurent variable {laurent!r} is not among {names}")
        ring = super().__new__(cls)
        ring.names = names
        ring.laurent = laurent
        ring.index = {nm: i for i, nm in enumerate(names)}
        ring.nvars = len(names)
        li = ring.index.get(laurent) if laurent is not None else None
        ring.laurent_index = li
        ring.one_key = (BIAS << (FIELD * li)) if li is not None else 0
        cls._cache[key] = ring
        return ring

    def __repr__(self):
        extra = f", laurent={self.laurent!r}" if self.laurent else ""
        return f"PolyRing({list(self.names)!r}{extra})"

    def __reduce__(self):
        return (PolyRing, (self.names, self.laurent))

    # -- packing -----------------------------------------------------------
    def encode(self, exps) -> int:
        key = self.one_key
        for i, e in enumerate(exps):
            if e < 0 and i != self.laurent_index:
                raise ValueError(f"negative exponent for {self.names[i]}")
            key += e << (FIELD * i)
        return key

    def decode(self, key: int) -> tuple:
        out = []
        li = self.laurent_index
        for i in range(self.nvars):
            e = (key >> (FIELD * i)) & MASK
            if i == li:
                e -= BIAS
            out.append(e)
        return tuple(out)

    def exponent(self, key: int, i: int) -> int:
        e = (key >> (FIELD * i)) & MASK
        return e - BIAS if i == self.laurent_index else e

    # -- constructors ------------------------------------------------------
    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return Poly(self, {self.one_key: mpq(1)})

    def const(self, c) -> "Poly":
        c = QQ(c)
        return Poly(self, {self.one_key: c} if c else {})

    def var(self, name: str) -> "Poly":
        i = self.index[name]
        return Poly(self, {self.one_key + (1 << (FIELD * i)): mpq(1)})

    def gens(self):
        return [self.var(nm) for nm in self.names]

    def monomial(self, exps, coeff=1) -> "Poly":
        c = QQ(coeff)
        return Poly(self, {self.encode(exps): c} if c else {})

    def coerce(self, value) -> "Poly":
        if isinstance(value, Poly):
            return value if value.ring is self else value.to_ring(self)
        return self.const(value)

    def union(self, other: "PolyRing") -> "PolyRing":
        if other is self:
            return self
        if self.laurent and other.laurent and self.laurent != other.laurent:
            raise ValueError("rings with different Laurent variables cannot be merged")
        names = list(self.names) + [nm for nm in other.names if nm not in self.index]
        return PolyRing(names, self.laurent or other.laurent)

    def monomials_upto(self, names, max_degree: int, min_degree: int = 0):
        """Monomial keys in the given variables with total degree in range.

        Ordered by degree, then lexicographically, for deterministic ansatz layouts.
        """
        idx = [self.index[nm] for nm in names]
        out = []

        def rec(pos, left, acc):
            if pos == len(idx) - 1:
                out.append(acc + (left << (FIELD * idx[pos])))
                return
            for e in range(left, -1, -1):
                rec(pos + 1, left - e, acc + (e << (FIELD * idx[pos])))

        if not idx:
            return [self.one_key] if min_degree <= 0 <= max_degree else []
        for d in range(min_degree, max_degree + 1):
            rec(0, d, self.one_key)
        return out


def _coerce_coeff(value):
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, Fraction)):
        return QQ(value)
    return None


class Poly:
    """Immutable sparse polynomial; ``terms`` maps packed monomials to nonzero rationals."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms

    # -- basic queries -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.ring.one_key in self.terms)

    def constant_value(self) -> Rational:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get(self.ring.one_key, mpq(0))

    def items(self):
        """(exponent tuple, coefficient) pairs in canonical order (lex, highest first)."""
        dec = self.ring.decode
        return sorted(((dec(k), c) for k, c in self.terms.items()), reverse=True)

    def degree(self, name: str) -> int:
        i = self.ring.index.get(name)
        if i is None or not self.terms:
            return 0 if i is None else -1
        return max(self.ring.exponent(k, i) for k in self.terms)

    def min_degree(self, name: str) -> int:
        i = self.ring.index[name]
        return min(self.ring.exponent(k, i) for k in self.terms) if self.terms else 0

    def total_degree(self, names=None) -> int:
        if not self.terms:
            return -1
        ring = self.ring
        idx = range(ring.nvars) if names is None else [ring.index[nm] for nm in names if nm in ring.index]
        return max(sum(ring.exponent(k, i) for i in idx) for k in self.terms)

    def variables(self) -> set:
        ring = self.ring
        used = set()
        for k in self.terms:
            for i in range(ring.nvars):
                if ring.exponent(k, i):
                    used.add(ring.names[i])
        return used

    # -- ring conversion ---------------------------------------------------
    def to_ring(self, ring: PolyRing) -> "Poly":
        if ring is self.ring:
            return self
        src = self.ring
        mapping = []
        for i, nm in enumerate(src.names):
            j = ring.index.get(nm)
            mapping.append((i, j))
        out = {}
        for k, c in self.terms.items():
            nk = ring.one_key
            for i, j in mapping:
                e = src.exponent(k, i)
                if e == 0:
                    continue
                if j is None:
                    raise ValueError(f"variable {src.names[i]!r} missing from target ring")
                if e < 0 and j != ring.laurent_index:
                    raise ValueError(f"negative exponent of {src.names[i]!r} in target ring")
                nk += e << (FIELD * j)
            out[nk] = c
        return Poly(ring, out)

    def _align(self, other):
        if isinstance(other, Poly):
            if other.ring is self.ring:
                return self, other
            ring = self.ring.union(other.ring)
            return self.to_ring(ring), other.to_ring(ring)
        c = _coerce_coeff(other)
        if c is None:
            return None, None
        return self, self.ring.const(c)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        if len(a.terms) < len(b.terms):
            a, b = b, a
        out = dict(a.terms)
        for k, c in b.terms.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return Poly(a.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {k: -c for k, c in self.terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        out = dict(a.terms)
        for k, c in b.terms.items():
            v = out.get(k)
            if v is None:
                out[k] = -c
            else:
                v = v - c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return Poly(a.ring, out)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def scale(self, c) -> "Poly":
        c = QQ(c)
        if not c:
            return Poly(self.ring, {})
        return Poly(self.ring, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _coerce_coeff(other)
            if c is None:
                return NotImplemented
            return self.scale(c)
        a, b = self._align(other)
        if not a.terms or not b.terms:
            return Poly(a.ring, {})
        if len(a.terms) < len(b.terms):
            a, b = b, a
        off = a.ring.one_key
        if len(b.terms) == 1:
            (kb, cb), = b.terms.items()
            d = kb - off
            return Poly(a.ring, {ka + d: ca * cb for ka, ca in a.terms.items()})
        out = {}
        get = out.get
        aitems = list(a.terms.items())
        for kb, cb in b.terms.items():
            d = kb - off
            for ka, ca in aitems:
                k = ka + d
                v = get(k)
                out[k] = ca * cb if v is None else v + ca * cb
        return Poly(a.ring, {k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by a rational constant or by a monomial of the Laurent variable."""
        if isinstance(other, Poly):
            a, b = self._align(other)
            if len(b.terms) != 1:
                raise ZeroDivisionError(f"exact division by {other} is not supported")
            (kb, cb), = b.terms.items()
            ring = a.ring
            for i in range(ring.nvars):
                if i != ring.laurent_index and ring.exponent(kb, i):
                    raise ZeroDivisionError(f"division by {other} requires a Laurent monomial")
            d = kb - ring.one_key
            return Poly(ring, {k - d: c / cb for k, c in a.terms.items()})
        c = QQ(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return self.scale(1 / c)

    def __pow__(self, e: int):
        if e < 0:
            return self.ring.one() / (self ** (-e))
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def diff(self, name: str, strict: bool = True) -> "Poly":
        """Formal partial derivative; ``strict=False`` treats foreign names as constants."""
        ring = self.ring
        i = ring.index.get(name)
        if i is None:
            if not strict:
                return Poly(ring, {})
            raise KeyError(f"unknown variable {name!r}")
        unit = 1 << (FIELD * i)
        out = {}
        for k, c in self.terms.items():
            e = ring.exponent(k, i)
            if e:
                out[k - unit] = c * e
        return Poly(ring, out)

    def substitute(self, values: dict) -> "Poly":
        """Replace variables by polynomials (or constants); others stay symbolic."""
        ring = self.ring
        targets = {ring.index[nm]: v for nm, v in values.items() if nm in ring.index}
        if not targets:
            return self
        out_ring = ring
        conv = {}
        for i, v in targets.items():
            if isinstance(v, Poly):
                out_ring = out_ring.union(v.ring)
        for i, v in targets.items():
            conv[i] = out_ring.coerce(v) if isinstance(v, Poly) else out_ring.const(v)
        powcache = {}
        result = out_ring.zero()
        for k, c in self.terms.items():
            keep = ring.one_key
            factor = None
            for i in range(ring.nvars):
                e = ring.exponent(k, i)
                if not e:
                    continue
                if i in conv:
                    pk = (i, e)
                    if pk not in powcache:
                        powcache[pk] = conv[i] ** e
                    factor = powcache[pk] if factor is None else factor * powcache[pk]
                else:
                    keep += e << (FIELD * i)
            term = Poly(ring, {keep: c}).to_ring(out_ring)
            result = result + (term if factor is None else term * factor)
        return result

    def coefficient_map(self, names) -> dict:
        """Split into {exponent tuple over ``names``: coefficient polynomial in the rest}."""
        ring = self.ring
        idx = [ring.index[nm] for nm in names]
        out = {}
        for k, c in self.terms.items():
            sub = tuple(ring.exponent(k, i) for i in idx)
            rest = k
            for i, e in zip(idx, sub):
                rest -= e << (FIELD * i)
            out.setdefault(sub, {})[rest] = c
        return {s: Poly(ring, t) for s, t in out.items()}

    # -- comparison and display -------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            if other.ring is self.ring:
                return self.terms == other.terms
            a, b = self._align(other)
            return a.terms == b.terms
        c = _coerce_coeff(other)
        if c is None:
            return NotImplemented
        if not c:
            return not self.terms
        return self.terms == {self.ring.one_key: c}

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        return hash((self.ring.names, frozenset(self.terms.items())))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    names = p.ring.names
    parts = []
    for exps, c in p.items():
        mono = "*".join(nm if e == 1 else f"{nm}^{e}" for nm, e in zip(names, exps) if e)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)
