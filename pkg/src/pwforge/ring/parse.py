"""Text syntax for polynomials: ``3/2*x1^2*p1 - x2 + 1``.

Accepted: integers, ``a/b`` rationals, variables matching
``[A-Za-z][A-Za-z0-9]*``, ``+ - * ^`` (``**`` is an alias of ``^``) and
parentheses.  Division is only allowed by a nonzero constant.
"""
from __future__ import annotations

import re

from .poly import Poly, PolyRing, QQ

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9]*)|(\*\*|[-+*/^()]))")


class PolyParseError(ValueError):
    def __init__(self, text: str, pos: int, msg: str):
        super().__init__(f"{msg} at column {pos + 1} in {text!r}")
        self.text = text
        self.pos = pos


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolyParseError(text, pos, "unexpected character")
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            out.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), start))
        else:
            op = m.group(3)
            out.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str, ring: PolyRing, allow_new: bool):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.ring = ring
        self.allow_new = allow_new

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise PolyParseError(self.text, tok[2], msg)

    def expr(self):
        kind, val, _ = self.peek()
        neg = False
        if kind == "op" and val in "+-":
            self.take()
            neg = val == "-"
        acc = self.term()
        if neg:
            acc = -acc
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if val == "+" else acc - rhs
            else:
                return acc

    def term(self):
        acc = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.factor()
            elif kind == "op" and val == "/":
                tok = self.take()
                den = self.factor()
                if not isinstance(den, Poly) or not den.is_constant() or den.is_zero():
                    self.fail("division is only allowed by a nonzero constant", tok)
                acc = acc / den.constant_value()
            else:
                return acc

    def factor(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            f = self.factor()
            return -f if val == "-" else f
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            kind, val, _ = self.peek()
            if kind == "op" and val == "-":
                self.take()
                sign = -1
            tok = self.take()
            if tok[0] != "num":
                self.fail("expected integer exponent", tok)
            try:
                base = base ** (sign * tok[1])
            except (ZeroDivisionError, ValueError) as exc:
                self.fail(str(exc), tok)
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return self.ring.const(val)
        if kind == "name":
            if val not in self.ring.index:
                if not self.allow_new:
                    self.fail(f"unknown variable {val!r}", tok)
                self.ring = self.ring.union(PolyRing([val]))
            return self.ring.var(val)
        if kind == "op" and val == "(":
            inner = self.expr()
            close = self.take()
            if close[:2] != ("op", ")"):
                self.fail("expected ')'", close)
            return inner
        self.fail("unexpected token", tok)


def parse_poly(text, ring: PolyRing | None = None, allow_new: bool = False) -> Poly:
    """Parse a polynomial string into ``ring``.

    With ``ring=None`` the variables are collected in order of appearance.
    Integers and rationals are accepted directly as constants.
    """
    if ring is None:
        ring = PolyRing(())
        allow_new = True
    if isinstance(text, Poly):
        return ring.coerce(text)
    if not isinstance(text, str):
        return ring.const(QQ(text))
    p = _Parser(text, ring, allow_new)
    if p.peek()[0] == "end":
        p.fail("empty polynomial")
    out = p.expr()
    if p.peek()[0] != "end":
        p.fail("trailing input")
    return out.to_ring(p.ring) if out.ring is not p.ring else out
