"""Rank of an integer matrix modulo a prime.

This is an independent cross-check of the exact rational elimination: the
rank modulo a large prime never exceeds the rational rank and agrees with it
unless the prime divides one of the pivots.  The elimination loop is compiled
with numba when available; setting ``PWFORGE_NUMBA=0`` selects the vectorised
numpy path instead.
"""
from __future__ import annotations

import os
import random

import numpy as np

PRIME = 2147483647  # 2**31 - 1: products of residues fit in int64

try:  # pragma: no cover - depends on the environment
    import numba
except ImportError:  # pragma: no cover
    numba = None


def numba_enabled() -> bool:
    return numba is not None and os.environ.get("PWFORGE_NUMBA", "1") != "0"


def _rank_numpy(a: np.ndarray, p: int) -> int:
    a = a.copy() % p
    m, n = a.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        below = a[r + 1:, c].copy()
        rows = np.nonzero(below)[0]
        if rows.size:
            idx = r + 1 + rows
            a[idx] = (a[idx] - (below[rows, None] * a[r][None, :]) % p) % p
        r += 1
    return r


def _rank_loop(a, p):
    m, n = a.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if a[i, c] % p != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(n):
                tmp = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = tmp
        # modular inverse by exponentiation
        base = a[r, c] % p
        e = p - 2
        inv = 1
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for j in range(c, n):
            a[r, j] = (a[r, j] * inv) % p
        for i in range(r + 1, m):
            f = a[i, c] % p
            if f != 0:
                for j in range(c, n):
                    a[i, j] = (a[i, j] - f * a[r, j]) % p
        r += 1
    return r


_compiled = None


def _rank_numba(a: np.ndarray, p: int) -> int:
    global _compiled
    if _compiled is None:
        _compiled = numba.njit(cache=False)(_rank_loop)
    return int(_compiled(a.copy() % p, np.int64(p)))


def rank_mod_p(a: np.ndarray, p: int = PRIME, use_numba: bool | None = None) -> int:
    """Rank of an int64 matrix over GF(p)."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    if a.size == 0:
        return 0
    if use_numba is None:
        use_numba = numba_enabled()
    return _rank_numba(a, p) if use_numba else _rank_numpy(a, p)


def _residue(v, p: int) -> int:
    num, den = int(v.numerator), int(v.denominator)
    if den % p == 0:
        raise ZeroDivisionError("denominator divisible by the prime")
    return num % p * pow(den, p - 2, p) % p


def sparse_rank_mod_p(rows, ncols: int, p: int = PRIME, seed: int = 0,
                      use_numba: bool | None = None) -> int:
    """Rank modulo p of sparse rational rows (dicts column -> rational).

    Tall systems are first compressed by a random combination of rows, which
    preserves the rank with high probability and keeps the dense kernel small.
    """
    rows = [r for r in rows if r]
    if not rows or ncols == 0:
        return 0
    rng = random.Random(seed)
    target = ncols + 8
    if len(rows) <= 2 * target:
        a = np.zeros((len(rows), ncols), dtype=np.int64)
        for i, r in enumerate(rows):
            for c, v in r.items():
                a[i, c] = _residue(v, p)
        return rank_mod_p(a, p, use_numba)
    a = np.zeros((target, ncols), dtype=np.int64)
    for r in rows:
        vals = [(c, _residue(v, p)) for c, v in r.items()]
        for _ in range(3):
            i = rng.randrange(target)
            f = rng.randrange(1, p)
            for c, v in vals:
                a[i, c] = (int(a[i, c]) + f * v) % p
    return rank_mod_p(a, p, use_numba)
