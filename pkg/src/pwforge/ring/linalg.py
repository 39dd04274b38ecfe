"""Exact linear algebra over the rationals.

Two independent elimination routes are provided:

* ``RationalMatrix.nullspace_basis`` clears denominators row by row and runs
  fraction-free (Bareiss) elimination over the integers, then back-solves for
  the reduced row echelon form.
* ``SparseRREF`` keeps an incrementally reduced row echelon basis of sparse
  rational rows.  It is what the polynomial-ansatz solvers feed, since their
  systems have thousands of sparse rows.

Both pick the first nonzero column as pivot, so they produce the same
normalised nullspace basis; the tests compare them.
"""
from __future__ import annotations

from math import lcm

from gmpy2 import mpq, mpz

from .poly import QQ


def _row_to_integers(row):
    den = 1
    for v in row:
        if v:
            den = lcm(den, int(v.denominator))
    return [mpz(v * den) for v in row]


class RationalMatrix:
    """Dense matrix of exact rationals."""

    def __init__(self, rows, ncols: int | None = None):
        self.rows = [[QQ(v) for v in r] for r in rows]
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        self.nrows = len(self.rows)
        self.ncols = ncols

    @classmethod
    def zeros(cls, m: int, n: int):
        return cls([[0] * n for _ in range(m)], n)

    @classmethod
    def identity(cls, n: int):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, RationalMatrix) and self.rows == other.rows and self.ncols == other.ncols

    def __repr__(self):
        return f"RationalMatrix({[[str(v) for v in r] for r in self.rows]})"

    def transpose(self):
        return RationalMatrix([list(c) for c in zip(*self.rows)] if self.rows else [], self.nrows)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            cols = list(zip(*other.rows))
            return RationalMatrix([[sum((a * b for a, b in zip(r, c)), mpq(0)) for c in cols] for r in self.rows],
                                  other.ncols)
        return [sum((a * QQ(b) for a, b in zip(r, other)), mpq(0)) for r in self.rows]

    def _bareiss(self):
        """Fraction-free forward elimination; returns (integer echelon rows, pivot columns)."""
        a = [_row_to_integers(r) for r in self.rows]
        m, n = self.nrows, self.ncols
        pivots = []
        prev = mpz(1)
        r = 0
        for c in range(n):
            if r == m:
                break
            piv = next((i for i in range(r, m) if a[i][c]), None)
            if piv is None:
                continue
            if piv != r:
                a[r], a[piv] = a[piv], a[r]
            arc = a[r][c]
            for i in range(r + 1, m):
                aic = a[i][c]
                row_i, row_r = a[i], a[r]
                for j in range(c + 1, n):
                    row_i[j] = (arc * row_i[j] - aic * row_r[j]) // prev
                row_i[c] = mpz(0)
            prev = arc
            pivots.append(c)
            r += 1
        return a[:r], pivots

    def rank(self) -> int:
        return len(self._bareiss()[1])

    def rref(self):
        """Reduced row echelon form (rational rows) and pivot columns."""
        ech, pivots = self._bareiss()
        rows = [[mpq(v) for v in r] for r in ech]
        for k in range(len(pivots) - 1, -1, -1):
            c = pivots[k]
            inv = 1 / rows[k][c]
            rows[k] = [v * inv for v in rows[k]]
            for i in range(k):
                f = rows[i][c]
                if f:
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[k])]
        return rows, pivots

    def nullspace_basis(self):
        """Basis of the right nullspace, one vector per free column (RREF normalised)."""
        rows, pivots = self.rref()
        pivset = set(pivots)
        basis = []
        for f in range(self.ncols):
            if f in pivset:
                continue
            v = [mpq(0)] * self.ncols
            v[f] = mpq(1)
            for k, c in enumerate(pivots):
                v[c] = -rows[k][f]
            basis.append(v)
        return basis

    def inverse(self):
        if self.nrows != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        n = self.ncols
        aug = RationalMatrix([r + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(self.rows)], 2 * n)
        rows, pivots = aug.rref()
        if pivots[:n] != list(range(n)) or len(pivots) < n:
            raise ZeroDivisionError("matrix is singular")
        return RationalMatrix([r[n:] for r in rows[:n]], n)

    def solve(self, rhs):
        """One solution x of M x = rhs, or None when inconsistent."""
        aug = RationalMatrix([r + [QQ(b)] for r, b in zip(self.rows, rhs)], self.ncols + 1)
        rows, pivots = aug.rref()
        if pivots and pivots[-1] == self.ncols:
            return None
        x = [mpq(0)] * self.ncols
        for k, c in enumerate(pivots):
            x[c] = rows[k][self.ncols]
        return x


def nullspace_basis(M) -> list:
    if not isinstance(M, RationalMatrix):
        M = RationalMatrix(M)
    return M.nullspace_basis()


class SparseRREF:
    """Incrementally maintained reduced row echelon form of sparse rows.

    Rows are dicts ``column -> rational``.  Every stored row has leading
    coefficient 1 at its pivot (its smallest column) and no stored row mentions
    another row's pivot column.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, dict] = {}
        # column -> set of pivots whose rows contain it, for back-elimination
        self._occ: dict[int, set] = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _reduce(self, row: dict) -> dict:
        rows = self.rows
        row = {c: v for c, v in row.items() if v}
        hits = [c for c in row if c in rows]
        while hits:
            for c in hits:
                f = row.get(c)
                if not f:
                    continue
                for cc, vv in rows[c].items():
                    nv = row.get(cc, 0) - f * vv
                    if nv:
                        row[cc] = nv
                    else:
                        row.pop(cc, None)
            hits = [c for c in row if c in rows]
        return row

    def add_row(self, row: dict) -> bool:
        """Insert a row; returns True when it increased the rank."""
        row = self._reduce(row)
        if not row:
            return False
        p = min(row)
        inv = 1 / row[p]
        row = {c: v * inv for c, v in row.items()}
        # eliminate the new pivot from existing rows
        for q in list(self._occ.get(p, ())):
            r = self.rows[q]
            f = r.get(p)
            if not f:
                continue
            for cc, vv in row.items():
                nv = r.get(cc, 0) - f * vv
                if nv:
                    if cc not in r:
                        self._occ.setdefault(cc, set()).add(q)
                    r[cc] = nv
                else:
                    if cc in r:
                        del r[cc]
                        self._occ.get(cc, set()).discard(q)
        self.rows[p] = row
        for cc in row:
            if cc != p:
                self._occ.setdefault(cc, set()).add(p)
        return True

    def pivots(self):
        return sorted(self.rows)

    def nullspace_basis(self):
        """Sparse nullspace vectors (dicts), one per free column in increasing order."""
        pivset = self.rows
        # free column -> list of (pivot, coefficient)
        by_free: dict[int, list] = {}
        for p, r in self.rows.items():
            for c, v in r.items():
                if c != p:
                    by_free.setdefault(c, []).append((p, v))
        basis = []
        for f in range(self.ncols):
            if f in pivset:
                continue
            vec = {f: mpq(1)}
            for p, v in by_free.get(f, ()):
                vec[p] = -v
            basis.append(vec)
        return basis

    def contains(self, row: dict) -> bool:
        """Whether a row lies in the row space."""
        return not self._reduce(dict(row))


def span_coordinates(vectors: list, target: dict):
    """Express a sparse vector as a rational combination of sparse vectors.

    Returns the coefficient list or None when the target is outside the span.
    Vectors are dicts over an arbitrary hashable key set.
    """
    keys = {}
    for v in vectors:
        for k in v:
            keys.setdefault(k, len(keys))
    for k in target:
        if k not in keys:
            return None
    nv = len(vectors)
    # columns: vector coefficients then the right-hand side
    elim = SparseRREF(nv + 1)
    rows_by_key: dict = {}
    for j, v in enumerate(vectors):
        for k, c in v.items():
            rows_by_key.setdefault(k, {})[j] = c
    for k, c in target.items():
        rows_by_key.setdefault(k, {})[nv] = -QQ(c)
    for row in rows_by_key.values():
        elim.add_row(row)
    if nv in elim.rows:
        return None
    # particular solution with the right-hand side column set to 1
    coeffs = [mpq(0)] * nv
    for p, r in elim.rows.items():
        coeffs[p] = -r.get(nv, mpq(0))
    return coeffs
