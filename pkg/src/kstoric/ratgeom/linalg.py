"""Exact linear algebra over the integers and the rationals.

Everything here is small-dimensional (the toric computations never go above
dimension five), so straightforward elimination is used throughout.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Number = int | Fraction


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to :class:`Fraction`.

    Floats are rejected on purpose: silently converting ``0.1`` would bring
    binary rounding into an exact computation.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def as_vec(xs: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_fraction(x) for x in xs)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def common_denominator(values: Iterable[Fraction]) -> int:
    return reduce(lcm, (Fraction(v).denominator for v in values), 1)


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = reduce(gcd, (abs(x) for x in v), 0)
    if g == 0:
        return tuple(v)
    return tuple(x // g for x in v)


def integral_direction(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector on the ray spanned by a rational vector."""
    v = as_vec(v)
    d = common_denominator(v)
    return primitive([int(x * d) for x in v])


def int_det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss elimination)."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            factor = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def det(rows: Sequence[Sequence[Number]]) -> Fraction:
    rows = [as_vec(r) for r in rows]
    d = common_denominator(x for r in rows for x in r)
    scaled = [[int(x * d) for x in r] for r in rows]
    return Fraction(int_det(scaled), d ** len(rows))


def hyperplane_normal(points: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    """Primitive integer normal of the hyperplane through ``d`` integer points in Z^d.

    Returns ``None`` when the points are affinely dependent.
    """
    d = len(points[0])
    p0 = points[0]
    rows = [[a - b for a, b in zip(p, p0)] for p in points[1:]]
    normal = []
    for j in range(d):
        minor = [r[:j] + r[j + 1:] for r in rows]
        normal.append((-1) ** j * int_det(minor))
    if not any(normal):
        return None
    return primitive(normal)


def solve(a: Sequence[Sequence[Number]], b: Sequence[Number]) -> tuple[Fraction, ...] | None:
    """Unique solution of a square or overdetermined consistent system.

    Returns ``None`` if the system is inconsistent or the solution is not unique.
    """
    rows = [list(as_vec(r)) + [as_fraction(bi)] for r, bi in zip(a, b)]
    ncols = len(a[0]) if a else 0
    piv_cols = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(row[-1] != 0 for row in rows[r:]):
        return None
    if len(piv_cols) < ncols:
        return None
    out = [Fraction(0)] * ncols
    for i, c in enumerate(piv_cols):
        out[c] = rows[i][-1]
    return tuple(out)


def rank(vectors: Sequence[Sequence[Number]]) -> int:
    ech = Echelon()
    for v in vectors:
        ech.add(v)
    return ech.rank


class Echelon:
    """Incrementally maintained row-echelon basis, for independence tests."""

    def __init__(self):
        self._rows: list[tuple[int, list[Fraction]]] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, v: Sequence[Number]) -> list[Fraction]:
        w = [Fraction(x) for x in v]
        for col, row in self._rows:
            if w[col] != 0:
                f = w[col]
                w = [x - f * y for x, y in zip(w, row)]
        return w

    def add(self, v: Sequence[Number]) -> bool:
        """Add ``v``; return True iff it was independent of the current rows."""
        w = self.reduce(v)
        col = next((i for i, x in enumerate(w) if x != 0), None)
        if col is None:
            return False
        p = w[col]
        w = [x / p for x in w]
        self._rows.append((col, w))
        return True


def nullspace(rows: Sequence[Sequence[Number]], ncols: int) -> list[tuple[Fraction, ...]]:
    """Basis of {x : rows·x = 0}."""
    m = [list(as_vec(r)) for r in rows]
    piv_cols = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in piv_cols]
    basis = []
    for fc in free:
        x = [Fraction(0)] * ncols
        x[fc] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            x[pc] = -m[i][fc]
        basis.append(tuple(x))
    return basis


def integer_nth_root_floor(a: int, k: int) -> int:
    """Largest integer r >= 0 with r**k <= a."""
    if a < 0:
        raise ValueError("negative radicand")
    if a < 2:
        return a
    r = 1 << ((a.bit_length() + k - 1) // k)
    while True:
        s = ((k - 1) * r + a // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r ** k > a:
        r -= 1
    while (r + 1) ** k <= a:
        r += 1
    return r
