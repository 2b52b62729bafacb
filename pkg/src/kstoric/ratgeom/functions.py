"""Piecewise-linear functions on polytopes and piecewise polynomials in one variable."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .linalg import as_fraction, as_vec, dot
from .polytope import GeometryError, LatticePolytope, from_halfspaces, hull

Affine = tuple[tuple[Fraction, ...], Fraction]


class NonConvexError(GeometryError):
    """A piecewise-linear function failed its convexity certificate."""


# ---------------------------------------------------------------------------
# one-variable polynomials (coefficient tuples, lowest degree first)
# ---------------------------------------------------------------------------

def poly_eval(coeffs: Sequence[Fraction], x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def interpolate(xs: Sequence, ys: Sequence) -> tuple[Fraction, ...]:
    """Coefficients of the unique polynomial of degree < len(xs) through the points."""
    xs = [as_fraction(x) for x in xs]
    ys = [as_fraction(y) for y in ys]
    n = len(xs)
    coeffs = [Fraction(0)] * n
    for i in range(n):
        # Lagrange basis polynomial for node i
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xs[j] * basis[k + 1]
            denom *= xs[i] - xs[j]
        scale = ys[i] / denom
        for k in range(n):
            coeffs[k] += scale * basis[k]
    return poly_trim(coeffs)


def poly_integral(coeffs: Sequence[Fraction], a, b) -> Fraction:
    a, b = as_fraction(a), as_fraction(b)
    return sum((c / (k + 1)) * (b ** (k + 1) - a ** (k + 1)) for k, c in enumerate(coeffs))


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Continuous function on ``[breakpoints[0], inf)``, polynomial between
    consecutive breakpoints and identically zero after the last one."""

    breakpoints: tuple[Fraction, ...]
    polys: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        bp = self.breakpoints
        if len(self.polys) != len(bp) - 1:
            raise ValueError("need one polynomial per interval")
        if any(a >= b for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must increase")
        for k in range(1, len(self.polys)):
            if poly_eval(self.polys[k - 1], bp[k]) != poly_eval(self.polys[k], bp[k]):
                raise ValueError(f"discontinuity at {bp[k]}")
        if self.polys and poly_eval(self.polys[-1], bp[-1]) != 0:
            raise ValueError("function must vanish at the last breakpoint")

    def __call__(self, x) -> Fraction:
        x = as_fraction(x)
        bp = self.breakpoints
        if x < bp[0]:
            raise ValueError(f"{x} is left of the domain")
        if x >= bp[-1]:
            return Fraction(0)
        return poly_eval(self.polys[bisect_right(bp, x) - 1], x)

    def integral(self) -> Fraction:
        bp = self.breakpoints
        return sum(poly_integral(p, a, b) for p, a, b in zip(self.polys, bp, bp[1:]))

    @property
    def degree(self) -> int:
        return max((len(p) - 1 for p in self.polys), default=-1)


# ---------------------------------------------------------------------------
# piecewise-linear functions on a polytope
# ---------------------------------------------------------------------------

class PLFunction:
    """Convex piecewise-linear function ``u -> max_i (<a_i, u> + b_i)`` on a polytope.

    Only convex functions are representable; constructors that accept
    explicit cells certify convexity before returning.
    """

    def __init__(self, domain: LatticePolytope, forms: Sequence[tuple[Sequence, object]]):
        if not forms:
            raise ValueError("a PL function needs at least one affine piece")
        cleaned = {}
        for a, b in forms:
            a = as_vec(a)
            if len(a) != domain.dim:
                raise GeometryError("affine form has the wrong dimension")
            b = as_fraction(b)
            cleaned[a] = max(b, cleaned.get(a, b))
        self.domain = domain
        self.forms: tuple[Affine, ...] = tuple(sorted(cleaned.items()))
        self._cells = None

    @classmethod
    def constant(cls, domain: LatticePolytope, c=0) -> PLFunction:
        return cls(domain, [((0,) * domain.dim, c)])

    @classmethod
    def from_pieces(cls, domain: LatticePolytope,
                    pieces: Sequence[tuple[LatticePolytope, Sequence, object]]) -> PLFunction:
        """Build from explicit ``(cell, a, b)`` pieces, certifying convexity.

        The cells must tile the domain and each piece must agree with the
        upper envelope of all pieces on its own cell.
        """
        f = cls(domain, [(a, b) for _, a, b in pieces])
        total = Fraction(0)
        for cell, a, b in pieces:
            if not all(domain.contains(v) for v in cell.vertices):
                raise GeometryError("cell leaves the domain")
            a, b = as_vec(a), as_fraction(b)
            for v in cell.vertices:
                if dot(a, v) + b != f(v):
                    raise NonConvexError(
                        "piece is not the upper envelope on its cell; function is not convex")
            total += cell.volume()
        for (c1, _, _), (c2, _, _) in combinations(pieces, 2):
            inter = from_halfspaces(list(c1.halfspaces) + list(c2.halfspaces), domain.dim)
            if not inter.is_empty and inter.volume() != 0:
                raise GeometryError("cells overlap")
        if total != domain.volume():
            raise GeometryError("cells do not cover the domain")
        return f

    @classmethod
    def from_support(cls, domain: LatticePolytope, points: Sequence[Sequence],
                     values: Sequence) -> PLFunction:
        """Largest convex function below the data ``(point, value)`` (lower hull)."""
        lifted = [tuple(as_vec(p)) + (as_fraction(y),) for p, y in zip(points, values)]
        H = hull(lifted)
        shadow = hull([p for p in (tuple(as_vec(q)) for q in points)], dim=domain.dim)
        if not all(shadow.contains(v) for v in domain.vertices):
            raise GeometryError("support points must surround the domain")
        if not H.is_full_dimensional:
            # data lie on one hyperplane: the function is affine
            (nrm, off), = H.equations
            s = nrm[-1]
            if s == 0:
                raise GeometryError("support points are degenerate")
            return cls(domain, [(tuple(Fraction(-w, s) for w in nrm[:-1]), off / s)])
        forms = []
        for nrm, off in H.halfspaces:
            s = nrm[-1]
            if s > 0:
                forms.append((tuple(Fraction(-w, s) for w in nrm[:-1]), off / s))
        return cls(domain, forms)

    def __call__(self, u) -> Fraction:
        u = as_vec(u)
        return max(dot(a, u) + b for a, b in self.forms)

    def __repr__(self):
        return f"PLFunction(forms={[(tuple(map(str, a)), str(b)) for a, b in self.forms]})"

    def shifted(self, c) -> PLFunction:
        c = as_fraction(c)
        return PLFunction(self.domain, [(a, b + c) for a, b in self.forms])

    def cells(self) -> list[tuple[int, LatticePolytope]]:
        """Maximal linearity cells (full-dimensional ones only) with their form index."""
        if self._cells is None:
            out = []
            P = self.domain
            if len(self.forms) > 1 and P.is_full_dimensional:
                self._cells = self._cells_from_epigraph()
                return self._cells
            for i, (a, b) in enumerate(self.forms):
                if len(self.forms) == 1:
                    out.append((i, P))
                    continue
                hs = list(P.halfspaces) + list(P.equations)
                for j, (a2, b2) in enumerate(self.forms):
                    if j != i:
                        hs.append((tuple(x - y for x, y in zip(a, a2)), b2 - b))
                cell = from_halfspaces(hs, P.dim)
                if cell.is_full_dimensional:
                    out.append((i, cell))
            self._cells = out
        return self._cells

    def _cells_from_epigraph(self) -> list[tuple[int, LatticePolytope]]:
        # lower facets of the truncated epigraph project onto the linearity cells
        P, n = self.domain, self.domain.dim
        top = self.max() + 1
        hs = [(tuple(nrm) + (0,), off) for nrm, off in P.halfspaces]
        hs += [(tuple(-x for x in a) + (1,), b) for a, b in self.forms]
        hs.append(((0,) * n + (-1,), -top))
        z = P.barycenter()
        E = from_halfspaces(hs, n + 1, interior=tuple(z) + ((self(z) + top) / 2,))
        index = {a: i for i, (a, _) in enumerate(self.forms)}
        out = []
        for nrm, off in E.halfspaces:
            s = nrm[-1]
            if s <= 0:
                continue
            a = tuple(Fraction(-w, s) for w in nrm[:-1])
            pts = [v[:-1] for v in E.vertices if dot(nrm, v) == off]
            out.append((index[a], hull(pts, dim=n)))
        return sorted(out, key=lambda item: item[0])

    def active_forms(self) -> list[Affine]:
        return [self.forms[i] for i, _ in self.cells()]

    def max(self) -> Fraction:
        # convex: attained at a vertex of the domain
        return max(self(v) for v in self.domain.vertices)

    def min(self) -> Fraction:
        return min(self(v) for _, cell in self.cells() for v in cell.vertices)

    def is_constant(self) -> bool:
        return self.max() == self.min()

    def integral(self) -> Fraction:
        """Exact integral over the domain, cell by cell via barycenters."""
        total = Fraction(0)
        for i, cell in self.cells():
            a, b = self.forms[i]
            total += cell.volume() * (dot(a, cell.barycenter()) + b)
        return total

    def mean(self) -> Fraction:
        return self.integral() / self.domain.volume()
