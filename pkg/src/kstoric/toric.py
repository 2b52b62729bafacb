"""Polarized toric pairs and their divisors.

A pair is a full-dimensional lattice polytope ``P`` (the polarization), its
inner normal fan, and a boundary coefficient in ``[0, 1]`` for each ray.
Torus-invariant divisors are coefficient vectors indexed by the rays in the
order of ``P.halfspaces``; ``P`` itself corresponds to the divisor with
coefficients ``-offset`` since ``P = {u : <u, v_r> >= offset_r}``.

Intersection numbers are mixed volumes of the section polytopes of nef
divisors; non-nef Cartier divisors are handled by writing them as
``(D + mL) - mL`` with the smallest ``m`` that makes ``D + mL`` nef.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from math import factorial
from typing import Mapping, Sequence

from .ratgeom import Fan, GeometryError, LatticePolytope, from_halfspaces, hull, normal_fan
from .ratgeom.functions import interpolate, poly_eval
from .ratgeom.linalg import as_fraction, as_vec, dot, solve
from .ratgeom.polytope import lp_optimize


class NotQCartierError(GeometryError):
    """The divisor has no linear support function on some maximal cone."""


@dataclass(frozen=True)
class TDivisor:
    """Torus-invariant Q-divisor: one rational coefficient per ray."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Sequence):
        object.__setattr__(self, "coeffs", as_vec(coeffs))

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __add__(self, other: TDivisor) -> TDivisor:
        self._check(other)
        return TDivisor([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: TDivisor) -> TDivisor:
        self._check(other)
        return TDivisor([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> TDivisor:
        return TDivisor([-a for a in self.coeffs])

    def __mul__(self, k) -> TDivisor:
        k = as_fraction(k)
        return TDivisor([k * a for a in self.coeffs])

    __rmul__ = __mul__

    def _check(self, other):
        if len(other.coeffs) != len(self.coeffs):
            raise ValueError("divisors live on different fans")

    @classmethod
    def zero(cls, k: int) -> TDivisor:
        return cls([0] * k)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_effective(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def __repr__(self):
        return "TDivisor(" + ", ".join(str(c) for c in self.coeffs) + ")"


@dataclass(frozen=True)
class PolarizedToricPair:
    """``((X, Delta), L)`` encoded by a polytope and boundary coefficients."""

    P: LatticePolytope
    boundary: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.P.is_full_dimensional:
            raise GeometryError("moment polytope must be full-dimensional")
        if len(self.boundary) != len(self.P.halfspaces):
            raise ValueError("need one boundary coefficient per facet")
        for c in self.boundary:
            if not 0 <= c <= 1:
                raise ValueError(f"boundary coefficient {c} is outside [0, 1]")

    @property
    def n(self) -> int:
        return self.P.dim

    @cached_property
    def fan(self) -> Fan:
        return normal_fan(self.P)

    @property
    def rays(self) -> tuple[tuple[int, ...], ...]:
        return self.fan.rays

    @cached_property
    def L(self) -> TDivisor:
        return TDivisor([-o for _, o in self.P.halfspaces])

    @property
    def Delta(self) -> TDivisor:
        return TDivisor(self.boundary)

    @property
    def K(self) -> TDivisor:
        return canonical_divisor(self)

    def ray_index(self, ray: Sequence[int]) -> int:
        try:
            return self.fan.ray_index(ray)
        except ValueError:
            raise GeometryError(f"{tuple(ray)} is not a ray of the fan") from None

    def divisor(self, coeffs: Mapping | Sequence) -> TDivisor:
        """Divisor from a ``{ray: coefficient}`` map (missing rays get 0) or a full vector."""
        if isinstance(coeffs, Mapping):
            out = [Fraction(0)] * len(self.rays)
            for ray, c in coeffs.items():
                out[self.ray_index(ray)] = as_fraction(c)
            return TDivisor(out)
        if len(coeffs) != len(self.rays):
            raise ValueError("coefficient vector has the wrong length")
        return TDivisor(coeffs)

    def prime(self, ray: Sequence[int]) -> TDivisor:
        return self.divisor({tuple(ray): 1})

    def with_boundary(self, boundary: Sequence) -> PolarizedToricPair:
        return PolarizedToricPair(self.P, as_vec(boundary))

    def with_polarization(self, D: TDivisor) -> PolarizedToricPair:
        """Same ``(X, Delta)`` polarized by another ample divisor."""
        if not is_ample(self, D):
            raise GeometryError("new polarization is not ample")
        return PolarizedToricPair(divisor_polytope(self, D), self.boundary)

    @property
    def is_klt(self) -> bool:
        return all(c < 1 for c in self.boundary)

    @property
    def is_lc(self) -> bool:
        return all(c <= 1 for c in self.boundary)


def pair_from_data(vertices: Sequence | None = None, halfspaces: Sequence | None = None,
                   boundary: Mapping | Sequence | None = None, dim: int | None = None
                   ) -> PolarizedToricPair:
    """Validated pair from vertex or half-space data plus boundary coefficients."""
    if (vertices is None) == (halfspaces is None):
        raise ValueError("give exactly one of vertices or halfspaces")
    if vertices is not None:
        P = hull(vertices)
    else:
        halfspaces = [(as_vec(a), as_fraction(b)) for a, b in halfspaces]
        d = dim if dim is not None else len(halfspaces[0][0])
        # bounded iff the normals positively span: 0 strictly inside their hull
        normals = hull([a for a, _ in halfspaces], dim=d)
        if not (normals.is_full_dimensional and all(o < 0 for _, o in normals.halfspaces)):
            raise GeometryError("half-spaces do not bound a polytope")
        P = from_halfspaces(halfspaces, d)
    if P.is_empty or not P.is_full_dimensional:
        raise GeometryError("polytope is empty or not full-dimensional")
    X = PolarizedToricPair(P, (Fraction(0),) * len(P.halfspaces))
    if boundary is None:
        return X
    if isinstance(boundary, Mapping):
        return X.with_boundary(X.divisor(boundary).coeffs)
    return X.with_boundary(boundary)


def canonical_divisor(X: PolarizedToricPair) -> TDivisor:
    return TDivisor([-1] * len(X.rays))


def log_canonical_divisor(X: PolarizedToricPair) -> TDivisor:
    """``K + Delta``."""
    return TDivisor([c - 1 for c in X.boundary])


# ---------------------------------------------------------------------------
# support functions and positivity
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8192)
def cone_characters(X: PolarizedToricPair, D: TDivisor) -> tuple[tuple[Fraction, ...], ...]:
    """For each maximal cone, the ``m`` with ``<m, v_r> = -d_r`` on its rays."""
    out = []
    for cone in X.fan.cones:
        idx = sorted(cone)
        m = solve([X.rays[i] for i in idx], [-D[i] for i in idx])
        if m is None:
            raise NotQCartierError("divisor is not Q-Cartier")
        out.append(m)
    return tuple(out)


def is_q_cartier(X: PolarizedToricPair, D: TDivisor) -> bool:
    try:
        cone_characters(X, D)
    except NotQCartierError:
        return False
    return True


def _wall_values(X, D):
    """``<m_cone, v_r> + d_r`` for every cone and every ray outside it."""
    chars = cone_characters(X, D)
    for k, cone in enumerate(X.fan.cones):
        for r, ray in enumerate(X.rays):
            if r not in cone:
                yield k, r, dot(chars[k], ray) + D[r]


def is_nef(X: PolarizedToricPair, D: TDivisor) -> bool:
    if not is_q_cartier(X, D):
        return False
    return all(val >= 0 for _, _, val in _wall_values(X, D))


def is_ample(X: PolarizedToricPair, D: TDivisor) -> bool:
    if not is_q_cartier(X, D):
        return False
    return all(val > 0 for _, _, val in _wall_values(X, D))


def nef_shift(X: PolarizedToricPair, D: TDivisor) -> Fraction:
    """Smallest ``m >= 0`` with ``D + mL`` nef (exact one-variable LP)."""
    beta = {(k, r): val for k, r, val in _wall_values(X, X.L)}
    m = Fraction(0)
    for k, r, alpha in _wall_values(X, D):
        if alpha < 0:
            m = max(m, -alpha / beta[(k, r)])
    return m


def divisor_polytope(X: PolarizedToricPair, D: TDivisor) -> LatticePolytope:
    """``{u : <u, v_r> >= -d_r}``, possibly empty or degenerate."""
    if is_nef(X, D):
        return hull(cone_characters(X, D), dim=X.n)
    return from_halfspaces([(ray, -d) for ray, d in zip(X.rays, D.coeffs)], X.n)


# ---------------------------------------------------------------------------
# intersection theory
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8192)
def _nef_volume(X: PolarizedToricPair, D: TDivisor) -> Fraction:
    return hull(cone_characters(X, D), dim=X.n).volume()


def _nef_product(X, nefs: Sequence[TDivisor]) -> Fraction:
    # polarization: (D_1...D_n) = sum_S (-1)^{n-|S|} vol(P_{D_S})
    n = X.n
    total = Fraction(0)
    for k in range(1, n + 1):
        sign = -1 if (n - k) % 2 else 1
        for S in combinations(range(n), k):
            D = nefs[S[0]]
            for i in S[1:]:
                D = D + nefs[i]
            total += sign * _nef_volume(X, D)
    return total


def _cartier_product(X, divisors):
    shifts = [nef_shift(X, D) for D in divisors]
    total = Fraction(0)
    n = X.n
    # expand each D_i = (D_i + m_i L) - m_i L multilinearly
    for mask in range(1 << n):
        coeff = Fraction(1)
        entries = []
        for i in range(n):
            if mask >> i & 1:
                if shifts[i] == 0:
                    break
                coeff *= -shifts[i]
                entries.append(X.L)
            else:
                entries.append(divisors[i] + shifts[i] * X.L)
        else:
            total += coeff * _nef_product(X, entries)
    return total


def _ample_power_against_weil(X, A: TDivisor, W: TDivisor) -> Fraction:
    # (A^{n-1} . W) = (n-1)! sum_r w_r latvol(facet_r(P_A)) for ample A
    PA = divisor_polytope(X, A)
    total = Fraction(0)
    for r, ray in enumerate(X.rays):
        if W[r]:
            total += W[r] * PA.facet_lattice_volume(PA.facet_index(ray))
    return factorial(X.n - 1) * total


def power_against_weil(X: PolarizedToricPair, A: TDivisor, W: TDivisor) -> Fraction:
    """``(A^{n-1} . W)`` for Q-Cartier ``A`` and an arbitrary Weil divisor ``W``."""
    n = X.n
    if n == 1:
        return sum(W.coeffs, Fraction(0))
    if is_ample(X, A):
        return _ample_power_against_weil(X, A, W)
    # polynomial in t of degree n-1, known where A + tL is ample
    t0 = nef_shift(X, A) + 1
    ts = [t0 + j for j in range(n)]
    ys = [_ample_power_against_weil(X, A + t * X.L, W) for t in ts]
    return poly_eval(interpolate(ts, ys), 0)


def intersection_number(X: PolarizedToricPair, divisors: Sequence[TDivisor]) -> Fraction:
    """``(D_1 ... D_n)``.

    All entries may be arbitrary Q-Cartier divisors; at most one entry may
    fail to be Q-Cartier, in which case it is paired against the others
    through facet volumes.
    """
    divisors = list(divisors)
    n = X.n
    if len(divisors) != n:
        raise ValueError(f"need exactly {n} divisors")
    weil = [i for i, D in enumerate(divisors) if not is_q_cartier(X, D)]
    if not weil:
        return _cartier_product(X, divisors)
    if len(weil) > 1:
        raise NotQCartierError("at most one non-Q-Cartier divisor per product")
    W = divisors.pop(weil[0])
    # polarize the remaining n-1 Cartier entries
    m = n - 1
    total = Fraction(0)
    for k in range(1, m + 1):
        sign = -1 if (m - k) % 2 else 1
        for S in combinations(range(m), k):
            A = divisors[S[0]]
            for i in S[1:]:
                A = A + divisors[i]
            total += sign * power_against_weil(X, A, W)
    if m == 0:
        return sum(W.coeffs, Fraction(0))
    return total / factorial(m)


def degree(X: PolarizedToricPair) -> Fraction:
    """``(L^n) = n! vol(P)``."""
    return factorial(X.n) * X.P.volume()


def slope(X: PolarizedToricPair, D: TDivisor, L: TDivisor | None = None) -> Fraction:
    """``mu_D(L) = (L^{n-1} . D) / (L^n)``."""
    if L is None:
        L = X.L
    if not is_ample(X, L):
        raise GeometryError("slope needs an ample polarization")
    return power_against_weil(X, L, D) / intersection_number(X, [L] * X.n)


# ---------------------------------------------------------------------------
# log discrepancies
# ---------------------------------------------------------------------------

def log_discrepancy(X: PolarizedToricPair, v: Sequence) -> Fraction:
    """Toric log discrepancy: linear on cones, ``1 - c_r`` on ray generators."""
    v = as_vec(v)
    if len(v) != X.n:
        raise ValueError("valuation has the wrong dimension")
    if not any(v):
        return Fraction(0)
    _, vertex = lp_optimize(v, X.P, "min")
    k = X.P.vertices.index(vertex)
    cone = sorted(X.fan.cones[k])
    psi = solve([X.rays[i] for i in cone], [1 - X.boundary[i] for i in cone])
    if psi is None:
        raise NotQCartierError("K + Delta is not Q-Cartier on the cone containing v")
    return dot(psi, v)


# ---------------------------------------------------------------------------
# cone decomposition of a perturbed polarization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """``L + xi = scale * (L + sign * residual)`` with ``residual`` nef."""

    scale: Fraction
    sign: int
    residual: TDivisor
    residual_coords: tuple[Fraction, ...]
    residual_norm: Fraction


@dataclass(frozen=True)
class ConeSplit:
    weights: tuple[Fraction, ...]
    xi_coords: tuple[Fraction, ...]
    t0: Fraction
    xi_norm: Fraction
    minus: Decomposition
    plus: Decomposition
    epsilon: Fraction | None
    radius: Fraction | None


def split_radius(t0, epsilon) -> Fraction:
    """Largest ``||xi||`` whose residuals have norm at most ``epsilon``."""
    t0, epsilon = as_fraction(t0), as_fraction(epsilon)
    if t0 <= 0 or epsilon <= 0:
        raise ValueError("t0 and epsilon must be positive")
    return epsilon * t0 / (1 + t0 + epsilon)


def class_coordinates(X: PolarizedToricPair, D: TDivisor, basis: Sequence[TDivisor]
                      ) -> tuple[Fraction, ...] | None:
    """Coordinates of the class of ``D`` in ``basis`` modulo principal divisors."""
    k, n = len(basis), X.n
    rows = []
    for r, ray in enumerate(X.rays):
        rows.append([b[r] for b in basis] + [Fraction(ray[j]) for j in range(n)])
    sol = solve(rows, D.coeffs)
    return None if sol is None else sol[:k]


def cone_split(X: PolarizedToricPair, L: TDivisor, xi: TDivisor,
               nef_basis: Sequence[TDivisor], epsilon=None) -> ConeSplit:
    nef_basis = list(nef_basis)
    if not nef_basis:
        raise ValueError("empty basis")
    for b in nef_basis:
        if not is_nef(X, b):
            raise GeometryError("basis element is not nef")
    t = class_coordinates(X, L, nef_basis)
    if t is None:
        raise GeometryError("L is not a unique combination of the basis classes")
    if any(x <= 0 for x in t) or sum(t) != 1:
        raise ValueError("L must have positive basis weights summing to 1")
    x = class_coordinates(X, xi, nef_basis)
    if x is None:
        raise GeometryError("xi is not in the span of the basis")
    t0 = min(t)
    norm = sum(abs(c) for c in x)
    if norm >= t0:
        raise ValueError(f"||xi|| = {norm} is not below t0 = {t0}")
    s = norm / t0

    def combine(coords):
        D = TDivisor.zero(len(X.rays))
        for c, b in zip(coords, nef_basis):
            D = D + c * b
        return D

    parts = []
    for sign in (-1, 1):
        coords = tuple((s * ti + sign * xv) / (1 - sign * s) for ti, xv in zip(t, x))
        parts.append(Decomposition(1 - sign * s, sign, combine(coords), coords, sum(coords)))
    radius = split_radius(t0, epsilon) if epsilon is not None else None
    return ConeSplit(tuple(t), tuple(x), t0, norm, parts[0], parts[1],
                     None if epsilon is None else as_fraction(epsilon), radius)
