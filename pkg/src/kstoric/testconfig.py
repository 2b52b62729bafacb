"""Toric test configurations and their non-Archimedean invariants.

A convex rational piecewise-linear ``f`` on ``P`` with ``min f = 0`` and a
ceiling ``M > max f`` give the polytope

    Q = {(u, t) : u in P, 0 <= t <= M - f(u)}

one dimension up.  The bottom facet ``t = 0`` is the trivial fiber; the
facets on the roof ``t = M - f`` are the components of the central fiber,
with multiplicity the absolute last coordinate of their primitive normal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial, floor
from typing import Mapping, Sequence

from .invariants import Verdict, delta_toric, is_anticanonically_polarized, min_pairing
from .ratgeom import (
    GeometryError,
    LatticePolytope,
    PLFunction,
    from_halfspaces,
    interpolate,
    minkowski_combination,
    minkowski_sum,
    mixed_volume,
)
from .ratgeom.functions import poly_eval
from .ratgeom.linalg import as_fraction, as_vec, common_denominator, dot
from .toric import (
    PolarizedToricPair,
    TDivisor,
    degree,
    intersection_number,
    is_nef,
    slope,
)

BOTTOM, VERTICAL, TOP = "bottom", "vertical", "top"


@dataclass(frozen=True)
class FacetInfo:
    index: int            # position in Q.halfspaces
    kind: str             # bottom / vertical / top
    ray: int | None       # ray index of the base for vertical facets
    form: int | None      # index into f.forms for top facets
    multiplicity: int     # |last coordinate of the primitive normal|
    lattice_volume: Fraction


@dataclass(frozen=True)
class ToricTestConfig:
    base: PolarizedToricPair
    f: PLFunction
    M: Fraction
    Q: LatticePolytope
    normalized: bool = False

    @property
    def n(self) -> int:
        return self.base.n

    @cached_property
    def facets(self) -> tuple[FacetInfo, ...]:
        return _classify(self)

    def roof(self, u) -> Fraction:
        return self.M - self.f(u)


def build(base: PolarizedToricPair, f: PLFunction, M) -> ToricTestConfig:
    """Test configuration polytope of ``f`` under the ceiling ``M``.

    A function with ``min f != 0`` is shifted (together with ``M``) and the
    result is flagged ``normalized``.
    """
    if f.domain != base.P:
        raise GeometryError("f must be defined on the moment polytope of the pair")
    M = as_fraction(M)
    lo = f.min()
    normalized = lo != 0
    if normalized:
        f, M = f.shifted(-lo), M - lo
    if M <= f.max():
        raise GeometryError(
            f"ceiling {M} does not exceed max f = {f.max()}: the fiber at infinity degenerates")
    P = base.P
    n = P.dim
    hs = [(tuple(a) + (0,), o) for a, o in P.halfspaces]
    hs.append(((0,) * n + (1,), Fraction(0)))
    for a, b in f.active_forms():
        hs.append((tuple(-x for x in a) + (-1,), b - M))
    center = tuple(sum(c) / len(P.vertices) for c in zip(*P.vertices))
    interior = center + ((M - f(center)) / 2,)
    Q = from_halfspaces(hs, n + 1, interior=interior)
    tc = ToricTestConfig(base, f, M, Q, normalized)
    tc.facets  # classify now so malformed input fails at construction
    return tc


def _classify(tc: ToricTestConfig) -> tuple[FacetInfo, ...]:
    X, Q, n = tc.base, tc.Q, tc.n
    forms = {a: i for i, (a, _) in enumerate(tc.f.forms)}
    out = []
    for i, (nrm, _) in enumerate(Q.halfspaces):
        last = nrm[-1]
        vol = Q.facet_lattice_volume(i)
        if last == 0:
            out.append(FacetInfo(i, VERTICAL, X.ray_index(nrm[:-1]), None, 0, vol))
        elif last > 0:
            if any(nrm[:-1]) or last != 1:
                raise GeometryError("unexpected lower facet in Q")
            out.append(FacetInfo(i, BOTTOM, None, None, 1, vol))
        else:
            a = tuple(Fraction(x, last) for x in nrm[:-1])
            out.append(FacetInfo(i, TOP, None, forms[a], -last, vol))
    kinds = [F.kind for F in out]
    if kinds.count(BOTTOM) != 1:
        raise GeometryError("Q must have exactly one bottom facet")
    if sorted(F.ray for F in out if F.kind == VERTICAL) != list(range(len(X.rays))):
        raise GeometryError("vertical facets of Q do not match the facets of P")
    if len([F for F in out if F.kind == TOP]) != len(tc.f.cells()):
        raise GeometryError("top facets of Q do not match the linearity cells of f")
    return tuple(out)


def trivial(base: PolarizedToricPair, M=1) -> ToricTestConfig:
    return build(base, PLFunction.constant(base.P), M)


def is_trivial(tc: ToricTestConfig) -> bool:
    return tc.f.is_constant()


def with_ceiling(tc: ToricTestConfig, M) -> ToricTestConfig:
    return build(tc.base, tc.f, M)


# ---------------------------------------------------------------------------
# J^NA
# ---------------------------------------------------------------------------

def jna(tc: ToricTestConfig) -> Fraction:
    """``J = (n+1)! V(Q, P x 0, ..., P x 0)/(L^n) - vol(Q)/vol(P)``."""
    n = tc.n
    P0 = tc.base.P.lift(0)
    first = factorial(n + 1) * mixed_volume([tc.Q] + [P0] * n) / degree(tc.base)
    return first - tc.Q.volume() / tc.base.P.volume()


def jna_by_interpolation(tc: ToricTestConfig) -> Fraction:
    """Same quantity, reading ``V(Q, P0^n)`` off the polynomial ``s -> vol(Q + s P0)``."""
    n = tc.n
    P0 = tc.base.P.lift(0)
    ss = list(range(n + 2))
    vols = [tc.Q.volume() if s == 0 else minkowski_combination([(1, tc.Q), (s, P0)]).volume()
            for s in ss]
    coeffs = interpolate(ss, vols) + (Fraction(0),) * (n + 2)
    # coefficient of s^n is (n+1) V(Q, P0, ..., P0)
    mixed = coeffs[n] / (n + 1)
    return factorial(n + 1) * mixed / degree(tc.base) - tc.Q.volume() / tc.base.P.volume()


def jna_max_minus_mean(tc: ToricTestConfig) -> Fraction:
    """``max g - mean g`` for the roof ``g = M - f``, by integrating ``f`` over its cells."""
    return tc.M - tc.f.min() - (tc.M - tc.f.mean())


# ---------------------------------------------------------------------------
# Donaldson-Futaki invariant
# ---------------------------------------------------------------------------
# the inequality checks below use the roof-mean route for J: exact and far
# cheaper than mixed volumes in dimension n + 1

def df(tc: ToricTestConfig, boundary: TDivisor | Sequence | None = None) -> Fraction:
    """Log Donaldson-Futaki invariant by the facet formula.

    ``boundary`` overrides the pair's coefficients and may hold any
    rationals (used for ``Delta + N``).
    """
    X, n = tc.base, tc.n
    c = X.boundary if boundary is None else as_vec(
        boundary.coeffs if isinstance(boundary, TDivisor) else boundary)
    if len(c) != len(X.rays):
        raise ValueError("boundary has the wrong length")
    facet_sum = Fraction(0)
    for F in tc.facets:
        if F.kind == VERTICAL:
            facet_sum += (c[F.ray] - 1) * F.lattice_volume
        elif F.kind == TOP:
            facet_sum += (F.multiplicity - 1) * F.lattice_volume
    mu = slope(X, TDivisor([x - 1 for x in c]))
    top = factorial(n) * facet_sum
    volume_term = Fraction(n, n + 1) * mu * factorial(n + 1) * tc.Q.volume()
    return (top - volume_term) / degree(X)


@dataclass(frozen=True)
class OracleResult:
    value: Fraction
    residual: Fraction
    ks: tuple[int, ...]


def df_weight_oracle(tc: ToricTestConfig, k_max: int = 40) -> OracleResult:
    """``DF`` from the large-``k`` expansion of total weights (``Delta = 0`` only).

    For ``k`` a multiple of the denominator of ``Q``, the section count
    ``N_k = #(kP)`` and the weight ``w_k = sum_u floor(k g(u/k))`` are exact
    polynomials in ``k``.  Writing ``w_k/(k N_k) = a0 + a1/k + ...`` gives
    ``DF = -2 a1``.  Samples beyond the ones needed for the fit are used as a
    residual check.
    """
    X, n = tc.base, tc.n
    if any(X.boundary):
        raise ValueError("the weight oracle only handles Delta = 0")
    D = common_denominator(x for v in tc.Q.vertices for x in v)
    ks = [k for k in range(D, k_max + 1, D)]
    if len(ks) < n + 2:
        raise ValueError(f"k_max = {k_max} gives {len(ks)} samples; need {n + 2}")
    forms = tc.f.forms
    Ns, ws = [], []
    for k in ks:
        pts = X.P.lattice_points(k)
        Ns.append(len(pts))
        kM = k * tc.M
        ws.append(sum(floor(kM - max(dot(a, u) + k * b for a, b in forms)) for u in pts))
    fit = n + 2
    Np = interpolate(ks[:fit], Ns[:fit]) + (Fraction(0),) * (n + 2)
    wp = interpolate(ks[:fit], ws[:fit]) + (Fraction(0),) * (n + 2)
    residual = Fraction(0)
    for k, N, w in zip(ks[fit:], Ns[fit:], ws[fit:]):
        residual = max(residual, abs(poly_eval(Np, k) - N), abs(poly_eval(wp, k) - w))
    e_n, e_n1 = Np[n], Np[n - 1]
    c_n1, c_n = wp[n + 1], wp[n]
    a1 = (c_n * e_n - c_n1 * e_n1) / (e_n * e_n)
    return OracleResult(-2 * a1, residual, tuple(ks))


# ---------------------------------------------------------------------------
# inequality checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityRecord:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def perturb_check(tc: ToricTestConfig, N: TDivisor) -> InequalityRecord:
    """``n mu_N(L) J >= DF_{Delta+N} - DF_Delta`` for effective nef ``N``."""
    X = tc.base
    if not N.is_effective():
        raise ValueError("N must be effective")
    if not is_nef(X, N):
        raise ValueError("N must be nef")
    lhs = tc.n * slope(X, N) * jna_max_minus_mean(tc)
    rhs = df(tc, X.Delta + N) - df(tc)
    return InequalityRecord(lhs, rhs, lhs >= rhs)


def curve_check(tc: ToricTestConfig, mu_A=None) -> InequalityRecord:
    """``DF_Delta >= (1 - mu_A(L)) J`` on curves; ``mu_A`` defaults to ``1 - mu_{K+Delta}(L)``."""
    X = tc.base
    if tc.n != 1:
        raise ValueError("the curve check is for one-dimensional pairs")
    if mu_A is None:
        mu_A = 1 - slope(X, X.K + X.Delta)
    lhs = df(tc)
    rhs = (1 - as_fraction(mu_A)) * jna_max_minus_mean(tc)
    return InequalityRecord(lhs, rhs, lhs >= rhs)


@dataclass(frozen=True)
class TechnicalRecord:
    verdict: Verdict
    epsilon: Fraction | None
    df: Fraction | None
    bound: Fraction | None
    holds: bool | None


def technical_bound_check(tc: ToricTestConfig, delta: Fraction | None = None) -> TechnicalRecord:
    """``DF >= eps/(n+1) J`` with ``eps = 1 - 1/delta`` when ``delta >= 1``."""
    X = tc.base
    if not (X.is_klt and is_anticanonically_polarized(X)):
        raise ValueError("needs a log Fano pair polarized by -(K + Delta)")
    if delta is None:
        delta = delta_toric(X).value
    if delta < 1:
        return TechnicalRecord(Verdict.NOT_APPLICABLE, None, None, None, None)
    eps = 1 - 1 / delta
    d = df(tc)
    bound = eps / (tc.n + 1) * jna_max_minus_mean(tc)
    return TechnicalRecord(Verdict.SEMISTABLE if eps == 0 else Verdict.UNIFORM,
                           eps, d, bound, d >= bound)


# ---------------------------------------------------------------------------
# destabilizing configurations from divisorial valuations
# ---------------------------------------------------------------------------

def destabilizer_from_ray(X: PolarizedToricPair, v: Sequence, c) -> ToricTestConfig:
    """Test configuration of ``f(u) = max(0, c - (<u, v> - m(v)))``."""
    c = as_fraction(c)
    if c <= 0:
        raise ValueError("c must be positive")
    v = as_vec(v)
    m = min_pairing(X, v)
    f = PLFunction(X.P, [((0,) * X.n, 0), (tuple(-x for x in v), c + m)])
    return build(X, f, f.max() + 1)


def ray_width(X: PolarizedToricPair, v: Sequence) -> Fraction:
    """``max_P <., v> - min_P <., v>``: beyond this ``c`` the destabilizer is affine."""
    vals = [dot(v, u) for u in X.P.vertices]
    return max(vals) - min(vals)


def destabilizer_scan(X: PolarizedToricPair, v: Sequence, c_max=2, steps: int = 20
                      ) -> list[tuple[Fraction, Fraction]]:
    """``(c, DF)`` on the grid ``c = c_max * j / steps``, ``j = 1..steps``."""
    c_max = as_fraction(c_max)
    return [(c_max * j / steps, df(destabilizer_from_ray(X, v, c_max * j / steps)))
            for j in range(1, steps + 1)]


# ---------------------------------------------------------------------------
# negativity on the graph of the test configuration
# ---------------------------------------------------------------------------

def graph_pair(tc: ToricTestConfig) -> PolarizedToricPair:
    """Toric model dominating both ``Q`` and ``P x 0``: the normal fan of their sum."""
    Y = minkowski_sum(tc.Q, tc.base.P.lift(0))
    return PolarizedToricPair(Y, (Fraction(0),) * len(Y.halfspaces))


def support_divisor(Y: PolarizedToricPair, R: LatticePolytope) -> TDivisor:
    """Divisor ``-sum_r min_R <., v_r> D_r`` of a polytope whose fan ``Y`` refines."""
    return TDivisor([-min(dot(v, p) for p in R.vertices) for v in Y.rays])


def central_components(Y: PolarizedToricPair) -> list[int]:
    """Rays of the graph model lying over ``0`` in ``P^1``."""
    return [i for i, r in enumerate(Y.rays) if r[-1] < 0]


def negativity_check(tc: ToricTestConfig, D: Mapping[int, object] | TDivisor,
                     nefs: Sequence[str | TDivisor]) -> Fraction:
    """``(M_1 ... M_{n-1} . D^2)`` on the graph model.

    ``D`` is given on the graph's rays and must be supported on the central
    fiber; each ``M_i`` is ``"L"`` (the test configuration's polarization),
    ``"P"`` (the pulled-back polarization of ``X``), ``"fiber"`` or a nef
    divisor on the graph.
    """
    Y = graph_pair(tc)
    n = tc.n
    if isinstance(D, Mapping):
        coeffs = [Fraction(0)] * len(Y.rays)
        for i, c in D.items():
            coeffs[i] = as_fraction(c)
        D = TDivisor(coeffs)
    central = set(central_components(Y))
    if any(c and i not in central for i, c in enumerate(D.coeffs)):
        raise ValueError("D is not supported on the central fiber")
    if len(nefs) != n - 1:
        raise ValueError(f"need {n - 1} nef classes")
    named = {
        "L": support_divisor(Y, tc.Q),
        "P": support_divisor(Y, tc.base.P.lift(0)),
        "fiber": TDivisor([1 if r == (0,) * n + (1,) else 0 for r in Y.rays]),
    }
    Ms = []
    for m in nefs:
        M = named[m] if isinstance(m, str) else m
        if not is_nef(Y, M):
            raise ValueError("negativity needs nef classes")
        Ms.append(M)
    return intersection_number(Y, Ms + [D, D])
