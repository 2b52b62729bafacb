"""Valuative invariants of toric pairs and the explicit stability thresholds.

For a toric valuation ``v`` the volume of ``L - xF_v`` is ``n!`` times the
volume of the slice ``{u in P : <u, v> >= m(v) + x}`` where
``m(v) = min_P <., v>``.  Everything below follows from that and from the
piecewise-linear log discrepancy in :mod:`kstoric.toric`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Sequence

from .ratgeom import PiecewisePolynomial, interpolate, slice_polytope
from .ratgeom.linalg import as_fraction, as_vec, common_denominator, dot, integer_nth_root_floor
from .ratgeom.polytope import GeometryError, lattice_point_count, lp_optimize
from .toric import (
    PolarizedToricPair,
    TDivisor,
    class_coordinates,
    degree,
    is_ample,
    is_nef,
    log_canonical_divisor,
    log_discrepancy,
    slope,
)


class Verdict(str, Enum):
    UNIFORM = "Uniform"
    SEMISTABLE = "Semistable"
    INCONCLUSIVE = "Inconclusive"
    NOT_APPLICABLE = "NotApplicable"


class InconsistencyError(ArithmeticError):
    """Two exact routes to the same quantity disagreed."""


def _check_direction(X: PolarizedToricPair, v) -> tuple[Fraction, ...]:
    v = as_vec(v)
    if len(v) != X.n:
        raise ValueError("valuation has the wrong dimension")
    if not any(v):
        raise ValueError("the zero vector is not a divisorial valuation")
    return v


def min_pairing(X: PolarizedToricPair, v) -> Fraction:
    return lp_optimize(v, X.P, "min")[0]


# ---------------------------------------------------------------------------
# volume curves and S-values
# ---------------------------------------------------------------------------

def vol_curve(X: PolarizedToricPair, v: Sequence) -> PiecewisePolynomial:
    """``x -> vol(L - x F_v)`` as an exact piecewise polynomial on ``[0, inf)``."""
    v = _check_direction(X, v)
    n = X.n
    m = min_pairing(X, v)
    levels = sorted({dot(p, v) - m for p in X.P.vertices})
    scale = factorial(n)
    polys = []
    for a, b in zip(levels, levels[1:]):
        xs = [a + (b - a) * Fraction(j, n) for j in range(n + 1)]
        ys = [scale * slice_polytope(X.P, v, m + x).volume() for x in xs]
        polys.append(interpolate(xs, ys))
    return PiecewisePolynomial(tuple(levels), tuple(polys))


def s_value_closed_form(X: PolarizedToricPair, v: Sequence) -> Fraction:
    """``<barycenter(P), v> - m(v)``."""
    v = _check_direction(X, v)
    return dot(X.P.barycenter(), v) - min_pairing(X, v)


def s_value_by_integration(X: PolarizedToricPair, v: Sequence) -> Fraction:
    return vol_curve(X, v).integral() / degree(X)


def s_value(X: PolarizedToricPair, v: Sequence) -> Fraction:
    """``S(v) = (1/(L^n)) int_0^inf vol(L - x F_v) dx``, checked against the barycenter."""
    s = s_value_closed_form(X, v)
    integral = s_value_by_integration(X, v)
    if integral != s:
        raise InconsistencyError(f"S-value routes disagree: {integral} vs {s}")
    return s


def _fit_leading(ks, values, deg):
    coeffs = interpolate(ks, values)
    if len(coeffs) > deg + 1:
        raise InconsistencyError("lattice counts are not polynomial of the expected degree")
    return coeffs[deg] if len(coeffs) > deg else Fraction(0)


def s_value_lattice_oracle(X: PolarizedToricPair, v: Sequence) -> Fraction:
    """S-value from lattice-point counts alone.

    With ``k`` a multiple of the denominators of ``P`` and ``m(v)``, the sum
    ``W(k) = sum_{u in kP} (<u, v> - k m(v))`` and the count ``N(k) = #kP`` are
    polynomials in ``k``; their leading coefficients have ratio ``S(v)``.
    """
    v = _check_direction(X, v)
    if any(x.denominator != 1 for x in v):
        raise ValueError("the lattice oracle needs an integral valuation")
    n = X.n
    m = min_pairing(X, v)
    D = common_denominator([x for p in X.P.vertices for x in p] + [m])
    ks, N, W = [], [], []
    for j in range(1, n + 3):
        k = D * j
        pts = X.P.lattice_points(k)
        ks.append(k)
        N.append(len(pts))
        W.append(sum(dot(u, v) for u in pts) - k * m * len(pts))
    return _fit_leading(ks, W, n + 1) / _fit_leading(ks, N, n)


def vol_curve_lattice_oracle(X: PolarizedToricPair, v: Sequence, x) -> Fraction:
    """``vol(L - x F_v)`` from the Ehrhart leading coefficient of the sliced polytope."""
    v = _check_direction(X, v)
    x = as_fraction(x)
    n = X.n
    m = min_pairing(X, v)
    S = slice_polytope(X.P, v, m + x)
    if S.is_empty:
        return Fraction(0)
    D = common_denominator(c for p in S.vertices for c in p)
    ks = [D * j for j in range(1, n + 2)]
    counts = [lattice_point_count(S, k) for k in ks]
    return factorial(n) * _fit_leading(ks, counts, n)


# ---------------------------------------------------------------------------
# beta and delta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValuativeRecord:
    v: tuple[Fraction, ...]
    A: Fraction
    S: Fraction
    beta_hat: Fraction
    ratio: Fraction


def beta_hat(X: PolarizedToricPair, v: Sequence) -> Fraction:
    A = log_discrepancy(X, _check_direction(X, v))
    if A <= 0:
        raise ValueError(f"log discrepancy {A} is not positive along {tuple(v)}")
    return 1 - s_value_closed_form(X, v) / A


def valuative_record(X: PolarizedToricPair, v: Sequence) -> ValuativeRecord:
    v = _check_direction(X, v)
    A = log_discrepancy(X, v)
    S = s_value_closed_form(X, v)
    if A <= 0:
        raise ValueError(f"log discrepancy {A} is not positive along {tuple(v)}")
    return ValuativeRecord(v, A, S, 1 - S / A, A / S)


def is_anticanonically_polarized(X: PolarizedToricPair) -> bool:
    """Whether ``L`` is linearly equivalent to ``-(K + Delta)``."""
    diff = X.L + log_canonical_divisor(X)
    # diff is principal iff diff_r = <u, v_r> for a single u
    return class_coordinates(X, diff, []) is not None


@dataclass(frozen=True)
class DeltaResult:
    value: Fraction
    ray: tuple[int, ...]
    records: tuple[ValuativeRecord, ...]
    anticanonical: bool
    toric_restricted: bool = field(default=True)


def delta_toric(X: PolarizedToricPair) -> DeltaResult:
    """Minimum of ``A/S`` over the rays of the fan.

    Both ``A`` and ``S`` are linear on each cone of the fan, so the ratio
    over toric valuations is minimized on a ray.  The polarization need not
    be anticanonical; the result records whether it is.
    """
    if not X.is_klt:
        raise ValueError("delta needs a klt pair (all boundary coefficients < 1)")
    records = tuple(valuative_record(X, r) for r in X.rays)
    best = min(range(len(records)), key=lambda i: (records[i].ratio, i))
    return DeltaResult(records[best].ratio, X.rays[best], records,
                       is_anticanonically_polarized(X))


# ---------------------------------------------------------------------------
# explicit thresholds
# ---------------------------------------------------------------------------

def _positive(x, name):
    x = as_fraction(x)
    if x <= 0:
        raise ValueError(f"{name} must be positive")
    return x


def alpha_lower_bound(delta, n: int) -> Fraction:
    """``alpha >= delta / (n + 1)``."""
    return _positive(delta, "delta") / (n + 1)


def fano_perturb_nef_radius(delta, delta0, n: int) -> Fraction:
    """``eps0 = (delta - delta0) / (n delta + n + 1)``: boundaries keeping ``delta >= delta0``."""
    delta = _positive(delta, "delta")
    delta0 = _positive(delta0, "delta0")
    if delta0 >= delta:
        raise ValueError("need delta0 < delta")
    return (delta - delta0) / (n * delta + n + 1)


def uniform_neighborhood_radius(delta, n: int) -> Fraction:
    """``(delta - 1)/(n delta + n + 1)``: the boundary radius preserving uniform stability."""
    return fano_perturb_nef_radius(delta, 1, n)


@dataclass(frozen=True)
class RootBound:
    """Rational ``value`` with ``value <= true < value + 2**-precision``."""

    value: Fraction
    precision: int
    exact: bool


def _root_upper(q: Fraction, k: int, precision: int) -> tuple[Fraction, bool]:
    # smallest N / 2^p with (N / 2^p)^k >= q; exact when q is a perfect power
    a, b = q.numerator, q.denominator
    ra, rb = integer_nth_root_floor(a, k), integer_nth_root_floor(b, k)
    if ra ** k == a and rb ** k == b:
        return Fraction(ra, rb), True
    scale = 1 << precision
    target = a * scale ** k
    N = integer_nth_root_floor(target // b, k)
    while N ** k * b < target:
        N += 1
    return Fraction(N, scale), False


def fano_perturb_upper(delta, delta1, n: int, precision: int = 32) -> RootBound:
    """Conservative rational lower bound for ``min{delta/(n+1), 1 - (delta/delta1)^(1/(n+1))}``."""
    delta = _positive(delta, "delta")
    delta1 = _positive(delta1, "delta1")
    if delta >= delta1:
        raise ValueError("need delta < delta1")
    if precision < 1:
        raise ValueError("precision must be a positive number of bits")
    first = delta / (n + 1)
    root, exact = _root_upper(delta / delta1, n + 1, precision)
    second = 1 - root
    if first <= second:
        return RootBound(first, precision, True)
    return RootBound(second, precision, exact)


def fano_polarization_radius(delta, n: int, check: bool = True) -> Fraction:
    """``(delta - 1) / ((n^2+n+1) delta + n^2+n-1)``: polarization radius for uniform stability.

    With ``check=False`` the formula is evaluated for any positive ``delta``;
    the value only means something when ``delta > 1``.
    """
    delta = _positive(delta, "delta")
    if check and delta <= 1:
        raise ValueError("need delta > 1")
    return (delta - 1) / ((n * n + n + 1) * delta + n * n + n - 1)


def uniform_coefficient(delta_param, n: int, mu) -> Fraction:
    """``delta1 - n mu`` with ``delta1 = (d - 1)/((n+1) d)``."""
    d = as_fraction(delta_param)
    if d <= 1:
        raise ValueError("need delta_param > 1")
    return (d - 1) / ((n + 1) * d) - n * as_fraction(mu)


@dataclass(frozen=True)
class CoefficientReport:
    coefficient: Fraction | None
    epsilon: Fraction | None
    hypotheses: dict
    verdict: Verdict


def fano_uniform_coefficient(X: PolarizedToricPair, N: TDivisor, delta_param, delta
                             ) -> CoefficientReport:
    """Coercivity coefficient of ``DF`` over ``J`` for the polarization ``L - N``.

    ``delta`` is supplied by the caller (it need not be the toric minimum).
    Each hypothesis is reported separately; the coefficient is computed
    whenever ``L - N`` is ample.
    """
    n = X.n
    delta, dp = as_fraction(delta), as_fraction(delta_param)
    hyp = {
        "klt": X.is_klt,
        "anticanonical": is_anticanonically_polarized(X),
        "delta_param_in_range": 1 < dp < delta,
        "N_nef": is_nef(X, N),
    }
    eps = None
    if hyp["delta_param_in_range"]:
        eps = (delta - dp) / (n * delta + n + 1)
        hyp["epsL_minus_N_nef"] = is_nef(X, eps * X.L - N)
    else:
        hyp["epsL_minus_N_nef"] = False
    coeff = None
    M = X.L - N
    if is_ample(X, M) and dp > 1:
        coeff = uniform_coefficient(dp, n, slope(X, N, M))
    ok = all(hyp.values()) and coeff is not None
    if ok and coeff > 0:
        verdict = Verdict.UNIFORM
    elif ok and coeff == 0:
        verdict = Verdict.SEMISTABLE
    else:
        verdict = Verdict.INCONCLUSIVE
    return CoefficientReport(coeff, eps, hyp, verdict)


# ---------------------------------------------------------------------------
# slope criteria
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbstractSlopeData:
    """Numerical data of a (possibly non-toric) polarized pair.

    ``Ln = (L^n)`` and ``LK = (L^{n-1}.(K+Delta))``.  For the slope-radius
    check ``L`` is the polarization ``M = K + Delta + N`` and ``LN`` is
    ``(M^{n-1}.N)``.  Positivity facts that cannot be read off numbers are
    supplied as flags.
    """

    n: int
    Ln: Fraction
    LK: Fraction
    LN: Fraction | None = None
    w_ample: bool = False
    w_nef: bool = False
    k_delta_ample: bool = False
    n_nef: bool = True

    def __post_init__(self):
        for name in ("Ln", "LK", "LN"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, as_fraction(val))
        if self.Ln <= 0:
            raise ValueError("(L^n) must be positive")
        if self.n < 1:
            raise ValueError("dimension must be positive")

    @property
    def mu(self) -> Fraction:
        return self.LK / self.Ln


def w_criterion(data: PolarizedToricPair | AbstractSlopeData, L: TDivisor | None = None,
                Delta: TDivisor | None = None) -> Verdict:
    """Slope criterion: positive ``mu = mu_{K+Delta}(L)`` and positivity of
    ``(n^2/(n^2-1)) mu L - (K + Delta)``."""
    if data.n < 2:
        raise ValueError("the slope criterion needs n >= 2; curves are handled separately")
    n = data.n
    if isinstance(data, AbstractSlopeData):
        mu, ample, nef = data.mu, data.w_ample, data.w_nef
        if mu <= 0:
            return Verdict.INCONCLUSIVE
    else:
        X = data
        L = X.L if L is None else L
        Delta = X.Delta if Delta is None else Delta
        KD = X.K + Delta
        mu = slope(X, KD, L)
        if mu <= 0:
            return Verdict.INCONCLUSIVE
        W = Fraction(n * n, n * n - 1) * mu * L - KD
        ample, nef = is_ample(X, W), is_nef(X, W)
    if ample:
        return Verdict.UNIFORM
    if nef:
        return Verdict.SEMISTABLE
    return Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class MarginReport:
    verdict: Verdict
    margin: Fraction


def gt_radius_check(data: AbstractSlopeData) -> MarginReport:
    """Uniform stability of ``M = K + Delta + N`` from ``mu_N(M) < 1/n^2``."""
    if data.LN is None:
        raise ValueError("LN = (M^{n-1}.N) is required")
    n = data.n
    margin = 1 - n * n * data.LN / data.Ln
    if not (data.k_delta_ample and data.n_nef):
        return MarginReport(Verdict.INCONCLUSIVE, margin)
    if n == 1:
        # curves with ample K + Delta are uniformly stable for every polarization
        return MarginReport(Verdict.UNIFORM, margin)
    return MarginReport(Verdict.UNIFORM if margin > 0 else Verdict.INCONCLUSIVE, margin)
