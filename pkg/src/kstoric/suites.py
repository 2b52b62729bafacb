"""Seeded random instances and the property suites run by ``kstoric verify``.

Every case draws from its own ``random.Random`` seeded by ``(seed, index)``,
so a suite is reproducible from ``(seed, count)`` and cases can run in any
order or in parallel.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Callable

from .invariants import (
    AbstractSlopeData,
    Verdict,
    delta_toric,
    fano_perturb_nef_radius,
    fano_perturb_upper,
    gt_radius_check,
    s_value_by_integration,
    s_value_closed_form,
    s_value_lattice_oracle,
    w_criterion,
)
from .ratgeom import LatticePolytope, PLFunction, hull, minkowski_sum
from .ratgeom.linalg import common_denominator
from .testconfig import (
    ToricTestConfig,
    build,
    central_components,
    destabilizer_scan,
    df,
    df_weight_oracle,
    graph_pair,
    is_trivial,
    jna,
    jna_by_interpolation,
    jna_max_minus_mean,
    negativity_check,
    perturb_check,
    ray_width,
    technical_bound_check,
)
from .toric import (
    NotQCartierError,
    PolarizedToricPair,
    TDivisor,
    class_coordinates,
    cone_split,
    is_ample,
    is_nef,
    log_canonical_divisor,
    pair_from_data,
    slope,
    split_radius,
)

# anticanonical polytopes of some smooth and Gorenstein toric Fano varieties
FANO_BANK: dict[str, list[tuple[int, ...]]] = {
    "P1": [(-1,), (1,)],
    "P2": [(-1, -1), (2, -1), (-1, 2)],
    "P1xP1": [(-1, -1), (1, -1), (-1, 1), (1, 1)],
    "Bl1P2": [(-1, 0), (0, -1), (2, -1), (-1, 2)],
    "Bl2P2": [(-1, 0), (0, -1), (1, -1), (1, 0), (-1, 2)],
    "dP6": [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)],
    "P112": [(-1, -1), (3, -1), (-1, 1)],
    "P3": [(-1, -1, -1), (3, -1, -1), (-1, 3, -1), (-1, -1, 3)],
    "P1xP1xP1": [(a, b, c) for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)],
    "P2xP1": [(x, y, z) for x, y in [(-1, -1), (2, -1), (-1, 2)] for z in (-1, 1)],
}


def fano_pair(name: str) -> PolarizedToricPair:
    return pair_from_data(vertices=FANO_BANK[name])


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def random_rational(rng: random.Random, lo, hi, max_den: int = 4) -> Fraction:
    lo, hi = Fraction(lo), Fraction(hi)
    while True:
        den = rng.randint(1, max_den)
        lo_n, hi_n = ceil(lo * den), floor(hi * den)
        if lo_n <= hi_n:
            return Fraction(rng.randint(lo_n, hi_n), den)


def random_lattice_polytope(rng: random.Random, n: int, radius: int = 2) -> LatticePolytope:
    while True:
        pts = [tuple(rng.randint(-radius, radius) for _ in range(n))
               for _ in range(rng.randint(n + 1, n + 4))]
        P = hull(pts, dim=n)
        if P.is_full_dimensional:
            return P


def random_pair(rng: random.Random, n: int, boundary: bool = True, summands: bool = False
                ) -> tuple[PolarizedToricPair, LatticePolytope | None]:
    """Random pair; with ``summands`` its polytope is ``A + B`` and ``B`` is returned."""
    B = None
    if summands:
        A = random_lattice_polytope(rng, n, 1)
        B = random_lattice_polytope(rng, n, 1)
        P = minkowski_sum(A, B)
    else:
        P = random_lattice_polytope(rng, n)
    X = PolarizedToricPair(P, (Fraction(0),) * len(P.halfspaces))
    if boundary:
        X = X.with_boundary([random_rational(rng, 0, 1) if rng.random() < 0.6 else Fraction(0)
                             for _ in X.rays])
    return X, B


def support_divisor(X: PolarizedToricPair, R: LatticePolytope) -> TDivisor:
    return TDivisor([-min(sum(a * b for a, b in zip(v, p)) for p in R.vertices) for v in X.rays])


def random_point_in(rng: random.Random, R: LatticePolytope) -> tuple[Fraction, ...]:
    weights = [rng.randint(0, 3) for _ in R.vertices]
    if not any(weights):
        weights[0] = 1
    tot = sum(weights)
    return tuple(sum(Fraction(w, tot) * v[j] for w, v in zip(weights, R.vertices))
                 for j in range(R.dim))


def random_nef_effective(rng: random.Random, X: PolarizedToricPair, B: LatticePolytope | None
                         ) -> TDivisor:
    """Effective nef divisor: a translate of ``s B`` (or ``s P``) containing the origin."""
    R = B if B is not None and rng.random() < 0.7 else X.P
    s = random_rational(rng, Fraction(1, 4), 2)
    sR = R.scale(s)
    w = random_point_in(rng, sR)
    N = support_divisor(X, sR.translate([-x for x in w]))
    assert N.is_effective() and is_nef(X, N)
    return N


def random_pl_function(rng: random.Random, P: LatticePolytope, extra: int = 3,
                       nonconstant: bool = True) -> PLFunction:
    while True:
        pts = list(P.vertices) + [random_point_in(rng, P) for _ in range(rng.randint(0, extra))]
        vals = [random_rational(rng, 0, 3) for _ in pts]
        f = PLFunction.from_support(P, pts, vals)
        if not nonconstant or not f.is_constant():
            return f


def random_tc(rng: random.Random, X: PolarizedToricPair, nonconstant: bool = True):
    f = random_pl_function(rng, X.P, nonconstant=nonconstant)
    M = f.max() + random_rational(rng, Fraction(1, 4), 2)
    return build(X, f, M)


def random_small_denominator_tc(rng: random.Random, X: PolarizedToricPair, k_max: int = 40,
                                nonconstant: bool = True) -> ToricTestConfig:
    """Test configuration whose ``Q`` has denominator small enough for the weight oracle."""
    lattice = X.P.lattice_points(1)
    while True:
        step = rng.choice((1, 1, Fraction(1, 2)))
        pts = list(X.P.vertices) + rng.sample(lattice, min(len(lattice), rng.randint(0, 3)))
        vals = [step * rng.randint(0, 4) for _ in pts]
        f = PLFunction.from_support(X.P, pts, vals)
        if nonconstant and f.is_constant():
            continue
        tc = build(X, f, f.max() + step * rng.randint(1, 3))
        D = common_denominator(x for v in tc.Q.vertices for x in v)
        if D * (X.n + 2) <= k_max:
            return tc


def random_log_fano(rng: random.Random, names: list[str] | None = None) -> PolarizedToricPair:
    """Bank polytope with a small random boundary, polarized by ``-(K + Delta)``."""
    names = names or list(FANO_BANK)
    while True:
        base = fano_pair(rng.choice(names))
        c = [random_rational(rng, 0, Fraction(1, 2), 6) if rng.random() < 0.5 else Fraction(0)
             for _ in base.rays]
        X = base.with_boundary(c)
        L = -log_canonical_divisor(X)
        if is_ample(X, L):
            return X.with_polarization(L)


def random_boundary_perturbation(rng: random.Random, X: PolarizedToricPair, eps: Fraction,
                                 strict: bool) -> TDivisor:
    """Effective toric ``B`` with ``eps L - B`` nef (ample if ``strict``) and ``Delta + B <= 1``."""
    room = [1 - c for c in X.boundary]
    while True:
        if rng.random() < 0.5:
            # a multiple of an effective translate of L itself
            w = random_point_in(rng, X.P)
            B = support_divisor(X, X.P.translate([-x for x in w]))
            B = (eps * random_rational(rng, Fraction(1, 8), 1, 8)) * B
        else:
            B = TDivisor([random_rational(rng, 0, 1) for _ in X.rays])
        for _ in range(60):
            test = eps * X.L - B
            ok = is_ample(X, test) if strict else is_nef(X, test)
            if ok and all(b <= r for b, r in zip(B.coeffs, room)):
                return B
            B = B * Fraction(1, 2)


# ---------------------------------------------------------------------------
# suite machinery
# ---------------------------------------------------------------------------

@dataclass
class CaseResult:
    index: int
    passed: bool
    detail: dict = field(default_factory=dict)
    instance: dict | None = None
    tc: dict | None = None


@dataclass
class SuiteResult:
    name: str
    seed: int
    count: int
    cases: list[CaseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> list[CaseResult]:
        return [c for c in self.cases if not c.passed]


def case_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"{seed}:{index}")


def _dumps(X=None, tc=None):
    from .io import dump_instance, dump_test_config
    return (dump_instance(X) if X is not None else None,
            dump_test_config(tc) if tc is not None else None)


def case_perturb(rng, index):
    n = (1, 2, 3)[index % 3]
    X, B = random_pair(rng, n, summands=True)
    tc = random_tc(rng, X, nonconstant=rng.random() < 0.9)
    N = random_nef_effective(rng, X, B)
    rec = perturb_check(tc, N)
    return CaseResult(index, rec.holds, {"n": n, "lhs": rec.lhs, "rhs": rec.rhs}, *_dumps(X, tc))


def case_calabi_yau(rng, index):
    n = (1, 2, 3)[index % 3] if index % 6 else 2
    X, _ = random_pair(rng, n, boundary=False)
    X = X.with_boundary([1] * len(X.rays))
    tc = random_tc(rng, X)
    d = df(tc)
    return CaseResult(index, d >= 0, {"n": n, "df": d}, *_dumps(X, tc))


def case_jna_trivial(rng, index):
    n = (1, 2, 3)[index % 3]
    X, _ = random_pair(rng, n)
    if index % 2:
        tc = random_tc(rng, X)
        J = jna(tc)
        ok = J > 0 and not is_trivial(tc)
    else:
        f = PLFunction.constant(X.P, random_rational(rng, 0, 3))
        tc = build(X, f, f.max() + random_rational(rng, Fraction(1, 4), 2))
        J = jna(tc)
        ok = J == 0 and is_trivial(tc)
    return CaseResult(index, ok, {"n": n, "jna": J}, *_dumps(X, tc))


def case_negativity(rng, index):
    n = (1, 2)[index % 2]
    X, _ = random_pair(rng, n, boundary=False)
    tc = random_tc(rng, X)
    Y = graph_pair(tc)
    central = central_components(Y)
    nefs = [rng.choice(["L", "P", "fiber"]) for _ in range(n - 1)]
    for _ in range(10):
        D = {i: random_rational(rng, -2, 2) for i in central if rng.random() < 0.7}
        try:
            val = negativity_check(tc, D, nefs)
        except NotQCartierError:
            continue
        return CaseResult(index, val <= 0, {"n": n, "value": val, "nefs": nefs}, *_dumps(X, tc))
    # fall back to the whole central fiber, which is always Cartier
    whole = {i: -Y.rays[i][-1] for i in central}
    val = negativity_check(tc, whole, nefs)
    return CaseResult(index, val <= 0, {"n": n, "value": val, "nefs": nefs}, *_dumps(X, tc))


def case_technical(rng, index):
    X = random_log_fano(rng)
    tc = random_tc(rng, X, nonconstant=rng.random() < 0.9)
    rec = technical_bound_check(tc)
    ok = rec.verdict == Verdict.NOT_APPLICABLE or bool(rec.holds)
    return CaseResult(index, ok, {"verdict": rec.verdict, "df": rec.df, "bound": rec.bound},
                      *_dumps(X, tc))


def case_monotonicity(rng, index):
    X = random_log_fano(rng)
    delta = delta_toric(X).value
    delta0 = delta * random_rational(rng, Fraction(1, 8), Fraction(7, 8), 8)
    eps0 = fano_perturb_nef_radius(delta, delta0, X.n)
    B = random_boundary_perturbation(rng, X, eps0, strict=False)
    new = X.with_boundary((X.Delta + B).coeffs).with_polarization(X.L - B)
    d_new = delta_toric(new).value
    ok = new.is_klt and d_new >= delta0
    return CaseResult(index, ok, {"delta": delta, "delta0": delta0, "eps0": eps0,
                                  "new_delta": d_new}, *_dumps(X))


def case_upper(rng, index):
    X = random_log_fano(rng)
    delta = delta_toric(X).value
    delta1 = delta * random_rational(rng, Fraction(9, 8), 3, 8)
    eps1 = fano_perturb_upper(delta, delta1, X.n).value
    B = random_boundary_perturbation(rng, X, eps1, strict=True)
    new = X.with_boundary((X.Delta + B).coeffs).with_polarization(X.L - B)
    d_new = delta_toric(new).value
    ok = new.is_klt and d_new <= delta1
    return CaseResult(index, ok, {"delta": delta, "delta1": delta1, "eps1": eps1,
                                  "new_delta": d_new}, *_dumps(X))


def _random_direction(rng, n):
    while True:
        v = tuple(rng.randint(-3, 3) for _ in range(n))
        if any(v):
            return v


def case_s_value(rng, index):
    n = (1, 2, 3)[index % 3] if index % 5 else 2
    X, _ = random_pair(rng, n, boundary=False)
    v = _random_direction(rng, n)
    closed = s_value_closed_form(X, v)
    integral = s_value_by_integration(X, v)
    lattice = s_value_lattice_oracle(X, v)
    return CaseResult(index, closed == integral == lattice,
                      {"n": n, "v": list(v), "closed": closed, "integral": integral,
                       "lattice": lattice}, *_dumps(X))


def case_oracle(rng, index):
    n = (1, 2)[index % 2]
    X, _ = random_pair(rng, n, boundary=False)
    tc = random_small_denominator_tc(rng, X, nonconstant=index % 7 != 0)
    d = df(tc)
    orc = df_weight_oracle(tc, 40)
    J = (jna(tc), jna_by_interpolation(tc), jna_max_minus_mean(tc))
    same_sign = (d > 0) == (orc.value > 0) and (d < 0) == (orc.value < 0)
    ok = same_sign and abs(d - orc.value) <= orc.residual and J[0] == J[1] == J[2]
    return CaseResult(index, ok, {"n": n, "df": d, "oracle": orc.value, "residual": orc.residual,
                                  "jna": list(J)}, *_dumps(X, tc))


def case_destabilizer(rng, index):
    names = list(FANO_BANK)
    name = names[index % len(names)]
    X = fano_pair(name)
    res = delta_toric(X)
    if res.value < 1:
        scan = destabilizer_scan(X, res.ray, ray_width(X, res.ray), 20)
        ok = any(d < 0 for _, d in scan)
    else:
        ok = not any(d < 0 for r in X.rays
                     for _, d in destabilizer_scan(X, r, ray_width(X, r), 8))
    return CaseResult(index, ok, {"name": name, "delta": res.value, "ray": list(res.ray)},
                      *_dumps(X))


ABSTRACT_TABLE: list[tuple[AbstractSlopeData, str, Verdict]] = [
    (AbstractSlopeData(2, 1, Fraction(3, 4), w_ample=True), "w", Verdict.UNIFORM),
    (AbstractSlopeData(2, 1, Fraction(3, 4), w_nef=True), "w", Verdict.SEMISTABLE),
    (AbstractSlopeData(2, 1, Fraction(3, 4), w_ample=True, w_nef=True), "w", Verdict.UNIFORM),
    (AbstractSlopeData(2, 1, 0, w_ample=True), "w", Verdict.INCONCLUSIVE),
    (AbstractSlopeData(3, 2, -1, w_ample=True), "w", Verdict.INCONCLUSIVE),
    (AbstractSlopeData(3, 2, 1), "w", Verdict.INCONCLUSIVE),
    (AbstractSlopeData(2, 1, 1, LN=0, k_delta_ample=True), "gt", Verdict.UNIFORM),
    (AbstractSlopeData(2, 5, 1, LN=1, k_delta_ample=True), "gt", Verdict.UNIFORM),
    (AbstractSlopeData(2, 4, 1, LN=1, k_delta_ample=True), "gt", Verdict.INCONCLUSIVE),
    (AbstractSlopeData(1, 3, 1, LN=1, k_delta_ample=True), "gt", Verdict.UNIFORM),
]


def case_negative_space(rng, index):
    n = (1, 2, 3)[index % 3]
    X, _ = random_pair(rng, n)
    mu = slope(X, X.K + X.Delta)
    ok = mu <= 0
    detail = {"n": n, "mu": mu}
    if n >= 2:
        verdict = w_criterion(X)
        detail["verdict"] = verdict
        ok = ok and verdict == Verdict.INCONCLUSIVE
    if index < len(ABSTRACT_TABLE):
        data, kind, expected = ABSTRACT_TABLE[index]
        got = w_criterion(data) if kind == "w" else gt_radius_check(data).verdict
        detail["abstract"] = {"expected": expected, "got": got}
        ok = ok and got == expected
    return CaseResult(index, ok, detail, *_dumps(X))


def case_cone_split(rng, index):
    n = (1, 2, 3)[index % 3]
    X, B = random_pair(rng, n, boundary=False, summands=True)
    # P = A + B, so L = (1/2)(2A) + (1/2)(2B) when the two classes are independent
    basis = [2 * (X.L - support_divisor(X, B)), 2 * support_divisor(X, B)]
    if class_coordinates(X, X.L, basis) is None:
        basis = [X.L]
    t0 = Fraction(1, len(basis))
    eps = random_rational(rng, Fraction(1, 8), 1, 8)
    radius = split_radius(t0, eps)
    shares = [random_rational(rng, 0, 1, 8) for _ in basis]
    total = sum(shares) or 1
    xi = TDivisor.zero(len(X.rays))
    for s, b in zip(shares, basis):
        xi = xi + (radius * s / total * rng.choice((-1, 1))) * b
    split = cone_split(X, X.L, xi, basis, eps)
    ok = True
    for part in (split.minus, split.plus):
        ok = ok and is_nef(X, part.residual) and part.residual_norm <= eps
    return CaseResult(index, ok, {"n": n, "epsilon": eps, "radius": radius,
                                  "norms": [split.minus.residual_norm, split.plus.residual_norm]},
                      *_dumps(X))


SUITES: dict[str, Callable] = {
    "perturb": case_perturb,
    "calabi-yau": case_calabi_yau,
    "jna-trivial": case_jna_trivial,
    "negativity": case_negativity,
    "technical": case_technical,
    "monotonicity": case_monotonicity,
    "upper": case_upper,
    "s-value": case_s_value,
    "oracle": case_oracle,
    "destabilizer": case_destabilizer,
    "negative-space": case_negative_space,
    "cone-split": case_cone_split,
}


def run_case(name: str, seed: int, index: int) -> CaseResult:
    return SUITES[name](case_rng(seed, index), index)


def run_suite(name: str, seed: int = 0, count: int = 20, jobs: int = 1) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cases = list(pool.map(run_case, [name] * count, [seed] * count, range(count)))
    else:
        cases = [run_case(name, seed, i) for i in range(count)]
    return SuiteResult(name, seed, count, cases)
