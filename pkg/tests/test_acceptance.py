import time
from contextlib import contextmanager
from fractions import Fraction

from conftest import ACCEPTANCE_LINES
from kstoric.invariants import (
    delta_toric,
    fano_perturb_nef_radius,
    fano_polarization_radius,
    uniform_neighborhood_radius,
)
from kstoric.ratgeom import PLFunction, hull
from kstoric.suites import ABSTRACT_TABLE, fano_pair, run_suite
from kstoric.testconfig import (
    build,
    destabilizer_scan,
    df,
    jna,
    jna_by_interpolation,
    jna_max_minus_mean,
    ray_width,
)
from kstoric.toric import PolarizedToricPair, split_radius


@contextmanager
def criterion(number, title):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        line = f"criterion {number}: {status} {title} ({time.perf_counter() - start:.1f}s)"
        ACCEPTANCE_LINES.append(line)
        print(line)


def assert_suite(name, count, seed=2024):
    result = run_suite(name, seed=seed, count=count)
    assert len(result.cases) == count
    assert result.passed, [(c.index, c.detail) for c in result.failures]
    return result


def test_criterion_01_delta_of_plane_and_quadric():
    with criterion(1, "delta(P2) = delta(P1xP1) = 1"):
        for name in ("P2", "P1xP1"):
            start = time.perf_counter()
            res = delta_toric(fano_pair(name))
            assert time.perf_counter() - start < 1
            assert res.value == 1 and res.anticanonical


def test_criterion_02_delta_of_blowup():
    with criterion(2, "delta(Bl1P2) = 6/7 at ray (1,1)"):
        res = delta_toric(fano_pair("Bl1P2"))
        assert res.value == Fraction(6, 7) and res.ray == (1, 1)
        assert sorted(r.ratio for r in res.records) == [
            Fraction(6, 7), Fraction(12, 13), Fraction(12, 13), Fraction(6, 5)]


def test_criterion_03_linear_function_on_the_line():
    with criterion(3, "P1, f = u: DF 0, J 1/2 at M = 2 and 3"):
        X = PolarizedToricPair(hull([(0,), (1,)]), (Fraction(0),) * 2)
        for M in (2, 3):
            tc = build(X, PLFunction(X.P, [((1,), 0)]), M)
            assert df(tc) == 0 and jna(tc) == Fraction(1, 2)


def test_criterion_04_perturbation_suite():
    with criterion(4, "perturbation inequality on 200 cases"):
        start = time.perf_counter()
        res = assert_suite("perturb", 200)
        assert {c.detail["n"] for c in res.cases} == {1, 2, 3}
        assert time.perf_counter() - start < 300


def test_criterion_05_calabi_yau_suite():
    with criterion(5, "DF >= 0 on 100 boundary-one pairs"):
        assert_suite("calabi-yau", 100)


def test_criterion_06_jna_vanishes_exactly_on_trivial():
    with criterion(6, "J > 0 on 100 nonconstant, J = 0 on constant"):
        # cases alternate constant and nonconstant functions
        res = assert_suite("jna-trivial", 200)
        assert sum(c.detail["jna"] > 0 for c in res.cases) == 100


def test_criterion_07_oracle_agreement():
    with criterion(7, "weight oracle and J routes on 20 cases"):
        res = assert_suite("oracle", 20)
        assert all(c.detail["n"] <= 2 for c in res.cases)


def test_criterion_08_s_value_routes():
    with criterion(8, "S value three routes on 100 cases"):
        assert_suite("s-value", 100)


def test_criterion_09_monotonicity_suite():
    with criterion(9, "delta stays above delta0 on 50 perturbed log Fano pairs"):
        assert_suite("monotonicity", 50)


def test_criterion_10_threshold_arithmetic():
    with criterion(10, "thresholds 1/7, 1/19, 5/66, 1/8"):
        assert uniform_neighborhood_radius(2, 2) == Fraction(1, 7)
        assert fano_polarization_radius(2, 2) == Fraction(1, 19)
        assert fano_perturb_nef_radius(Fraction(6, 7), Fraction(1, 2), 2) == Fraction(5, 66)
        assert split_radius(Fraction(1, 2), Fraction(1, 2)) == Fraction(1, 8)


def test_criterion_11_destabilizer_scan():
    with criterion(11, "Bl1P2 destabilized, P2 and P1xP1 not"):
        assert any(d < 0 for _, d in destabilizer_scan(fano_pair("Bl1P2"), (1, 1), 2, 20))
        for name in ("P2", "P1xP1"):
            X = fano_pair(name)
            for r in X.rays:
                assert all(d >= 0 for _, d in destabilizer_scan(X, r, 2, 20))
                assert all(d >= 0 for _, d in destabilizer_scan(X, r, ray_width(X, r), 12))


def test_criterion_12_negative_space():
    with criterion(12, "toric slopes nonpositive on 100 pairs, 10 abstract cases"):
        assert len(ABSTRACT_TABLE) == 10
        res = assert_suite("negative-space", 100)
        assert sum("abstract" in c.detail for c in res.cases) == 10
