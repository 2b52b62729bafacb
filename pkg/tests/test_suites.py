import pytest

from kstoric.suites import SUITES, run_case, run_suite

QUICK = sorted(set(SUITES) - {"oracle", "destabilizer"})


@pytest.mark.parametrize("name", QUICK)
def test_suite_passes_on_a_few_cases(name):
    result = run_suite(name, seed=11, count=4)
    assert result.passed, [c.detail for c in result.failures]
    assert [c.index for c in result.cases] == [0, 1, 2, 3]


def test_expensive_suites_pass_on_a_few_cases():
    assert run_suite("oracle", seed=2, count=3).passed
    assert run_suite("destabilizer", seed=0, count=4).passed


def test_cases_are_reproducible_from_the_seed():
    a = run_suite("perturb", seed=5, count=3)
    b = run_suite("perturb", seed=5, count=3)
    assert [c.instance for c in a.cases] == [c.instance for c in b.cases]
    assert [c.tc for c in a.cases] == [c.tc for c in b.cases]
    c = run_suite("perturb", seed=6, count=3)
    assert [x.tc for x in a.cases] != [x.tc for x in c.cases]


def test_parallel_run_matches_sequential():
    seq = run_suite("s-value", seed=9, count=4)
    par = run_suite("s-value", seed=9, count=4, jobs=2)
    assert [(c.passed, c.detail) for c in seq.cases] == [(c.passed, c.detail) for c in par.cases]


def test_case_can_be_replayed_in_isolation():
    whole = run_suite("upper", seed=4, count=3)
    assert run_case("upper", 4, 2).detail == whole.cases[2].detail


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nosuch")
