import csv
import json
from fractions import Fraction
from pathlib import Path

import pytest

from kstoric import cli, suites
from kstoric.invariants import AbstractSlopeData
from kstoric.io import (
    SpecError,
    dump_instance,
    dump_test_config,
    parse_instance,
    parse_test_config,
    rational,
)
from kstoric.report import build_report, render_text
from kstoric.suites import CaseResult, fano_pair, random_tc

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------

def test_rationals_are_strings_or_integers():
    assert rational("3/4") == Fraction(3, 4)
    assert rational(5) == 5
    with pytest.raises(SpecError):
        rational(0.75)
    with pytest.raises(SpecError):
        rational("x")


def test_instance_from_halfspaces_with_boundary():
    doc = {"version": 1,
           "polytope": {"halfspaces": [{"normal": [1, 0], "offset": 0},
                                       {"normal": [0, 1], "offset": 0},
                                       {"normal": [-1, -1], "offset": -1}]},
           "boundary": [{"ray": [1, 0], "coefficient": "1/3"}]}
    X = parse_instance(doc).pair
    assert X.boundary[X.ray_index((1, 0))] == Fraction(1, 3)
    assert sum(X.boundary) == Fraction(1, 3)


def test_anticanonical_polarization():
    doc = json.loads((INSTANCES / "p2_half_line.json").read_text())
    X = parse_instance(doc).pair
    assert X.L == -(X.K + X.Delta)


def test_polarization_by_divisor_coefficients():
    doc = {"version": 1, "polytope": {"vertices": [[0, 0], [1, 0], [0, 1]]},
           "polarization": {"divisor": [{"ray": [-1, -1], "coefficient": 2}]}}
    X = parse_instance(doc).pair
    assert X.P.volume() == 2


@pytest.mark.parametrize("doc", [
    {"version": 2, "polytope": {"vertices": [[0], [1]]}},
    {"version": 1},
    {"version": 1, "polytope": {"edges": []}},
    {"version": 1, "polytope": {"vertices": [[0], [1]]}, "polarization": "other"},
    {"version": 1, "polytope": {"vertices": [[0], [1]]},
     "boundary": [{"ray": [0.5], "coefficient": 1}]},
    {"version": 1, "abstract": {"n": 2}},
    [1, 2],
])
def test_malformed_instances(doc):
    with pytest.raises(SpecError):
        parse_instance(doc)


def test_abstract_instance():
    spec = parse_instance({"version": 1, "abstract": {"n": 2, "Ln": 4, "LK": "1", "LN": "1/2",
                                                      "k_delta_ample": True}})
    assert spec.pair is None
    assert spec.abstract == AbstractSlopeData(2, 4, 1, Fraction(1, 2), k_delta_ample=True)


def test_test_configuration_formats_agree():
    X = fano_pair("P1")
    forms = parse_test_config(X, {"M": 3, "f": {"forms": [{"a": [0], "b": 0},
                                                           {"a": [1], "b": 0}]}})
    pieces = parse_test_config(X, {"M": 3, "f": {"pieces": [
        {"cell": [[-1], [0]], "a": [0], "b": 0}, {"cell": [[0], [1]], "a": [1], "b": 0}]}})
    support = parse_test_config(X, {"M": 3, "f": {"support": [
        {"point": [-1], "value": 0}, {"point": [0], "value": 0}, {"point": [1], "value": 1}]}})
    assert forms.Q == pieces.Q == support.Q
    with pytest.raises(SpecError):
        parse_test_config(X, {"M": 3, "f": {"table": []}})


def test_round_trip_of_instances_and_test_configurations():
    import random
    X = fano_pair("Bl1P2").with_boundary([0, Fraction(1, 3), 0, Fraction(1, 2)])
    Y = parse_instance(json.loads(json.dumps(dump_instance(X)))).pair
    assert Y == X
    tc = random_tc(random.Random(4), X)
    tc2 = parse_test_config(Y, json.loads(json.dumps(dump_test_config(tc))))
    assert tc2.Q == tc.Q


def test_report_round_trip_reanalysis():
    X = parse_instance(json.loads((INSTANCES / "bl1p2.json").read_text())).pair
    doc = build_report(X, delta0=Fraction(1, 2))
    again = build_report(parse_instance(doc["instance"]).pair, delta0=Fraction(1, 2))
    assert json.dumps(again, sort_keys=True) == json.dumps(doc, sort_keys=True)
    assert doc["delta"]["value"] == "6/7" and doc["delta"]["ray"] == [1, 1]
    assert doc["thresholds"]["epsilon0"]["value"] == "5/66"


def _leaves(x):
    if isinstance(x, dict):
        for v in x.values():
            yield from _leaves(v)
    elif isinstance(x, list):
        for v in x:
            yield from _leaves(v)
    elif isinstance(x, str):
        yield x


def test_text_rendering_shows_every_json_value():
    X = fano_pair("Bl1P2")
    doc = build_report(X, delta1=2, t0=Fraction(1, 2), epsilon=Fraction(1, 2))
    text = render_text(doc)
    for leaf in _leaves(doc):
        assert leaf in text


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def test_analyze_blowup(capsys):
    code, doc = run_json(capsys, "analyze", INSTANCES / "bl1p2.json")
    assert code == 0
    assert doc["delta"]["value"] == "6/7" and doc["delta"]["ray"] == [1, 1]
    code, doc = run_json(capsys, "analyze", INSTANCES / "p2.json")
    assert doc["delta"]["value"] == "1"


def test_analyze_abstract(capsys):
    code, doc = run_json(capsys, "analyze", INSTANCES / "abstract_uniform.json")
    assert code == 0 and doc["abstract"]["w_criterion"] == "Uniform"


def test_analyze_writes_curve_tables(capsys, tmp_path):
    code, _, _ = run(capsys, "analyze", INSTANCES / "bl1p2.json", "--curves", tmp_path,
                     "--samples", 4)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "curve_1_1.csv")))
    assert rows[0] == ["x", "volume"]
    assert rows[1] == ["0", "8"] and rows[-1] == ["2", "0"]
    assert len(list(tmp_path.glob("*.csv"))) == 4


def test_df_and_jna_commands(capsys):
    code, doc = run_json(capsys, "df", INSTANCES / "p1.json", INSTANCES / "tc_p1_linear.json")
    assert code == 0 and doc["df"] == "0" and doc["jna"] == "1/2"
    assert doc["ceiling_invariant"] is True and doc["trivial"] is False
    code, doc = run_json(capsys, "jna", INSTANCES / "p1.json", INSTANCES / "tc_p1_kink.json")
    assert code == 0 and doc["agree"] and doc["mixed_volume"] == "1/4"
    code, doc = run_json(capsys, "df", INSTANCES / "bl1p2.json",
                         INSTANCES / "tc_bl1p2_destabilizing.json")
    assert doc["df"] == "-1/6"


def test_df_of_zero_function(capsys, tmp_path):
    zero = tmp_path / "zero.json"
    zero.write_text(json.dumps({"version": 1, "M": 1, "f": {"forms": [{"a": [0, 0], "b": 0}]}}))
    code, doc = run_json(capsys, "df", INSTANCES / "p2.json", zero)
    assert (doc["df"], doc["jna"], doc["trivial"]) == ("0", "0", True)


def test_nonconvex_pieces_are_invalid_geometry(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"version": 1, "M": 3, "f": {"pieces": [
        {"cell": [[0], ["1/2"]], "a": [1], "b": 0},
        {"cell": [["1/2"], [1]], "a": [0], "b": "1/2"}]}}))
    code, _, err = run(capsys, "df", INSTANCES / "p1.json", bad)
    assert code == 3 and "convex" in err


def test_radius_command(capsys):
    code, doc = run_json(capsys, "radius", "--delta", 2, "--dim", 2)
    assert code == 0
    assert doc["uniform_neighborhood_radius"] == "1/7"
    assert doc["polarization_radius"] == "1/19"
    code, doc = run_json(capsys, "radius", INSTANCES / "bl1p2.json", "--delta0", "1/2",
                         "--t0", "1/2", "--epsilon", "1/2")
    assert doc["epsilon0"]["value"] == "5/66" and doc["cone_radius"]["value"] == "1/8"
    code, doc = run_json(capsys, "radius", "--delta", 1, "--dim", 2, "--delta1", 8,
                         "--precision", 16)
    assert doc["epsilon1"]["value"] == "1/3" and doc["epsilon1"]["exact"] is True


def test_radius_rejects_bad_parameters(capsys):
    code, _, err = run(capsys, "radius", INSTANCES / "bl1p2.json", "--delta0", 1)
    assert code == 2 and "delta0" in err
    assert run(capsys, "radius")[0] == 2
    assert run(capsys, "radius", "--delta=-1/2", "--dim", 2)[0] == 2
    # decimal strings are exact on the command line
    code, doc = run_json(capsys, "radius", "--delta", "2.0", "--dim", 2)
    assert code == 0 and doc["uniform_neighborhood_radius"] == "1/7"


def test_usage_and_parse_errors(capsys, tmp_path):
    assert run(capsys, "analyze", INSTANCES / "malformed.json")[0] == 2
    assert run(capsys, "analyze", tmp_path / "missing.json")[0] == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert run(capsys, "analyze", broken)[0] == 2
    assert run(capsys, "verify", "nosuch")[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_invalid_geometry_exit_code(capsys, tmp_path):
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps({"version": 1, "polytope": {"vertices": [[0, 0], [1, 1], [2, 2]]}}))
    assert run(capsys, "delta", flat)[0] == 3


def test_verify_passes_and_logs_each_case(capsys):
    code, out, _ = run(capsys, "verify", "upper", "--count", 3, "--seed", 7)
    assert code == 0
    assert [line.split()[1] for line in out.splitlines()[:3]] == [
        "upper[0]", "upper[1]", "upper[2]"]


def test_verify_dumps_first_counterexample(capsys, tmp_path, monkeypatch):
    def flaky(rng, index):
        X = fano_pair("P2")
        return CaseResult(index, index != 1, {"i": index}, dump_instance(X),
                          dump_test_config(random_tc(rng, X)))

    monkeypatch.setitem(suites.SUITES, "flaky", flaky)
    code, doc = run_json(capsys, "verify", "flaky", "--count", 3, "--dump-dir", tmp_path)
    assert code == 1 and doc["failed"] == [1]
    files = sorted(Path(p).name for p in doc["counterexample_files"])
    assert files == ["flaky_seed0_case1_instance.json", "flaky_seed0_case1_tc.json"]
    X = parse_instance(json.loads((tmp_path / files[0]).read_text())).pair
    parse_test_config(X, json.loads((tmp_path / files[1]).read_text()))


def test_report_includes_suites_and_test_configurations(capsys):
    code, doc = run_json(capsys, "report", INSTANCES / "p1.json", "--tc",
                         INSTANCES / "tc_p1_linear.json", "--suite", "s-value", "--count", 2,
                         "--seed", 3)
    assert code == 0
    assert doc["suites"] == [{"suite": "s-value", "seed": 3, "count": 2, "passed": 2,
                              "failed": []}]
    assert doc["test_configurations"][0]["jna"] == "1/2"
