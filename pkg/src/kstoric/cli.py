"""Command-line front end.

Exit codes: 0 success, 1 a checked property failed, 2 usage or parse
error, 3 invalid geometry.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from .invariants import InconsistencyError, delta_toric, vol_curve
from .io import SpecError, load_json, parse_instance, parse_test_config, rational, to_jsonable
from .ratgeom import GeometryError
from .report import build_report, render_text, tc_record, threshold_block
from .suites import SUITES, run_suite
from .testconfig import jna, jna_by_interpolation, jna_max_minus_mean

EXIT_OK, EXIT_PROPERTY, EXIT_USAGE, EXIT_GEOMETRY = 0, 1, 2, 3


def _rat(text: str) -> Fraction:
    try:
        return rational(text)
    except SpecError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _load_pair(path):
    return parse_instance(load_json(path))


def _require_pair(spec, path):
    if spec.pair is None:
        raise SpecError(f"{path}: this command needs a polytope")
    return spec.pair


def _emit(doc, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        out.write(render_text(doc))


def _threshold_options(args) -> dict:
    return {"delta0": args.delta0, "delta1": args.delta1, "t0": args.t0,
            "epsilon": args.epsilon, "precision": args.precision}


def write_curve_csv(X, ray, path: Path, samples: int) -> None:
    """``x, vol(L - x F)`` on an even grid up to where the volume vanishes."""
    curve = vol_curve(X, ray)
    top = curve.breakpoints[-1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "volume"])
        for j in range(samples + 1):
            x = top * Fraction(j, samples)
            w.writerow([str(x), str(curve(x))])


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    spec = _load_pair(args.instance)
    tcs = [parse_test_config(_require_pair(spec, args.instance), load_json(p)) for p in args.tc]
    doc = build_report(spec.pair, spec.abstract, tcs, **_threshold_options(args))
    if args.curves and spec.pair is not None:
        out = Path(args.curves)
        out.mkdir(parents=True, exist_ok=True)
        for ray in spec.pair.rays:
            name = "curve_" + "_".join(str(x) for x in ray) + ".csv"
            write_curve_csv(spec.pair, ray, out / name, args.samples)
    _emit(doc, args.format)
    return EXIT_OK


def cmd_delta(args) -> int:
    X = _require_pair(_load_pair(args.instance), args.instance)
    res = delta_toric(X)
    doc = {"delta": res.value, "ray": list(res.ray), "anticanonical": res.anticanonical,
           "toric_restricted": res.toric_restricted,
           "beta": [{"ray": list(r.v), "A": r.A, "S": r.S, "beta_hat": r.beta_hat,
                     "ratio": r.ratio} for r in res.records]}
    _emit(to_jsonable(doc), args.format)
    return EXIT_OK


def cmd_df(args) -> int:
    X = _require_pair(_load_pair(args.instance), args.instance)
    tc = parse_test_config(X, load_json(args.tc))
    rec = tc_record(tc)
    _emit(to_jsonable(rec), args.format)
    return EXIT_OK if rec["ceiling_invariant"] else EXIT_PROPERTY


def cmd_jna(args) -> int:
    X = _require_pair(_load_pair(args.instance), args.instance)
    tc = parse_test_config(X, load_json(args.tc))
    routes = {"mixed_volume": jna(tc), "interpolation": jna_by_interpolation(tc),
              "roof_mean": jna_max_minus_mean(tc)}
    agree = len(set(routes.values())) == 1
    _emit(to_jsonable({**routes, "agree": agree}), args.format)
    return EXIT_OK if agree else EXIT_PROPERTY


def cmd_radius(args) -> int:
    if args.instance:
        X = _require_pair(_load_pair(args.instance), args.instance)
        delta, n = delta_toric(X).value, X.n
    else:
        if args.delta is None or args.dim is None:
            raise SpecError("give an instance file, or both --delta and --dim")
        delta, n = args.delta, args.dim
    doc = {"delta": delta, "dimension": n, **threshold_block(delta, n, **_threshold_options(args))}
    _emit(to_jsonable(doc), args.format)
    return EXIT_OK


def _suite_summary(result) -> dict:
    return {"suite": result.name, "seed": result.seed, "count": result.count,
            "passed": sum(c.passed for c in result.cases),
            "failed": [c.index for c in result.failures]}


def _dump_counterexample(result, directory) -> list[str]:
    case = result.failures[0]
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for label, doc in (("instance", case.instance), ("tc", case.tc)):
        if doc is not None:
            path = out / f"{result.name}_seed{result.seed}_case{case.index}_{label}.json"
            path.write_text(json.dumps(doc, indent=2) + "\n")
            written.append(str(path))
    return written


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise SpecError(f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}")
    result = run_suite(args.suite, args.seed, args.count, args.jobs)
    log = sys.stderr if args.format == "json" else sys.stdout
    for case in result.cases:
        status = "ok  " if case.passed else "FAIL"
        detail = json.dumps(to_jsonable(case.detail))
        print(f"{status} {args.suite}[{case.index}] {detail}", file=log)
    summary = _suite_summary(result)
    if result.failures:
        summary["counterexample_files"] = _dump_counterexample(result, args.dump_dir)
    _emit(to_jsonable(summary), args.format)
    return EXIT_OK if result.passed else EXIT_PROPERTY


def cmd_report(args) -> int:
    spec = _load_pair(args.instance)
    tcs = [parse_test_config(_require_pair(spec, args.instance), load_json(p)) for p in args.tc]
    suites = []
    ok = True
    for name in args.suite:
        if name not in SUITES:
            raise SpecError(f"unknown suite {name!r}")
        result = run_suite(name, args.seed, args.count, args.jobs)
        ok &= result.passed
        suites.append(_suite_summary(result))
    doc = build_report(spec.pair, spec.abstract, tcs, suites, **_threshold_options(args))
    _emit(doc, args.format)
    return EXIT_OK if ok else EXIT_PROPERTY


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--format", choices=("json", "text"), default="text")


def _add_thresholds(p):
    p.add_argument("--delta0", type=_rat, help="target delta for the boundary radius")
    p.add_argument("--delta1", type=_rat, help="upper delta for the root-type bound")
    p.add_argument("--t0", type=_rat, help="smallest cone weight for the split radius")
    p.add_argument("--epsilon", type=_rat, help="epsilon for the split radius")
    p.add_argument("--precision", type=int, default=32,
                   help="bits for the root-type bound (default 32)")


def _add_suite_opts(p, seed=0, count=20):
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--count", type=int, default=count)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for suite cases")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kstoric",
                                     description="Exact K-stability invariants of toric pairs.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", help="invariant report for an instance")
    p.add_argument("instance")
    p.add_argument("--tc", action="append", default=[], help="test configuration file")
    p.add_argument("--curves", help="directory for volume-curve CSV files")
    p.add_argument("--samples", type=int, default=20, help="grid size for curve CSVs")
    _add_thresholds(p)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("delta", help="toric delta invariant and beta table")
    p.add_argument("instance")
    _add_common(p)
    p.set_defaults(func=cmd_delta)

    for verb, func, text in (("df", cmd_df, "Donaldson-Futaki invariant of a test configuration"),
                             ("jna", cmd_jna, "J functional by three routes")):
        p = sub.add_parser(verb, help=text)
        p.add_argument("instance")
        p.add_argument("tc")
        _add_common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("radius", help="explicit thresholds")
    p.add_argument("instance", nargs="?")
    p.add_argument("--delta", type=_rat, help="delta value when no instance is given")
    p.add_argument("--dim", type=int, help="dimension when no instance is given")
    _add_thresholds(p)
    _add_common(p)
    p.set_defaults(func=cmd_radius)

    p = sub.add_parser("verify", help="run a seeded property suite")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--dump-dir", default="counterexamples",
                   help="where the first failing case is written")
    _add_suite_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="full report, optionally with suite outcomes")
    p.add_argument("instance")
    p.add_argument("--tc", action="append", default=[])
    p.add_argument("--suite", action="append", default=[])
    _add_suite_opts(p)
    _add_thresholds(p)
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GeometryError as exc:
        print(f"kstoric: invalid geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except InconsistencyError as exc:
        print(f"kstoric: check failed: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except (SpecError, ValueError, KeyError) as exc:
        print(f"kstoric: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
