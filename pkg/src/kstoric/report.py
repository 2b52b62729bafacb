"""Invariant reports for a pair (or abstract slope data) as JSON-ready dicts and text."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Sequence

from .invariants import (
    AbstractSlopeData,
    Verdict,
    alpha_lower_bound,
    delta_toric,
    fano_perturb_nef_radius,
    fano_perturb_upper,
    fano_polarization_radius,
    gt_radius_check,
    uniform_neighborhood_radius,
    w_criterion,
)
from .io import dump_instance, to_jsonable
from .testconfig import ToricTestConfig, df, is_trivial, jna, jna_max_minus_mean, with_ceiling
from .toric import PolarizedToricPair, degree, is_ample, log_canonical_divisor, slope, split_radius


def pair_summary(X: PolarizedToricPair) -> dict:
    return {
        "dimension": X.n,
        "rays": [list(r) for r in X.rays],
        "boundary": list(X.boundary),
        "degree": degree(X),
        "klt": X.is_klt,
        "log_fano": X.is_klt and is_ample(X, -log_canonical_divisor(X)),
    }


def threshold_block(delta: Fraction, n: int, delta0=None, delta1=None, t0=None,
                    epsilon=None, precision: int = 32) -> dict:
    """Explicit radii at the given delta; optional parameters add their rows."""
    out: dict[str, Any] = {
        "alpha_lower_bound": alpha_lower_bound(delta, n),
        "uniform_neighborhood_radius": (uniform_neighborhood_radius(delta, n)
                                        if delta > 1 else None),
        "polarization_radius": fano_polarization_radius(delta, n, check=False),
        "polarization_radius_applies": delta > 1,
    }
    if delta0 is not None:
        out["epsilon0"] = {"delta0": delta0, "value": fano_perturb_nef_radius(delta, delta0, n)}
    if delta1 is not None:
        bound = fano_perturb_upper(delta, delta1, n, precision)
        out["epsilon1"] = {"delta1": delta1, "value": bound.value,
                           "exact": bound.exact, "precision_bits": bound.precision}
    if t0 is not None and epsilon is not None:
        out["cone_radius"] = {"t0": t0, "epsilon": epsilon, "value": split_radius(t0, epsilon)}
    return out


def tc_record(tc: ToricTestConfig) -> dict:
    d, J = df(tc), jna(tc)
    raised = with_ceiling(tc, tc.M + 1)
    return {
        "M": tc.M,
        "df": d,
        "jna": J,
        "jna_roof_mean": jna_max_minus_mean(tc),
        "trivial": is_trivial(tc),
        "ceiling_invariant": df(raised) == d and jna(raised) == J,
    }


def abstract_block(data: AbstractSlopeData) -> dict:
    out: dict[str, Any] = {"data": data, "mu": data.mu}
    out["w_criterion"] = w_criterion(data) if data.n >= 2 else Verdict.NOT_APPLICABLE
    if data.LN is not None:
        m = gt_radius_check(data)
        out["gt_radius_check"] = {"verdict": m.verdict, "margin": m.margin}
    return out


def build_report(X: PolarizedToricPair | None, abstract: AbstractSlopeData | None = None,
                 tcs: Sequence[ToricTestConfig] = (), suites: Sequence[dict] = (),
                 **threshold_options) -> dict:
    """Everything the tool knows about the input, with exact rationals."""
    doc: dict[str, Any] = {}
    if X is not None:
        doc["instance"] = dump_instance(X)
        doc["pair"] = pair_summary(X)
        KD = X.K + X.Delta
        doc["slopes"] = {"mu_K_plus_Delta": slope(X, KD), "mu_Delta": slope(X, X.Delta)}
        verdicts: dict[str, Any] = {}
        verdicts["w_criterion"] = w_criterion(X) if X.n >= 2 else Verdict.NOT_APPLICABLE
        doc["verdicts"] = verdicts
        if X.is_klt:
            res = delta_toric(X)
            doc["delta"] = {"value": res.value, "ray": list(res.ray),
                            "anticanonical": res.anticanonical,
                            "toric_restricted": res.toric_restricted}
            doc["beta"] = [{"ray": list(r.v), "A": r.A, "S": r.S, "beta_hat": r.beta_hat,
                            "ratio": r.ratio} for r in res.records]
            doc["thresholds"] = threshold_block(res.value, X.n, **threshold_options)
    if abstract is not None:
        doc["abstract"] = abstract_block(abstract)
    if tcs:
        doc["test_configurations"] = [tc_record(tc) for tc in tcs]
    if suites:
        doc["suites"] = list(suites)
    return to_jsonable(doc)


# ---------------------------------------------------------------------------
# text rendering
# ---------------------------------------------------------------------------

def _cell(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, list):
        return "(" + ", ".join(_cell(y) for y in x) + ")"
    return str(x)


def _is_table(x) -> bool:
    return isinstance(x, list) and x and all(isinstance(r, dict) for r in x)


def _rows(doc, prefix=""):
    for key, val in doc.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            yield from _rows(val, name + ".")
        elif _is_table(val):
            yield name, val
        else:
            yield name, _cell(val)


def _table(rows: list[dict]) -> list[str]:
    cols = list(dict.fromkeys(k for r in rows for k in r))
    cells = [[_cell(r.get(c)) if not isinstance(r.get(c), dict) else _cell(list(r[c].values()))
              for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    line = lambda items: "  ".join(s.ljust(w) for s, w in zip(items, widths)).rstrip()
    return [line(cols), line(["-" * w for w in widths])] + [line(row) for row in cells]


def render_text(doc: dict) -> str:
    """Aligned key/value listing; lists of records become tables."""
    scalars, tables = [], []
    for name, val in _rows(doc):
        (tables if isinstance(val, list) else scalars).append((name, val))
    width = max((len(k) for k, _ in scalars), default=0)
    out = [f"{k.ljust(width)}  {v}" for k, v in scalars]
    for name, rows in tables:
        out += ["", f"[{name}]"] + ["  " + line for line in _table(rows)]
    return "\n".join(out) + "\n"
