"""JSON instance and test-configuration documents.

Rationals are written as ``"p/q"`` strings (integers may be bare JSON
integers); floats are rejected so nothing inexact sneaks in.  Every
document carries a top-level ``"version"``.
"""

from __future__ import annotations

import dataclasses
import json
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any

from .invariants import AbstractSlopeData
from .ratgeom import PLFunction, hull
from .ratgeom.linalg import as_fraction
from .testconfig import ToricTestConfig, build
from .toric import PolarizedToricPair, TDivisor, log_canonical_divisor, pair_from_data

SCHEMA_VERSION = 1


class SpecError(ValueError):
    """Malformed input document."""


@dataclasses.dataclass(frozen=True)
class InstanceSpec:
    pair: PolarizedToricPair | None
    abstract: AbstractSlopeData | None


def rational(x, where="value") -> Fraction:
    if isinstance(x, float):
        raise SpecError(f"{where}: floats are not allowed, write rationals as \"p/q\"")
    try:
        return as_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"{where}: cannot read {x!r} as a rational") from exc


def _vector(xs, where) -> tuple[Fraction, ...]:
    if not isinstance(xs, list) or not xs:
        raise SpecError(f"{where}: expected a nonempty list")
    return tuple(rational(x, where) for x in xs)


def _ray(xs, where) -> tuple[int, ...]:
    v = _vector(xs, where)
    if any(x.denominator != 1 for x in v):
        raise SpecError(f"{where}: rays are integer vectors")
    return tuple(int(x) for x in v)


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise SpecError(f"{where}: missing field {key!r}")
    return doc[key]


def _check_version(doc):
    if not isinstance(doc, dict):
        raise SpecError("document must be a JSON object")
    version = doc.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SpecError(f"unsupported schema version {version!r}")


def _ray_coefficients(X: PolarizedToricPair, entries, where) -> TDivisor:
    if not isinstance(entries, list):
        raise SpecError(f"{where}: expected a list of {{ray, coefficient}}")
    mapping = {}
    for i, e in enumerate(entries):
        ray = _ray(_require(e, "ray", f"{where}[{i}]"), f"{where}[{i}].ray")
        mapping[ray] = rational(_require(e, "coefficient", f"{where}[{i}]"),
                                f"{where}[{i}].coefficient")
    return X.divisor(mapping)


def parse_instance(doc: Any) -> InstanceSpec:
    _check_version(doc)
    pair = None
    if "polytope" in doc:
        poly = doc["polytope"]
        if not isinstance(poly, dict):
            raise SpecError("polytope: expected an object")
        if "vertices" in poly:
            verts = [_vector(v, "polytope.vertices") for v in poly["vertices"]]
            pair = pair_from_data(vertices=verts)
        elif "halfspaces" in poly:
            hs = [(_vector(_require(h, "normal", "polytope.halfspaces"), "normal"),
                   rational(_require(h, "offset", "polytope.halfspaces"), "offset"))
                  for h in poly["halfspaces"]]
            pair = pair_from_data(halfspaces=hs)
        else:
            raise SpecError("polytope: give 'vertices' or 'halfspaces'")
        pair = pair.with_boundary(
            _ray_coefficients(pair, doc.get("boundary", []), "boundary").coeffs)
        pol = doc.get("polarization", "fromPolytope")
        if pol == "anticanonical":
            pair = pair.with_polarization(-log_canonical_divisor(pair))
        elif isinstance(pol, dict) and "divisor" in pol:
            pair = pair.with_polarization(
                _ray_coefficients(pair, pol["divisor"], "polarization.divisor"))
        elif pol != "fromPolytope":
            raise SpecError(f"polarization: unknown value {pol!r}")
    abstract = None
    if "abstract" in doc:
        a = doc["abstract"]
        try:
            abstract = AbstractSlopeData(
                n=int(_require(a, "n", "abstract")),
                Ln=rational(_require(a, "Ln", "abstract"), "abstract.Ln"),
                LK=rational(_require(a, "LK", "abstract"), "abstract.LK"),
                LN=None if a.get("LN") is None else rational(a["LN"], "abstract.LN"),
                w_ample=bool(a.get("w_ample", False)),
                w_nef=bool(a.get("w_nef", False)),
                k_delta_ample=bool(a.get("k_delta_ample", False)),
                n_nef=bool(a.get("n_nef", True)),
            )
        except (TypeError, AttributeError) as exc:
            raise SpecError(f"abstract: {exc}") from exc
    if pair is None and abstract is None:
        raise SpecError("instance needs a 'polytope' or an 'abstract' block")
    return InstanceSpec(pair, abstract)


def parse_test_config(X: PolarizedToricPair, doc: Any) -> ToricTestConfig:
    _check_version(doc)
    M = rational(_require(doc, "M", "tc"), "tc.M")
    f = _require(doc, "f", "tc")
    if not isinstance(f, dict):
        raise SpecError("tc.f: expected an object")
    if "forms" in f:
        forms = [(_vector(_require(p, "a", "tc.f.forms"), "a"), rational(_require(p, "b", "tc.f.forms"), "b"))
                 for p in f["forms"]]
        func = PLFunction(X.P, forms)
    elif "pieces" in f:
        pieces = [(hull([_vector(v, "cell") for v in _require(p, "cell", "tc.f.pieces")], dim=X.n),
                   _vector(_require(p, "a", "tc.f.pieces"), "a"),
                   rational(_require(p, "b", "tc.f.pieces"), "b"))
                  for p in f["pieces"]]
        func = PLFunction.from_pieces(X.P, pieces)
    elif "support" in f:
        pts = [_vector(_require(p, "point", "tc.f.support"), "point") for p in f["support"]]
        vals = [rational(_require(p, "value", "tc.f.support"), "value") for p in f["support"]]
        func = PLFunction.from_support(X.P, pts, vals)
    else:
        raise SpecError("tc.f: give 'forms', 'pieces' or 'support'")
    return build(X, func, M)


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------

def rat_str(x: Fraction) -> str:
    return str(x)


def dump_instance(X: PolarizedToricPair | None, abstract: AbstractSlopeData | None = None) -> dict:
    doc: dict = {"version": SCHEMA_VERSION}
    if X is not None:
        doc["polytope"] = {"vertices": [[rat_str(x) for x in v] for v in X.P.vertices]}
        doc["boundary"] = [{"ray": list(r), "coefficient": rat_str(c)}
                           for r, c in zip(X.rays, X.boundary) if c]
        doc["polarization"] = "fromPolytope"
    if abstract is not None:
        doc["abstract"] = to_jsonable(abstract)
    return doc


def dump_test_config(tc: ToricTestConfig) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "M": rat_str(tc.M),
        "f": {"forms": [{"a": [rat_str(x) for x in a], "b": rat_str(b)} for a, b in tc.f.forms]},
    }


def to_jsonable(obj: Any) -> Any:
    """Recursively convert results into JSON-ready values with exact rationals as strings."""
    if isinstance(obj, Fraction):
        return rat_str(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, TDivisor):
        return [rat_str(c) for c in obj.coeffs]
    if isinstance(obj, PolarizedToricPair):
        return dump_instance(obj)
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")
