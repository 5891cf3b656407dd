"""Versioned JSON documents for problems and results.

Numbers are written as decimal strings (``repr`` of the double, so reading
them back is exact) and objects keep a fixed field order.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..duality import PSepInstance, ProblemInstance, psep_build
from ..errors import ConeMembershipError, DimensionError, SetLatError
from ..geometry import PolyCone, UpperSet, _unit1, from_hrep
from ..maps import Piece, SetValuedMap
from ..tolerances import DELTA_SLATER, EPS_DUAL, EPS_GEOM, EPS_LP

__all__ = [
    "FORMAT_VERSION", "InputError", "SegmentExample", "Document", "parse_problem",
    "parse_document", "load_document", "emit", "emit_problem", "emit_psep", "emit_segment",
    "dumps", "num", "num_list", "upper_set_doc", "tolerance_doc", "parse_vector",
    "parse_grid",
]

FORMAT_VERSION = "1.0"

SCHEMA_VIOLATION = "SCHEMA_VIOLATION"
DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
UPPER_SET_VIOLATION = "UPPER_SET_VIOLATION"
NORMAL_OUTSIDE_DUAL_CONE = "NORMAL_OUTSIDE_DUAL_CONE"
FILE_ERROR = "FILE_ERROR"


class InputError(SetLatError, ValueError):
    """A document or argument was rejected.  ``code`` is machine readable and
    ``where`` names the offending field (or ``line:column`` for syntax)."""

    def __init__(self, code: str, where: str, message: str):
        super().__init__(f"{code} at {where}: {message}")
        self.code = code
        self.where = where
        self.message = message

    def to_doc(self) -> dict:
        return {"version": FORMAT_VERSION, "kind": "error", "code": self.code,
                "where": self.where, "message": self.message}


@dataclass(frozen=True)
class SegmentExample:
    """The non-affine one-parameter example evaluated on a grid."""

    start: float = 0.0
    stop: float = 5.0
    step: float = 0.1


@dataclass
class Document:
    """A parsed input document."""

    kind: str
    payload: Any
    options: dict = field(default_factory=dict)
    name: str = ""

    @property
    def instance(self) -> ProblemInstance | None:
        if isinstance(self.payload, ProblemInstance):
            return self.payload
        if isinstance(self.payload, PSepInstance):
            return self.payload.instance
        return None


# ---------------------------------------------------------------------------
# numbers

def num(x: float) -> str:
    """Exact decimal string of a double; ``-0.0`` is written as ``0.0``."""
    x = float(x)
    if x == 0.0:
        x = 0.0
    return repr(x)


def num_list(a) -> list:
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        return num(a)
    return [num_list(r) for r in a]


def _number(value, where: str, allow_inf: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise InputError(SCHEMA_VIOLATION, where, f"expected a decimal string, got {value!r}")
    try:
        out = float(value)
    except ValueError:
        raise InputError(SCHEMA_VIOLATION, where, f"not a decimal number: {value!r}") from None
    if math.isnan(out) or (math.isinf(out) and not allow_inf):
        raise InputError(SCHEMA_VIOLATION, where, f"non-finite number {value!r}")
    return out


def _vector(value, where: str, length: int | None = None) -> np.ndarray:
    if not isinstance(value, list):
        raise InputError(SCHEMA_VIOLATION, where, "expected a list of numbers")
    out = np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)], dtype=float)
    if length is not None and out.size != length:
        raise InputError(DIMENSION_MISMATCH, where, f"length {out.size}, expected {length}")
    return out


def _matrix(value, where: str, cols: int | None = None, rows: int | None = None) -> np.ndarray:
    if not isinstance(value, list):
        raise InputError(SCHEMA_VIOLATION, where, "expected a list of rows")
    out = [_vector(r, f"{where}[{i}]", cols) for i, r in enumerate(value)]
    if rows is not None and len(out) != rows:
        raise InputError(DIMENSION_MISMATCH, where, f"{len(out)} rows, expected {rows}")
    if not out:
        return np.zeros((0, cols if cols is not None else 0))
    width = out[0].size
    for i, r in enumerate(out):
        if r.size != width:
            raise InputError(DIMENSION_MISMATCH, f"{where}[{i}]", "rows of different lengths")
    return np.vstack(out)


def _field(obj: dict, key: str, where: str, required: bool = True, default=None):
    if not isinstance(obj, dict):
        raise InputError(SCHEMA_VIOLATION, where, "expected an object")
    if key not in obj:
        if required:
            raise InputError(SCHEMA_VIOLATION, f"{where}.{key}" if where else key, "missing field")
        return default
    return obj[key]


def _integer(value, where: str) -> int:
    x = _number(value, where)
    if x != int(x) or x < 1:
        raise InputError(SCHEMA_VIOLATION, where, "expected a positive integer")
    return int(x)


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise InputError(SCHEMA_VIOLATION, f"{where}.{extra[0]}" if where else extra[0],
                         "unknown field")


# ---------------------------------------------------------------------------
# parsing

def _cone(value, where: str, dim: int | None = None) -> PolyCone:
    gens = _matrix(value, where, dim)
    if gens.shape[0] == 0:
        if dim is None:
            raise InputError(SCHEMA_VIOLATION, where, "a cone without generators needs a dimension")
        return PolyCone.zero(dim)
    try:
        return PolyCone(gens, gens.shape[1])
    except (ValueError, DimensionError) as exc:
        raise InputError(SCHEMA_VIOLATION, where, str(exc)) from None


def _tail(piece: dict, cone: PolyCone, where: str) -> UpperSet:
    q = cone.dim
    if "Q_halfspaces" in piece:
        hs = piece["Q_halfspaces"]
        A = _matrix(_field(hs, "A", f"{where}.Q_halfspaces"), f"{where}.Q_halfspaces.A", q)
        b = _vector(_field(hs, "b", f"{where}.Q_halfspaces"), f"{where}.Q_halfspaces.b",
                    A.shape[0])
        try:
            return from_hrep(A, b, cone)
        except ConeMembershipError as exc:
            raise InputError(NORMAL_OUTSIDE_DUAL_CONE, f"{where}.Q_halfspaces.A", str(exc)) from None
    P = _matrix(_field(piece, "Q_vertices", where), f"{where}.Q_vertices", q)
    R = _matrix(_field(piece, "Q_rays", where), f"{where}.Q_rays", q)
    if P.shape[0] == 0:
        raise InputError(SCHEMA_VIOLATION, f"{where}.Q_vertices",
                         "at least one vertex is required")
    if np.any(np.abs(R).sum(axis=1) <= 1e-12):
        raise InputError(SCHEMA_VIOLATION, f"{where}.Q_rays", "zero ray")
    rec = PolyCone(R, q) if R.shape[0] else PolyCone.zero(q)
    if not rec.contains_cone(cone):
        missing = [g for g in cone.generators if not rec.contains(g)]
        raise InputError(UPPER_SET_VIOLATION, f"{where}.Q_rays",
                         f"the rays do not generate a cone containing C; missing direction "
                         f"{np.round(missing[0], 9).tolist()}")
    return UpperSet(cone, raw_v=(P, _unit1(R)))


def _map(value, cone: PolyCone, where: str, n: int | None = None,
         single_piece: bool = False) -> SetValuedMap:
    _check_keys(value, {"n", "name", "pieces", "domain"}, where)
    declared = _field(value, "n", where, required=False)
    if declared is not None:
        declared = _integer(declared, f"{where}.n")
        if n is not None and declared != n:
            raise InputError(DIMENSION_MISMATCH, f"{where}.n", f"{declared}, expected {n}")
        n = declared
    pieces_doc = _field(value, "pieces", where)
    if not isinstance(pieces_doc, list) or not pieces_doc:
        raise InputError(SCHEMA_VIOLATION, f"{where}.pieces", "expected a nonempty list")
    if single_piece and len(pieces_doc) != 1:
        raise InputError(SCHEMA_VIOLATION, f"{where}.pieces", "exactly one piece is required")
    pieces = []
    for k, pd in enumerate(pieces_doc):
        pw = f"{where}.pieces[{k}]"
        _check_keys(pd, {"F", "c", "Q_vertices", "Q_rays", "Q_halfspaces"}, pw)
        F = _matrix(_field(pd, "F", pw), f"{pw}.F", n, cone.dim)
        if n is None:
            n = F.shape[1]
        c = _vector(_field(pd, "c", pw), f"{pw}.c", cone.dim)
        pieces.append(Piece(F, c, _tail(pd, cone, pw)))
    dom = _field(value, "domain", where, required=False)
    domain = None
    if dom is not None:
        _check_keys(dom, {"E", "e"}, f"{where}.domain")
        E = _matrix(_field(dom, "E", f"{where}.domain"), f"{where}.domain.E", n)
        e = _vector(_field(dom, "e", f"{where}.domain"), f"{where}.domain.e", E.shape[0])
        domain = (E, e)
    name = _field(value, "name", where, required=False, default="")
    return SetValuedMap(cone, n, pieces, domain=domain, name=str(name))


def _options(value) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise InputError(SCHEMA_VIOLATION, "options", "expected an object")
    _check_keys(value, {"tol", "grid", "directions", "seed", "samples"}, "options")
    out = {}
    if "tol" in value:
        out["tol"] = _number(value["tol"], "options.tol")
    if "grid" in value:
        out["grid"] = parse_grid(value["grid"], "options.grid")
    for key in ("directions", "seed", "samples"):
        if key in value:
            out[key] = _integer(value[key], f"options.{key}") if key != "seed" else \
                int(_number(value[key], "options.seed"))
    return out


def parse_grid(text, where: str = "--grid") -> tuple[float, float, float]:
    """``"a:b:step"`` to ``(a, b, step)``."""
    if not isinstance(text, str) or text.count(":") != 2:
        raise InputError(SCHEMA_VIOLATION, where, "expected a:b:step")
    a, b, s = (_number(t, where) for t in text.split(":"))
    if s <= 0 or b < a:
        raise InputError(SCHEMA_VIOLATION, where, "need step > 0 and a <= b")
    return a, b, s


def parse_vector(text: str, where: str, length: int | None = None) -> np.ndarray:
    """``"a,b,c"`` to a vector."""
    parts = [t for t in str(text).split(",") if t.strip()]
    return _vector([t.strip() for t in parts], where, length)


def parse_document(data: Any) -> Document:
    """Validate an already decoded JSON value."""
    if not isinstance(data, dict):
        raise InputError(SCHEMA_VIOLATION, "$", "a document is a JSON object")
    version = _field(data, "version", "")
    if version != FORMAT_VERSION:
        raise InputError(SCHEMA_VIOLATION, "version", f"unsupported version {version!r}")
    kind = _field(data, "kind", "")
    name = str(data.get("name", ""))
    options = _options(data.get("options"))
    if kind == "problem":
        _check_keys(data, {"version", "kind", "name", "C", "D", "f", "g", "options"}, "")
        C = _cone(_field(data, "C", ""), "C")
        D = _cone(_field(data, "D", ""), "D")
        f = _map(_field(data, "f", ""), C, "f")
        g = _map(_field(data, "g", ""), D, "g", n=f.n, single_piece=True)
        try:
            inst = ProblemInstance(f, g, name or "problem")
        except (ValueError, DimensionError) as exc:
            raise InputError(DIMENSION_MISMATCH, "g", str(exc)) from None
        return Document("problem", inst, options, name)
    if kind == "psep":
        _check_keys(data, {"version", "kind", "name", "C", "b", "blocks", "options"}, "")
        C = _cone(_field(data, "C", ""), "C")
        b = _vector(_field(data, "b", ""), "b")
        blocks = _field(data, "blocks", "")
        if not isinstance(blocks, list) or not blocks:
            raise InputError(SCHEMA_VIOLATION, "blocks", "expected a nonempty list")
        fs, As = [], []
        for k, bd in enumerate(blocks):
            bw = f"blocks[{k}]"
            _check_keys(bd, {"A", "f"}, bw)
            fn = _map(_field(bd, "f", bw), C, f"{bw}.f", single_piece=True)
            fs.append(fn)
            As.append(_matrix(_field(bd, "A", bw), f"{bw}.A", fn.n, b.size))
        try:
            ps = psep_build(As, b, fs, name=name or "psep")
        except (ValueError, DimensionError) as exc:
            raise InputError(DIMENSION_MISMATCH, "blocks", str(exc)) from None
        return Document("psep", ps, options, name)
    if kind == "segment-example":
        _check_keys(data, {"version", "kind", "name", "options"}, "")
        a, b, s = options.get("grid", (0.0, 5.0, 0.1))
        return Document("segment-example", SegmentExample(a, b, s), options, name)
    raise InputError(SCHEMA_VIOLATION, "kind", f"unknown document kind {kind!r}")


def load_document(path) -> Document:
    """Read and validate a document file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(FILE_ERROR, str(path), exc.strerror or str(exc)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(SCHEMA_VIOLATION, f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return parse_document(data)


def parse_problem(path) -> ProblemInstance:
    """Load a ``problem`` or ``psep`` document as a :class:`ProblemInstance`."""
    doc = load_document(path)
    if doc.instance is None:
        raise InputError(SCHEMA_VIOLATION, "kind", f"{doc.kind!r} documents hold no problem instance")
    return doc.instance


# ---------------------------------------------------------------------------
# emission

def _tail_doc(tail: UpperSet) -> dict:
    if tail._raw_v is not None:
        P, R = tail._raw_v
        return {"Q_vertices": num_list(P), "Q_rays": num_list(R)}
    if tail.is_full:
        A, b = np.zeros((0, tail.dim)), np.zeros(0)
    else:
        A, b = tail._hrep_any()
    return {"Q_halfspaces": {"A": num_list(A), "b": num_list(b)}}


def _map_doc(f: SetValuedMap) -> dict:
    f.require_affine()
    out = {"n": str(f.n), "name": f.name, "pieces": []}
    for p in f.pieces:
        out["pieces"].append({"F": num_list(p.F), "c": num_list(p.c), **_tail_doc(p.tail)})
    out["domain"] = {"E": num_list(f.E), "e": num_list(f.e)}
    return out


def _options_doc(options: dict | None) -> dict:
    out = {}
    for key, value in (options or {}).items():
        if key == "grid":
            out[key] = ":".join(num(v) for v in value)
        elif key == "tol":
            out[key] = num(value)
        else:
            out[key] = str(int(value))
    return out


def emit_problem(inst: ProblemInstance, options: dict | None = None) -> dict:
    doc = {"version": FORMAT_VERSION, "kind": "problem", "name": inst.name,
           "C": num_list(inst.C.generators), "D": num_list(inst.D.generators),
           "f": _map_doc(inst.f), "g": _map_doc(inst.g)}
    if options:
        doc["options"] = _options_doc(options)
    return doc


def emit_psep(ps: PSepInstance, options: dict | None = None) -> dict:
    doc = {"version": FORMAT_VERSION, "kind": "psep", "name": ps.instance.name,
           "C": num_list(ps.instance.C.generators), "b": num_list(ps.b),
           "blocks": [{"A": num_list(A), "f": _map_doc(fn)} for fn, A in zip(ps.blocks, ps.A)]}
    if options:
        doc["options"] = _options_doc(options)
    return doc


def emit_segment(example: SegmentExample) -> dict:
    return {"version": FORMAT_VERSION, "kind": "segment-example", "name": "segment",
            "options": _options_doc({"grid": (example.start, example.stop, example.step)})}


def emit(obj, options: dict | None = None) -> dict:
    """Serialize a problem, a separable problem or the segment example."""
    if isinstance(obj, Document):
        return emit(obj.payload, obj.options)
    if isinstance(obj, PSepInstance):
        return emit_psep(obj, options)
    if isinstance(obj, ProblemInstance):
        return emit_problem(obj, options)
    if isinstance(obj, SegmentExample):
        return emit_segment(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


_FLAT_LIST = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]")


def dumps(doc: dict) -> str:
    """Canonical text: two-space indent, insertion order, innermost lists on
    one line, trailing newline."""
    text = json.dumps(doc, indent=2, ensure_ascii=False)
    # raw newlines only occur between tokens (inside strings they are escaped)
    text = _FLAT_LIST.sub(lambda m: "[" + re.sub(r"\n\s*", " ", m.group(1)) + "]", text)
    return text + "\n"


# ---------------------------------------------------------------------------
# result fragments

def upper_set_doc(A: UpperSet) -> dict:
    """Tag plus both representations of an upper set."""
    H, h = A.halfspaces
    out = {"tag": A.tag.name}
    if A.is_proper:
        out["vertices"] = num_list(A.vertices)
        out["rays"] = num_list(A.rays)
    out["halfspaces"] = {"A": num_list(H), "b": num_list(h)}
    return out


def tolerance_doc(tol: float) -> dict:
    return {"geom": num(EPS_GEOM), "lp": num(EPS_LP), "dual": num(EPS_DUAL),
            "slater": num(DELTA_SLATER), "report": num(tol)}
