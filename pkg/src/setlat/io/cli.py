"""The ``setlat`` command line.

Exit status: 0 on success, 1 when the input is rejected, 2 when a
mathematical check fails (the offending witness is reported).
"""

from __future__ import annotations

import argparse
import enum
import math
import sys
from pathlib import Path

import numpy as np

from .. import fixtures
from ..duality import (
    PSepInstance,
    check_maximality,
    dual_objective,
    in_delta,
    lagrangian,
    primal_solution,
    psep_dual,
    psep_identity,
    scalar_primal,
    solve_strong,
    value_biconjugate,
    weak_duality_check,
)
from ..errors import ConeMembershipError, DimensionError, SetLatError, VerificationError
from ..generators import non_delta_pairs, random_dual_pair, random_feasible_points
from ..geometry import UpperSet, equal, support
from ..maps import DualPair, biconjugate, conjugate_offset, facet_directions
from ..saddle import CandidateSet, Evaluator, SolutionVerdict, check_solution, default_universes, \
    is_minimizer, saddle_check
from ..scalarization import phi, scalar_conjugate, scalar_lagrangian
from ..tolerances import EPS_DUAL
from .document import (
    DIMENSION_MISMATCH,
    NORMAL_OUTSIDE_DUAL_CONE,
    SCHEMA_VIOLATION,
    FORMAT_VERSION,
    Document,
    InputError,
    SegmentExample,
    dumps,
    emit,
    load_document,
    num,
    num_list,
    parse_grid,
    parse_vector,
    tolerance_doc,
    upper_set_doc,
)

__all__ = ["main", "run_command", "build_parser", "jsonable"]

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2
EXAMPLES = ("running", "psep", "segment")


class _Parser(argparse.ArgumentParser):
    """Argument errors are input errors (exit 1), not argparse's exit 2."""

    def error(self, message):
        raise InputError("USAGE", self.prog, message)


class CheckFailed(Exception):
    """Raised by ``verify`` when at least one property fails."""

    def __init__(self, doc: dict):
        super().__init__("verification failed")
        self.doc = doc


# ---------------------------------------------------------------------------
# serialization of results

def jsonable(obj):
    """Convert results (arrays, upper sets, pairs, enums) to JSON values."""
    if isinstance(obj, UpperSet):
        return upper_set_doc(obj)
    if isinstance(obj, DualPair):
        return {"ystar": num_list(obj.ystar), "zstar": num_list(obj.zstar)}
    if isinstance(obj, np.ndarray):
        return num_list(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return num(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, enum.Enum):
        return jsonable(obj.value)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, CandidateSet)):
        return [jsonable(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _result(command: str, doc: Document | None, tol: float, payload: dict) -> dict:
    return {"version": FORMAT_VERSION, "kind": "result", "command": command,
            "source": None if doc is None else {"kind": doc.kind, "name": doc.name},
            "tolerances": tolerance_doc(tol), "result": jsonable(payload)}


# ---------------------------------------------------------------------------
# argument helpers

def _pair_arg(text: str, inst) -> DualPair:
    if "|" not in text:
        raise InputError(SCHEMA_VIOLATION, "--vbar", f"expected 'ystar|zstar', got {text!r}")
    y, z = text.split("|", 1)
    pair = DualPair(parse_vector(y, "--vbar ystar", inst.m), parse_vector(z, "--vbar zstar", inst.q))
    try:
        return pair.validate(inst.C)
    except ConeMembershipError as exc:
        raise InputError(NORMAL_OUTSIDE_DUAL_CONE, "--vbar", str(exc)) from None


def _zstar_arg(text: str | None, cone, required: bool = True) -> np.ndarray | None:
    if text is None:
        if required:
            raise InputError(SCHEMA_VIOLATION, "--zstar", "missing")
        return None
    z = parse_vector(text, "--zstar", cone.dim)
    if not cone.dual().contains(z, tol=1e-8) or np.abs(z).sum() <= 1e-12:
        raise InputError(NORMAL_OUTSIDE_DUAL_CONE, "--zstar",
                         f"{z.tolist()} is not a nonzero element of the dual cone of C")
    return z


def _points_arg(text: str | None, n: int, where: str) -> list[np.ndarray] | None:
    if text is None:
        return None
    return [parse_vector(p, where, n) for p in text.split(";") if p.strip()]


def _grid(args, doc: Document):
    if args.grid is not None:
        return parse_grid(args.grid)
    return doc.options.get("grid")


def _grid_points(grid) -> list[np.ndarray]:
    a, b, s = grid
    return fixtures.segment_grid(a, b, s)


def _tol(args, doc: Document | None) -> float:
    if args.tol is not None:
        tol = parse_vector(args.tol, "--tol", 1)[0]
        if not tol > 0 or math.isinf(tol):
            raise InputError(SCHEMA_VIOLATION, "--tol", "tolerance must be positive and finite")
        return tol
    if doc is not None and "tol" in doc.options:
        return doc.options["tol"]
    return EPS_DUAL


def _problem(doc: Document):
    inst = doc.instance
    if inst is None:
        raise InputError(SCHEMA_VIOLATION, "kind", f"command needs a problem document, got {doc.kind!r}")
    return inst


# ---------------------------------------------------------------------------
# commands

def _cmd_solve(args, doc: Document) -> dict:
    inst = _problem(doc)
    report, delta = solve_strong(inst)
    solution = primal_solution(inst, report.p) if report.p.is_proper else []
    return {
        "p": report.p, "d": report.d, "strong": report.strong,
        "gap": report.gap_certificate,
        "slater": {"applicable": report.slater.applicable, "holds": report.slater.holds,
                   "x": report.slater.x, "margin": report.slater.margin},
        "directions": [{"zstar": r.zstar, "p": r.p_z, "d": r.d_z, "ystar": r.ystar}
                       for r in report.table],
        "delta": [{"ystar": e.pair.ystar, "zstar": e.pair.zstar, "offset": e.offset}
                  for e in delta.entries],
        "delta_complete": delta.complete,
        "primal_solution": solution,
        "flags": report.flags + delta.flags,
    }


def _cmd_dual(args, doc: Document) -> dict:
    inst = _problem(doc)
    z = _zstar_arg(args.zstar, inst.C)
    y = parse_vector(args.ystar, "--ystar", inst.m) if args.ystar is not None else np.zeros(inst.m)
    pair = DualPair(y, z)
    h = dual_objective(inst, pair)
    out = {"ystar": y, "zstar": z, "h": h, "offset": support(h, z)}
    if args.check_delta:
        report, _ = solve_strong(inst)
        set_form, scalar_form = in_delta(inst, report.p, pair, _tol(args, doc))
        if set_form != scalar_form:
            raise VerificationError("the two membership tests for the dual solution set disagree",
                                    witness={"ystar": y, "zstar": z})
        out["in_delta"] = set_form
    return out


def _cmd_scalarize(args, doc: Document) -> dict:
    if doc.kind == "segment-example":
        f = fixtures.segment_map()
        z = _zstar_arg(args.zstar, f.cone)
        grid = _grid(args, doc) or (doc.payload.start, doc.payload.stop, doc.payload.step)
        points = _grid_points(grid)
        return {"zstar": z, "table": [{"x": x, "phi": phi(f, z, x)} for x in points]}
    inst = _problem(doc)
    z = _zstar_arg(args.zstar, inst.C)
    points = _points_arg(args.x, inst.n, "--x")
    if points is None:
        grid = _grid(args, doc)
        if grid is not None:
            if inst.n != 1:
                raise InputError(DIMENSION_MISMATCH, "--grid", "a grid needs a one-dimensional domain")
            points = _grid_points(grid)
        else:
            dom = inst.f.domain_vrep()
            points = list(dom[0]) if dom is not None else []
    sol = scalar_primal(inst, z)
    table = [{"x": x, "phi": phi(inst.f, z, x), "support": support(inst.f.value(x), z)}
             for x in points]
    return {"zstar": z, "table": table, "p_zstar": sol.value, "status": sol.status,
            "minimizer": sol.x, "multiplier": sol.ystar}


def _verdict_doc(v) -> dict:
    return {"saddle": v.is_saddle, "condition_a": v.condition_a, "condition_b": v.condition_b,
            "inf_sup_equal": v.inf_sup_equal, "full": v.is_full, "solutions_and_zero_gap": v.solutions_and_zero_gap,
            "full_solutions_and_zero_gap": v.full_solutions_and_zero_gap, "universe": v.universe,
            "details": v.details}


def _segment_solution(args, doc: Document, candidate_text: str | None) -> dict:
    f = fixtures.segment_map()
    grid = _grid(args, doc) or (doc.payload.start, doc.payload.stop, doc.payload.step)
    universe = _grid_points(grid)
    candidate = _points_arg(candidate_text, 1, "--xbar")
    if candidate is None:
        candidate = [np.array([t]) for t in fixtures.SEGMENT_SOLUTION]
    ev = Evaluator(f)
    verdict = check_solution(ev, candidate, universe + candidate, "min")
    minimal = [x for x in universe if is_minimizer(ev, x, universe)]
    return {"candidate": candidate, "verdict": verdict, "grid": list(grid),
            "grid_minimal": minimal, "universe": f"grid-relative: {len(universe)} points"}


def _cmd_saddle(args, doc: Document) -> dict:
    if doc.kind == "segment-example":
        return _segment_solution(args, doc, args.xbar)
    inst = _problem(doc)
    report, delta = solve_strong(inst)
    if not report.p.is_proper:
        raise InputError(SCHEMA_VIOLATION, "problem", "saddle sets need a proper primal value")
    Xbar = _points_arg(args.xbar, inst.n, "--xbar")
    if Xbar is None:
        Xbar = primal_solution(inst, report.p)
    Vbar = [_pair_arg(t, inst) for t in args.vbar.split(";") if t.strip()] \
        if args.vbar is not None else delta.pairs
    rng = np.random.default_rng(args.seed)
    X_u, V_u = default_universes(inst, delta.pairs, rng)
    verdict = saddle_check(inst, Xbar, Vbar, X_u, V_u)
    return {"Xbar": Xbar, "Vbar": Vbar, **_verdict_doc(verdict)}


def _cmd_example(args) -> dict:
    if args.name == "running":
        return emit(fixtures.running_instance())
    if args.name == "psep":
        return emit(fixtures.psep_fixture())
    grid = parse_grid(args.grid) if args.grid is not None else (0.0, 5.0, 0.1)
    return emit(SegmentExample(*grid))


# verify ------------------------------------------------------------------------

class _Battery:
    def __init__(self, tol: float):
        self.tol = tol
        self.checks: list[dict] = []

    def record(self, name: str, ok: bool, count: int = 1, witness=None) -> None:
        entry = {"check": name, "passed": bool(ok), "count": count}
        if not ok:
            entry["witness"] = witness
        self.checks.append(entry)

    def close(self, lhs: float, rhs: float) -> bool:
        if math.isinf(lhs) or math.isinf(rhs):
            return lhs == rhs
        return abs(lhs - rhs) <= self.tol * max(1.0, abs(lhs), abs(rhs))

    def run(self, name: str, fn) -> None:
        try:
            fn()
        except VerificationError as exc:
            self.record(name, False, witness={"error": str(exc), "witness": exc.witness})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _verify_problem(inst, battery: _Battery, rng, samples: int, psep: PSepInstance | None) -> None:
    xs = random_feasible_points(inst, rng, samples)
    pairs = [random_dual_pair(inst, rng) for _ in range(samples)]

    def weak():
        rep = weak_duality_check(inst, list(zip(xs, pairs)))
        battery.record("weak duality (set and scalar forms)", rep.passed, rep.checked,
                       rep.violations[:1] + rep.disagreements[:1])

    def scalarized():
        bad, count = [], 0
        for x, pair in zip(xs, pairs):
            z, y = pair.zstar, pair.ystar
            count += 1
            a, b = phi(inst.f, z, x), support(inst.f.value(x), z)
            if not battery.close(a, b):
                bad.append({"what": "phi vs support of f(x)", "x": x, "zstar": z, "values": [a, b]})
            a, b = scalar_lagrangian(inst, z, x, y), support(lagrangian(inst, x, pair), z)
            if not battery.close(a, b):
                bad.append({"what": "scalar vs set Lagrangian", "x": x, "pair": pair, "values": [a, b]})
            xstar = rng.normal(size=inst.n)
            if len(inst.f.pieces) == 1:
                a, b = scalar_conjugate(inst.f, z, xstar), conjugate_offset(inst.f, xstar, z)
                if not battery.close(a, b):
                    bad.append({"what": "scalar vs set conjugate", "xstar": xstar, "zstar": z,
                                "values": [a, b]})
        battery.record("scalarization commutes with Lagrangian and conjugate", not bad, count, bad[:1])

    def strong():
        report, delta = solve_strong(inst)
        ok = report.strong or not report.slater
        battery.record("strong duality p = d", ok, 1,
                       {"gap": report.gap_certificate, "flags": report.flags})
        if not report.p.is_proper:
            return report, delta
        ok = len(delta) > 0 and all(all(in_delta(inst, report.p, e.pair, battery.tol))
                                    for e in delta.entries)
        battery.record("dual solution set nonempty, both characterizations hold", ok, len(delta),
                       delta.pairs)
        others = non_delta_pairs(inst, report.p, delta.pairs, rng, samples)
        mx = check_maximality(inst, report.p, delta.entries, others)
        battery.record("maximality on the dual solution set only", mx.passed, len(others),
                       mx.step_ii_violations[:1] + mx.step_iii_failures[:1])
        return report, delta

    def fenchel_moreau():
        if len(inst.f.pieces) != 1:
            return
        bad = []
        for x in xs[:5]:
            dirs = facet_directions(inst.f, x)
            if dirs and not equal(biconjugate(inst.f, x, dirs), inst.f.value(x)):
                bad.append({"x": x})
        battery.record("biconjugate reproduces f", not bad, min(5, len(xs)), bad[:1])

    battery.run("weak duality (set and scalar forms)", weak)
    battery.run("scalarization commutes with Lagrangian and conjugate", scalarized)
    box = {}
    battery.run("strong duality p = d", lambda: box.setdefault("r", strong()))
    battery.run("biconjugate reproduces f", fenchel_moreau)
    if "r" in box and box["r"][0].p.is_proper and box["r"][0].strong:
        report, delta = box["r"]

        def value_fm():
            vb = value_biconjugate(inst, delta.pairs)
            battery.record("value-function biconjugate at 0 equals d", equal(vb, report.d), 1,
                           {"biconjugate": vb, "d": report.d})

        def saddle():
            Xbar = primal_solution(inst, report.p)
            X_u, V_u = default_universes(inst, delta.pairs, rng)
            v = saddle_check(inst, Xbar, delta.pairs, X_u, V_u)
            battery.record("primal solution and dual solution set form a saddle set", v.is_saddle, 1,
                           _verdict_doc(v))

        battery.run("value-function biconjugate at 0 equals d", value_fm)
        battery.run("primal solution and dual solution set form a saddle set", saddle)
    if psep is not None:
        def identity():
            rows = psep_identity(psep)
            bad = [r for r in rows if not battery.close(r[1], r[2])]
            battery.record("separable value identity", not bad, len(rows), bad[:1])

        def decomposed():
            for _ in range(samples):
                v = -np.abs(rng.normal(size=psep.b.size))
                w = random_dual_pair(psep.instance, rng).zstar
                psep_dual(psep, v, w, check=True)
            battery.record("decomposed dual objective equals generic", True, samples)

        battery.run("separable value identity", identity)
        battery.run("decomposed dual objective equals generic", decomposed)


def _verify_segment(doc: Document, battery: _Battery) -> None:
    ex = doc.payload
    universe = _grid_points((ex.start, ex.stop, ex.step))
    f = fixtures.segment_map()
    bad = [x for x in universe if not equal(f.value(x), fixtures.segment_map_hrep(float(x[0])))]
    battery.record("evaluator agrees with the closed-form representation", not bad, len(universe),
                   bad[:1])
    ev = Evaluator(f)
    candidate = [np.array([t]) for t in fixtures.SEGMENT_SOLUTION]
    on_grid = all(any(np.array_equal(c, u) for u in universe) for c in candidate)
    if on_grid:
        verdict = check_solution(ev, candidate, universe, "min")
        battery.record("{0, 3} is a solution on the grid", verdict is not SolutionVerdict.NOT, 1,
                       verdict)
        single = check_solution(ev, candidate[:1], universe, "min")
        battery.record("{0} alone is not a solution", single is SolutionVerdict.NOT, 1, single)


def _cmd_verify(args, doc: Document) -> dict:
    tol = _tol(args, doc)
    battery = _Battery(tol)
    rng = np.random.default_rng(args.seed if args.seed is not None else doc.options.get("seed", 0))
    samples = doc.options.get("samples", 10)
    if doc.kind == "segment-example":
        _verify_segment(doc, battery)
    else:
        psep = doc.payload if isinstance(doc.payload, PSepInstance) else None
        _verify_problem(_problem(doc), battery, rng, samples, psep)
    out = {"passed": battery.passed, "checks": battery.checks}
    if not battery.passed:
        raise CheckFailed(out)
    return out


# ---------------------------------------------------------------------------
# entry points

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the result document here instead of stdout")
    common.add_argument("--tol", type=str, help="tolerance for reported comparisons")
    common.add_argument("--grid", help="parameter grid a:b:step")
    common.add_argument("--zstar", help="functional z* as comma-separated numbers")
    common.add_argument("--seed", type=int, default=0, help="random seed for sampled checks")
    parser = _Parser(prog="setlat", description="Set-valued convex optimization in complete lattices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("solve", parents=[common], help="primal and dual values with the dual solution set")
    p.add_argument("file")
    p = sub.add_parser("dual", parents=[common], help="dual objective h(y*, z*)")
    p.add_argument("file")
    p.add_argument("--ystar", help="multiplier y* as comma-separated numbers (default 0)")
    p.add_argument("--check-delta", action="store_true", help="also test membership in the dual solution set")
    p = sub.add_parser("scalarize", parents=[common], help="tables of the scalarization phi_{f,z*}")
    p.add_argument("file")
    p.add_argument("--x", help="points 'a,b;c,d' (default: grid or domain vertices)")
    p = sub.add_parser("saddle", parents=[common], help="saddle-set or solution verdicts")
    p.add_argument("file")
    p.add_argument("--xbar", help="primal candidates 'a,b;c,d'")
    p.add_argument("--vbar", help="dual candidates 'y1,y2|z1,z2;...'")
    p = sub.add_parser("example", parents=[common], help="write a fixture document")
    p.add_argument("name", choices=EXAMPLES)
    p = sub.add_parser("verify", parents=[common], help="run the property battery on a document")
    p.add_argument("file")
    p.set_defaults(seed=None)
    return parser


def _write(doc: dict, out: str | None, stream) -> None:
    text = dumps(doc)
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError("FILE_ERROR", out, exc.strerror or str(exc)) from None
    else:
        stream.write(text)


def run_command(argv, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = None
    try:
        args = build_parser().parse_args(list(argv))
        if args.command == "example":
            _write(_cmd_example(args), args.out, stdout)
            return EXIT_OK
        doc = load_document(args.file)
        handler = {"solve": _cmd_solve, "dual": _cmd_dual, "scalarize": _cmd_scalarize,
                   "saddle": _cmd_saddle, "verify": _cmd_verify}[args.command]
        payload = handler(args, doc)
        _write(_result(args.command, doc, _tol(args, doc), payload), args.out, stdout)
        return EXIT_OK
    except InputError as exc:
        stderr.write(dumps(exc.to_doc()))
        return EXIT_INPUT
    except ConeMembershipError as exc:
        stderr.write(dumps(InputError(NORMAL_OUTSIDE_DUAL_CONE, "input", str(exc)).to_doc()))
        return EXIT_INPUT
    except DimensionError as exc:
        stderr.write(dumps(InputError(DIMENSION_MISMATCH, "input", str(exc)).to_doc()))
        return EXIT_INPUT
    except CheckFailed as exc:
        doc = {"version": FORMAT_VERSION, "kind": "failure", "command": "verify",
               "result": jsonable(exc.doc)}
        _write(doc, getattr(args, "out", None), stdout)
        stderr.write("verification failed\n")
        return EXIT_CHECK
    except VerificationError as exc:
        stderr.write(dumps({"version": FORMAT_VERSION, "kind": "failure", "message": str(exc),
                            "witness": jsonable(exc.witness)}))
        return EXIT_CHECK
    except SetLatError as exc:
        stderr.write(dumps(InputError(SCHEMA_VIOLATION, "input", str(exc)).to_doc()))
        return EXIT_INPUT


def main(argv=None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
