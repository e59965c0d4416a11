"""Command-line interface: ``stitlab eval|validate|prove|search|fuzz``.

Exit codes: 0 success (true / valid / accepted / found / all pass),
1 negative outcome, 2 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from . import __version__
from .formula import FormulaError, Neg, agents_of, desugar, parse, to_text
from .generate import BoundsTooLarge, ModelBounds
from .model import ModelError, Point, dump_model, load_model, validate
from .proof import EmptyProof, ProofError, check_proof, parse_proof
from .search import (DEFAULT_MAX_FAMILY, DEFAULT_MAX_MOMENTS, DEFAULT_PROPS,
                     default_bounds, find_countermodel)
from .semantics import EvaluationError, Evaluator, evaluate, extension
from .soundness import FORMULA_POOL, FUZZ_BOUNDS, fuzz

log = logging.getLogger("stitlab")

FAULTS = {"drop-clause-ii": Evaluator(drop_clause_ii=True)}


class CliError(Exception):
    pass


def _emit(args, payload: dict, text_lines: List[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, default=str))
    else:
        for line in text_lines:
            print(line)


def _parse_point(spec: str) -> Point:
    if ":" in spec:
        moment, hist = spec.rsplit(":", 1)
    elif "/" in spec:
        moment, hist = spec.rsplit("/", 1)
    else:
        raise CliError(f"point must be MOMENT:HINDEX, got {spec!r}")
    hist = hist[1:] if hist.startswith("h") else hist
    try:
        return Point(moment, int(hist))
    except ValueError:
        raise CliError(f"bad history index in point {spec!r}") from None


def _agents_flag(value: Optional[str]):
    if not value:
        return None
    return tuple(a.strip() for a in value.split(",") if a.strip())


def _load(path):
    if not path:
        raise CliError("--model FILE is required")
    return load_model(path)


def _points(prop) -> List[str]:
    return [str(p) for p in sorted(prop)]


# ---------------------------------------------------------------------------
# commands

def cmd_eval(args) -> int:
    model = _load(args.model)
    if not args.formula:
        raise CliError("--formula is required")
    report = validate(model)
    if report:
        if not args.force:
            raise CliError("model does not validate (use --force to evaluate anyway): "
                           + "; ".join(v.message for v in report))
        print("warning: evaluating a model that does not validate", file=sys.stderr)
    surface = parse(args.formula, model.agents)
    f = desugar(surface)
    pt = None
    if args.point:
        pt = _parse_point(args.point)
        if not model.is_point(pt):
            raise CliError(f"{pt} is not a moment-history pair of the model")
    elif not args.extension:
        raise CliError("--point is required unless --extension is given")
    for line in model.history_table():
        print(line, file=sys.stderr)
    payload = {"formula": to_text(surface)}
    lines = []
    value = None
    if pt is not None:
        res = evaluate(model, pt, f, trace=args.trace)
        value = res.value
        payload.update(point=str(pt), value=value)
        lines.append("true" if value else "false")
        if args.trace:
            payload["trace"] = res.trace.lines()
            lines.extend(res.trace.lines())
    if args.extension:
        ext = _points(extension(model, f))
        payload["extension"] = ext
        lines.append("extension: {" + ", ".join(ext) + "}")
    _emit(args, payload, lines)
    if value is None:
        return 0
    return 0 if value else 1


def cmd_validate(args) -> int:
    model = _load(args.model)
    report = validate(model)
    try:
        table = model.history_table()
    except ModelError:
        table = []
    payload = {"ok": report.ok, "histories": table,
               "violations": [v.to_dict() for v in report]}
    lines = ["OK" if report.ok else f"{len(report)} violation(s)"]
    lines += [f"  {v.condition}: {v.message}" for v in report]
    lines += table
    _emit(args, payload, lines)
    return 0 if report.ok else 1


def cmd_prove(args) -> int:
    with open(args.proof) as fh:
        text = fh.read()
    proof = parse_proof(text, _agents_flag(args.agents))
    verdict = check_proof(proof)
    payload = {"accepted": verdict.accepted}
    if verdict.accepted:
        payload.update(formula=to_text(verdict.surface or verdict.formula),
                       premises=[to_text(p) for p in verdict.premises],
                       premise_free=verdict.premise_free)
        lines = [f"Accepted: {to_text(verdict.surface or verdict.formula)}"]
        if verdict.premise_free:
            lines.append("premise-free theorem")
        else:
            lines.append("from premises: " + " ; ".join(to_text(p) for p in verdict.premises))
    else:
        payload.update(line=verdict.line, reason=verdict.reason)
        lines = [f"Rejected at line {verdict.line}: {verdict.reason}"]
    _emit(args, payload, lines)
    return 0 if verdict.accepted else 1


def _search_bounds(args, f):
    declared = _agents_flag(args.agents)
    bounds = default_bounds(f, max_moments=args.max_moments, max_family=args.max_family,
                            props=args.props, unsafe=args.unsafe_bounds)
    if declared:
        missing = set(agents_of(f)) - set(declared)
        if missing:
            raise CliError(f"formula uses undeclared agents {sorted(missing)}")
        bounds = ModelBounds(max_moments=bounds.max_moments, max_agents=len(declared),
                             min_agents=1, agent_names=declared,
                             variables=bounds.variables, max_family=bounds.max_family,
                             props=bounds.props, pool=bounds.pool, unsafe=bounds.unsafe)
    return bounds


def cmd_search(args) -> int:
    if not args.formula:
        raise CliError("--formula is required")
    surface = parse(args.formula, _agents_flag(args.agents))
    f = desugar(surface)
    bounds = _search_bounds(args, f)
    result = find_countermodel(f, bounds)
    if result:
        model, pt = result.model, result.point
        data = json.loads(dump_model(model))
        data["point"] = list(pt)
        data["formula"] = to_text(surface)
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(data, fh, indent=2)
                fh.write("\n")
        payload = {"found": True, "point": str(pt), "examined": result.examined,
                   "histories": model.history_table(), "model": data}
        lines = [f"countermodel found: {to_text(surface)} fails at {pt}",
                 f"models examined: {result.examined}"]
        lines += model.history_table()
        if args.out:
            lines.append(f"written to {args.out}")
        else:
            lines.append(json.dumps(data, indent=2))
        _emit(args, payload, lines)
        return 0
    payload = {"found": False, "examined": result.examined,
               "bounds": result.bounds.describe()}
    lines = ["NotFound: no countermodel within bounds",
             f"models examined: {result.examined}",
             "bounds: " + json.dumps(result.bounds.describe())]
    _emit(args, payload, lines)
    return 1


def cmd_fuzz(args) -> int:
    if args.count < 0:
        raise CliError("--count must be nonnegative")
    if args.count == 0:
        print("warning: --count 0 checks nothing", file=sys.stderr)
    bounds = ModelBounds(max_moments=args.max_moments, max_agents=FUZZ_BOUNDS.max_agents,
                         variables=FUZZ_BOUNDS.variables, max_family=args.max_family,
                         props=args.props, pool=FORMULA_POOL, unsafe=args.unsafe_bounds)
    evaluator = FAULTS[args.inject_fault] if args.inject_fault else Evaluator()
    report = fuzz(args.count, args.seed, bounds, evaluator=evaluator)
    payload = {"models": report.models, "checks": report.checks,
               "failures": len(report.failures), "per_kind": report.per_kind,
               "ok": report.ok}
    if report.ok:
        lines = [f"all axiom instances valid ({report.checks} checks on "
                 f"{report.models} models, seed {args.seed})"]
    else:
        first = report.failures[0]
        payload["first_counterexample"] = {
            "kind": first.kind, "formula": to_text(first.formula),
            "point": str(first.point), "model": json.loads(dump_model(first.model))}
        lines = [f"FAILED: {len(report.failures)}+ failing checks out of {report.checks}",
                 f"first counterexample: {first.kind} instance {to_text(first.formula)} "
                 f"fails at {first.point}",
                 dump_model(first.model)]
    _emit(args, payload, lines)
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    def bounds(max_moments, max_family, props):
        # a fresh parent per subcommand: parents share their action objects
        b = argparse.ArgumentParser(add_help=False)
        b.add_argument("--max-moments", type=int, default=max_moments)
        b.add_argument("--max-family", type=int, default=max_family)
        b.add_argument("--props", choices=("all", "definable", "auto"), default=props)
        b.add_argument("--unsafe-bounds", action="store_true",
                       help="lift the hard caps on model size")
        return b

    parser = argparse.ArgumentParser(prog="stitlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a formula on a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--point", help="MOMENT:HINDEX, e.g. m0:0")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--extension", action="store_true")
    p.add_argument("--force", action="store_true",
                   help="evaluate even if the model fails validation")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("validate", parents=[common], help="check a model's frame conditions")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("prove", parents=[common], help="check a proof file")
    p.add_argument("proof")
    p.add_argument("--agents")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("search", parents=[common, bounds(DEFAULT_MAX_MOMENTS, DEFAULT_MAX_FAMILY, DEFAULT_PROPS)],
                       help="bounded countermodel search")
    p.add_argument("--formula", required=True)
    p.add_argument("--agents")
    p.add_argument("--out", help="write the countermodel to this file")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fuzz", parents=[common, bounds(FUZZ_BOUNDS.max_moments,
                                                      FUZZ_BOUNDS.max_family,
                                                      FUZZ_BOUNDS.props)],
                       help="soundness fuzzing")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", choices=sorted(FAULTS),
                   help="run against a deliberately broken evaluator (self-test)")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, FormulaError, ModelError, ProofError, EvaluationError,
            OSError, EmptyProof, BoundsTooLarge) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
