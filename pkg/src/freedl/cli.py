"""Command-line interface: ``freedl <command> ...``.

Every command prints a JSON result document with sorted keys (``reduce`` and
``minsky encode --text`` print concrete syntax instead). The exit status is 0
whenever the analysis completed, whatever the verdict, and 2 for usage,
parse, schema and I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .grammar import ParseError, parse_concept, parse_formula, pretty
from .io import (
    SchemaError,
    certificate_from_doc,
    certificate_to_doc,
    dumps,
    load_json,
    load_model,
    model_to_doc,
    parse_machine,
)
from .minsky import CapExceeded, build_trace, decode_trace, encode, encode_families, run_machine
from .quasimodel import (
    SAT,
    SearchConfig,
    condition_summary,
    extract_model,
    search_quasimodel,
    verify_quasimodel,
)
from .reductions import (
    PipelineOptions,
    added_axioms,
    eliminate_iota,
    run_pipeline,
)
from .semantics import FiniteTrace, formula_sat, is_ghost, satisfying_states
from .syntax import (
    LTLF,
    S5,
    Concept,
    LogicError,
    concept_goal,
    conjoin,
    desugar_assertions,
    internalize,
    resolve_logic,
    signature_of,
)

ENCODER_DEVIATION = (
    "state cover and state disjointness range over q0..qL so that they agree with the initial-state axiom"
)


class CliError(Exception):
    """Usage, parse or I/O problem; reported on stderr with exit status 2."""


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def _parse_input(text: str, as_concept: bool):
    """A formula, or a concept when ``as_concept`` is set or formula parsing fails."""
    if as_concept:
        return parse_concept(text)
    try:
        return parse_formula(text)
    except ParseError as formula_error:
        try:
            return parse_concept(text)
        except ParseError:
            raise formula_error from None


def _emit(doc: dict) -> int:
    sys.stdout.write(dumps(doc))
    return 0


# -------------------------------------------------------------- check-sat


def cmd_check_sat(args) -> int:
    parsed = _parse_input(_read(args.file), args.concept)
    goal = concept_goal(parsed) if isinstance(parsed, Concept) else parsed
    logic = resolve_logic(goal, args.logic)
    if logic == LTLF:
        raise CliError(
            "satisfiability of temporal formulas without the RDA is undecidable; "
            "check a concrete trace with 'freedl mc' instead"
        )
    opts = PipelineOptions(args.semantics, args.rda, S5)
    started = time.perf_counter()
    result = run_pipeline(goal, opts)
    cfg = SearchConfig(args.max_worlds, args.max_runs, args.node_ceiling)
    verdict = search_quasimodel(result.concept, cfg)
    elapsed = time.perf_counter() - started
    doc = {
        "command": "check-sat",
        "verdict": verdict.status,
        "semantics": args.semantics,
        "rda": args.rda,
        "logic": logic,
        "caps": {"max_worlds": cfg.max_worlds, "max_runs": cfg.max_runs, "node_ceiling": cfg.node_ceiling},
        "closure_size": verdict.stats.get("closure"),
        "types": verdict.stats.get("types"),
        "surviving_types": verdict.stats.get("surviving_types"),
        "nodes": verdict.nodes,
        "note": verdict.note,
        "fresh_symbols": sorted(result.report.fresh_concepts | result.report.fresh_individuals),
    }
    if args.timing:
        doc["seconds"] = round(elapsed, 6)
    if verdict.status == SAT:
        model = extract_model(verdict.certificate)
        check = conjoin([goal] + added_axioms(result.original_signature.individuals, opts, S5))
        worlds = satisfying_states(model, check)
        doc["model_check"] = bool(worlds)
        doc["witness_world"] = worlds[0] if worlds else None
        doc["model"] = model_to_doc(model, args.show_internal)
        doc["ghosts"] = sorted(
            a for a in result.original_signature.individuals if is_ghost(model, a)
        )
        doc["certificate"] = certificate_to_doc(verdict.certificate)
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            cert_path = os.path.join(args.out_dir, "certificate.json")
            model_path = os.path.join(args.out_dir, "model.json")
            _write(cert_path, dumps(certificate_to_doc(verdict.certificate)))
            _write(model_path, dumps(model_to_doc(model, args.show_internal)))
            doc["files"] = {"certificate": cert_path, "model": model_path}
    return _emit(doc)


# ---------------------------------------------------------------------- mc


def cmd_mc(args) -> int:
    model = load_model(args.model)
    parsed = _parse_input(_read(args.formula), args.concept)
    goal = concept_goal(parsed) if isinstance(parsed, Concept) else parsed
    resolve_logic(goal, model.logic)
    if not 0 <= args.at < len(model.states):
        raise CliError(f"--at {args.at} is outside 0..{len(model.states) - 1}")
    value = formula_sat(model, args.at, goal)
    return _emit({"command": "mc", "verdict": "true" if value else "false", "at": args.at, "kind": model.kind})


# ------------------------------------------------------------------ reduce


def reduce_stage(formula, stage: str, opts: PipelineOptions):
    logic = resolve_logic(formula, opts.logic)
    out = desugar_assertions(formula)
    if stage == "desugar":
        return out
    original = signature_of(out)
    out, _ = eliminate_iota(out, logic)
    if stage == "iota":
        return out
    names = original.individuals
    if stage == "total":
        return conjoin([out] + added_axioms(names, PipelineOptions("total", False, logic), logic))
    if stage == "rda":
        return conjoin([out] + added_axioms(names, PipelineOptions(opts.semantics, True, logic), logic))
    axioms = added_axioms(names, opts, logic)
    if axioms:
        out = conjoin([out] + axioms)
    return internalize(out, logic)


def cmd_reduce(args) -> int:
    parsed = _parse_input(_read(args.file), args.concept)
    formula = concept_goal(parsed) if isinstance(parsed, Concept) else parsed
    opts = PipelineOptions(args.semantics, args.rda, args.logic)
    sys.stdout.write(pretty(reduce_stage(formula, args.stage, opts)) + "\n")
    return 0


# ---------------------------------------------------------------------- qm


def cmd_qm(args) -> int:
    try:
        qm = certificate_from_doc(load_json(args.certificate))
    except ParseError as exc:
        raise SchemaError(f"certificate concept: {exc}") from None
    root = None
    if args.formula:
        parsed = _parse_input(_read(args.formula), False)
        goal = concept_goal(parsed) if isinstance(parsed, Concept) else parsed
        root = run_pipeline(goal, PipelineOptions(args.semantics, args.rda, S5)).concept
        if root != qm.closure.root:
            raise CliError("the certificate was not built for this formula")
    violations = verify_quasimodel(qm, root)
    summary = condition_summary(violations)
    doc = {
        "command": f"qm {args.action}",
        "verdict": "accepted" if not violations else "rejected",
        "conditions": {c: "pass" if ok else "fail" for c, ok in summary.items()},
        "violations": [
            {"condition": v.condition, "message": v.message, "world": v.world} for v in violations
        ],
    }
    if args.action == "extract" and not violations:
        model = extract_model(qm)
        mdoc = model_to_doc(model, args.show_internal)
        if args.out:
            _write(args.out, dumps(mdoc))
            doc["file"] = args.out
        else:
            doc["model"] = mdoc
    return _emit(doc)


# ------------------------------------------------------------------ minsky


def _configs(comp) -> list:
    return [list(c.as_tuple()) for c in comp.configurations]


def cmd_minsky(args) -> int:
    machine = parse_machine(_read(args.machine))
    if args.action == "simulate":
        res = run_machine(machine, args.steps)
        halted = not isinstance(res, CapExceeded)
        comp = res if halted else res.prefix
        return _emit({
            "command": "minsky simulate",
            "verdict": "accepted" if halted else "unknown",
            "halted": halted,
            "steps": len(comp) - 1,
            "configurations": _configs(comp),
        })
    if args.action == "encode":
        chi = encode(machine)
        if args.out:
            _write(args.out, pretty(chi) + "\n")
        doc = {
            "command": "minsky encode",
            "families": [{"label": label, "formula": pretty(f)} for label, f in encode_families(machine)],
            "deviations": [ENCODER_DEVIATION],
        }
        if args.out:
            doc["file"] = args.out
        else:
            doc["formula"] = pretty(chi)
        return _emit(doc)
    if args.action == "build-trace":
        res = run_machine(machine, args.steps)
        if isinstance(res, CapExceeded):
            return _emit({
                "command": "minsky build-trace",
                "verdict": "unknown",
                "note": f"no halting computation within {args.steps} steps",
            })
        trace = build_trace(machine, res)
        tdoc = model_to_doc(trace)
        doc = {
            "command": "minsky build-trace",
            "verdict": "accepted",
            "length": len(trace.states),
            "encoding_holds": formula_sat(trace, 0, encode(machine)),
        }
        if args.out:
            _write(args.out, dumps(tdoc))
            doc["file"] = args.out
        else:
            doc["trace"] = tdoc
        return _emit(doc)
    trace = load_model(args.trace)
    if not isinstance(trace, FiniteTrace):
        raise SchemaError("decode expects a trace document")
    res = decode_trace(machine, trace)
    doc = {"command": "minsky decode", "verdict": "accepted" if res.accepted else "rejected"}
    if res.accepted:
        doc["configurations"] = _configs(res.computation)
    else:
        doc.update(reason=res.reason, instant=res.instant)
    return _emit(doc)


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freedl", description="Free description logic workbench.")
    p.add_argument("--version", action="version", version=f"freedl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def semantics_flags(sp):
        sp.add_argument("--semantics", choices=("partial", "total"), default="partial")
        sp.add_argument("--rda", action="store_true", help="assume rigid designators")

    cs = sub.add_parser("check-sat", help="decide S5 satisfiability of a formula or concept")
    cs.add_argument("file")
    cs.add_argument("--concept", action="store_true", help="read the file as a concept")
    semantics_flags(cs)
    cs.add_argument("--logic", choices=(S5, LTLF), default=None)
    cs.add_argument("--max-worlds", type=int, default=3)
    cs.add_argument("--max-runs", type=int, default=3)
    cs.add_argument("--node-ceiling", type=int, default=2_000_000)
    cs.add_argument("--out-dir")
    cs.add_argument("--show-internal", action="store_true")
    cs.add_argument("--timing", action="store_true")
    cs.set_defaults(func=cmd_check_sat)

    mc = sub.add_parser("mc", help="model-check a formula on a model or trace")
    mc.add_argument("model")
    mc.add_argument("formula")
    mc.add_argument("--at", type=int, default=0)
    mc.add_argument("--concept", action="store_true")
    mc.set_defaults(func=cmd_mc)

    rd = sub.add_parser("reduce", help="print the output of a reduction stage")
    rd.add_argument("file")
    rd.add_argument("--stage", choices=("desugar", "iota", "total", "rda", "internalize", "all"), default="all")
    rd.add_argument("--concept", action="store_true")
    semantics_flags(rd)
    rd.add_argument("--logic", choices=(S5, LTLF), default=None)
    rd.set_defaults(func=cmd_reduce)

    qm = sub.add_parser("qm", help="verify a quasimodel certificate or extract its model")
    qm.add_argument("action", choices=("verify", "extract"))
    qm.add_argument("certificate")
    qm.add_argument("formula", nargs="?")
    semantics_flags(qm)
    qm.add_argument("--out")
    qm.add_argument("--show-internal", action="store_true")
    qm.set_defaults(func=cmd_qm)

    mk = sub.add_parser("minsky", help="two-counter machine tools")
    mk.add_argument("action", choices=("simulate", "encode", "build-trace", "decode"))
    mk.add_argument("machine")
    mk.add_argument("trace", nargs="?")
    mk.add_argument("--steps", type=int, default=10_000)
    mk.add_argument("--out")
    mk.set_defaults(func=cmd_minsky)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "action", None) == "decode" and not args.trace:
        parser.error("minsky decode needs a trace file")
    if getattr(args, "steps", 1) < 1:
        parser.error("--steps must be at least 1")
    try:
        return args.func(args)
    except (CliError, ParseError, SchemaError, LogicError) as exc:
        print(f"freedl: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"freedl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
