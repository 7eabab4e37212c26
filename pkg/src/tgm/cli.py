"""``tgm`` command line: validate, translate, roundtrip, fold, unfold, export-dot, gen-instance.

Verdicts and other machine-readable results go to standard output as JSON;
a one-line human summary goes to standard error.  Exit status is 0 on
success, 1 when the input is well-formed but violates something (a schema
or instance violation, a failed round trip, an unsatisfiable schema) and 2
when an input file is missing or cannot be parsed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .abstraction import FoldReport, fold, load_grouping, unfold
from .dot import to_dot
from .errors import FrontendError, InvalidSchema, SupermodelError, TgmError, TypeSystemError, UnsatisfiableSchema
from .frontends import FRONTENDS
from .frontends.xsd import load_type_overrides
from .generate import gen_instance
from .instance import dump_instance, load_instance, validate_instance
from .schema import TypedGraphSchema, dump_schema, validate_schema
from .supermodel import (TranslationReport, check_information_preservation, dump_supermodel,
                         random_supermodel, supermodel_diff, translate, translate_inverse)
from .verdict import Verdict, Violation

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """A file is missing or does not parse; maps to exit status 2."""


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None


def _load_schema(path: str) -> tuple[TypedGraphSchema, dict]:
    doc = _read_json(path)
    try:
        return TypedGraphSchema.from_json(doc), doc
    except (TgmError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{path}: not a schema ({type(exc).__name__}: {exc})") from None


def _emit(payload: dict, summary: str) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    print(summary, file=sys.stderr)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def _verdict_exit(verdict: Verdict, what: str) -> int:
    n = len(verdict.violations)
    _emit(verdict.to_dict(), f"{what}: ok" if verdict.ok else f"{what}: {n} violation(s)")
    return EXIT_OK if verdict.ok else EXIT_VIOLATION


# subcommands

def cmd_validate(args) -> int:
    schema, _ = _load_schema(args.schema)
    verdict = validate_schema(schema)
    if not verdict.ok or args.instance is None:
        return _verdict_exit(verdict, f"schema {args.schema}")
    try:
        g = load_instance(args.instance, schema)
    except OSError as exc:
        raise InputError(f"{args.instance}: {exc.strerror}") from None
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError, ValueError) as exc:
        raise InputError(f"{args.instance}: not an instance ({exc})") from None
    return _verdict_exit(validate_instance(g), f"instance {args.instance}")


def _lift(args):
    fe = FRONTENDS[args.source_model]
    if not os.path.exists(args.input):
        raise InputError(f"{args.input}: no such file")
    parsed = fe.load(args.input)
    options = {}
    if getattr(args, "type_overrides", None):
        if args.source_model != "xsd":
            raise InputError("--type-overrides applies to --from xsd only")
        options["type_overrides"] = load_type_overrides(args.type_overrides)
    return fe, parsed, fe.lift(parsed, **options)


def cmd_translate(args) -> int:
    _, _, sm = _lift(args)
    tgs, report = translate(sm)
    verdict = validate_schema(tgs)
    _write(args.output, dump_schema(tgs))
    report_path = args.report
    if report_path is None and args.output not in (None, "-"):
        report_path = str(Path(args.output).with_suffix("")) + ".report.json"
    if report_path is not None:
        _write(report_path, json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    if args.supermodel:
        _write(args.supermodel, dump_supermodel(sm))
    summary = (f"translated {args.input}: {len(tgs.node_types)} node type(s), "
               f"{len(tgs.edge_types)} edge type(s), {len(report.steps)} step(s)")
    print(summary if verdict.ok else summary + f"; {len(verdict.violations)} schema violation(s)", file=sys.stderr)
    return EXIT_OK if verdict.ok else EXIT_VIOLATION


def _roundtrip_one(sm, report: TranslationReport | None = None) -> Verdict:
    if report is None:
        return check_information_preservation(sm)
    tgs, _ = translate(sm)
    try:
        back = translate_inverse(tgs, report)
    except TgmError as exc:
        return Verdict.of([Violation(type(exc).__name__, sm.source_model, str(exc))])
    return Verdict.of(supermodel_diff(sm, back))


def cmd_roundtrip(args) -> int:
    if args.random is not None:
        found = []
        for seed in range(args.seed, args.seed + args.random):
            found.extend(v.prefixed(f"seed {seed}/") for v in _roundtrip_one(random_supermodel(seed)).violations)
        verdict = Verdict.of(found)
        return _verdict_exit(verdict, f"roundtrip of {args.random} random schemas")
    if args.source_model is None or args.input is None:
        raise InputError("roundtrip needs --from and an input file, or --random N")
    fe, parsed, sm = _lift(args)
    report = None
    if args.report is not None:
        try:
            report = TranslationReport.from_json(_read_json(args.report))
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise InputError(f"{args.report}: not a translation report ({exc})") from None
    verdict = _roundtrip_one(sm, report)
    if verdict.ok and report is None:
        tgs, rep = translate(sm)
        again = fe.lower(translate_inverse(tgs, rep))
        if again.canonical() != parsed.canonical():
            verdict = Verdict.of([Violation("SourceStructure", args.input,
                                            "lowering the recovered supermodel does not reproduce the source")])
    return _verdict_exit(verdict, f"roundtrip {args.input}")


def cmd_fold(args) -> int:
    schema, _ = _load_schema(args.schema)
    if not validate_schema(schema).ok:
        return _verdict_exit(validate_schema(schema), f"schema {args.schema}")
    try:
        spec = load_grouping(args.groups)
    except OSError as exc:
        raise InputError(f"{args.groups}: {exc.strerror}") from None
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError, ValueError) as exc:
        raise InputError(f"{args.groups}: not a grouping spec ({exc})") from None
    folded, report = fold(schema, spec)
    _write(args.output, dump_schema(folded, extra={"fold_report": report.to_json()}))
    print(f"folded {args.schema}: {len(spec.groups)} group(s), {len(report.merged_edges)} merged edge(s)",
          file=sys.stderr)
    return EXIT_OK


def cmd_unfold(args) -> int:
    schema, doc = _load_schema(args.schema)
    report = FoldReport.from_json(doc["fold_report"]) if "fold_report" in doc and not args.lossy else None
    result = unfold(schema, args.group, report)
    extra = None
    if report is not None and any(n.nested_schema is not None for n in result.node_types.values()):
        extra = {"fold_report": doc["fold_report"]}
    _write(args.output, dump_schema(result, extra=extra))
    print(f"unfolded {args.group}" + ("" if report else " without a fold report (lossy)"), file=sys.stderr)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    schema, _ = _load_schema(args.schema)
    verdict = validate_schema(schema)
    if not verdict.ok:
        _emit(verdict.to_dict(), f"schema {args.schema}: invalid, nothing exported")
        return EXIT_INPUT
    _write(args.output, to_dot(schema))
    return EXIT_OK


def cmd_gen_instance(args) -> int:
    schema, _ = _load_schema(args.schema)
    verdict = validate_schema(schema)
    if not verdict.ok:
        return _verdict_exit(verdict, f"schema {args.schema}")
    try:
        g = gen_instance(schema, seed=args.seed, size=args.size)
    except UnsatisfiableSchema as exc:
        _emit({"ok": False, "violations": [{"rule": "UnsatisfiableSchema", "element": args.schema,
                                            "message": str(exc)}]}, f"gen-instance: {exc}")
        return EXIT_VIOLATION
    ref = args.schema
    if args.output not in (None, "-"):
        ref = os.path.relpath(os.path.abspath(args.schema), os.path.dirname(os.path.abspath(args.output)))
    _write(args.output, dump_instance(g, schema_ref=ref))
    print(f"generated {len(g.nodes)} node(s), {len(g.edges)} edge(s) with seed {args.seed}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tgm", description="Typed graph schemas, instances and schema translation.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate a schema, and optionally an instance against it")
    v.add_argument("--schema", required=True)
    v.add_argument("--instance")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("translate", help="translate a source schema into a typed graph schema")
    t.add_argument("--from", dest="source_model", required=True, choices=sorted(FRONTENDS))
    t.add_argument("input")
    t.add_argument("--output", help="schema file (default: standard output)")
    t.add_argument("--report", help="translation report file (default: next to --output)")
    t.add_argument("--supermodel", help="also write the intermediate supermodel schema")
    t.add_argument("--type-overrides", help="JSON file or name=type pairs, e.g. price=euro (xsd only)")
    t.set_defaults(func=cmd_translate)

    r = sub.add_parser("roundtrip", help="check that translation is information preserving")
    r.add_argument("--from", dest="source_model", choices=sorted(FRONTENDS))
    r.add_argument("input", nargs="?")
    r.add_argument("--report", help="replay this report instead of the one just produced")
    r.add_argument("--random", type=int, metavar="N", help="check N generated supermodel schemas instead")
    r.add_argument("--seed", type=int, default=0, help="first seed for --random")
    r.add_argument("--type-overrides")
    r.set_defaults(func=cmd_roundtrip)

    f = sub.add_parser("fold", help="fold node-type groups into hyper-nodes")
    f.add_argument("--schema", required=True)
    f.add_argument("--groups", required=True)
    f.add_argument("--output")
    f.set_defaults(func=cmd_fold)

    u = sub.add_parser("unfold", help="expand one hyper-node of a folded schema")
    u.add_argument("--schema", required=True)
    u.add_argument("--group", required=True)
    u.add_argument("--output")
    u.add_argument("--lossy", action="store_true", help="ignore the embedded fold report")
    u.set_defaults(func=cmd_unfold)

    d = sub.add_parser("export-dot", help="render a schema as Graphviz DOT")
    d.add_argument("--schema", required=True)
    d.add_argument("--output")
    d.set_defaults(func=cmd_export_dot)

    g = sub.add_parser("gen-instance", help="generate a valid witness instance")
    g.add_argument("--schema", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", type=int, default=10)
    g.add_argument("--output")
    g.set_defaults(func=cmd_gen_instance)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FrontendError, TypeSystemError, InvalidSchema) as exc:
        _emit({"ok": False, "error": type(exc).__name__, "message": str(exc)}, f"error: {exc}")
        return EXIT_INPUT
    except (SupermodelError, TgmError) as exc:
        _emit({"ok": False, "error": type(exc).__name__, "message": str(exc)}, f"error: {exc}")
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
