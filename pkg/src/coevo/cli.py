"""Batch command line interface over the engine, for scripting and CI.

Every command is a thin wrapper: the files it writes are the byte-exact
serializations of the corresponding engine-level results, so identical
invocations on identical inputs produce identical outputs and exit codes.
Exit codes: 0 success, 1 user/engine error, 2 internal error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from .bench import bench_inverse
from .case import (CASE_REGISTRY, build_case_history, case_metamodels,
                   gen_fixture, run_case)
from .conformance import check_conformance
from .errors import EngineError
from .history import (apply_operation, create_history, load_history, migrate,
                      release, save_history)
from .metamodel import MetamodelSet, load_metamodel
from .model import load_model, models_isomorphic, save_model


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _load_metamodel_set(paths: list[str]) -> MetamodelSet:
    return MetamodelSet([load_metamodel(_read(p)) for p in paths])


def _parse_bindings(pairs: list[str]) -> dict:
    bindings = {}
    for pair in pairs:
        if "=" not in pair:
            raise EngineError(f"--bind expects name=value, got {pair!r}")
        name, value = pair.split("=", 1)
        bindings[name] = value
    return bindings


def _cmd_history_init(args) -> int:
    history = create_history(_load_metamodel_set(args.metamodel), CASE_REGISTRY)
    _write(args.output, save_history(history))
    return 0


def _cmd_history_release(args) -> int:
    history = load_history(_read(args.history), CASE_REGISTRY)
    release(history, force=args.force)
    _write(args.output or args.history, save_history(history))
    return 0


def _cmd_history_apply(args) -> int:
    history = load_history(_read(args.history), CASE_REGISTRY)
    models = [load_model(_read(p), history.metamodels) for p in args.model]
    apply_operation(history, models, args.name, _parse_bindings(args.bind))
    _write(args.output or args.history, save_history(history))
    for path, model in zip(args.model, models):
        _write(path, save_model(model))
    return 0


def _cmd_history_migrate(args) -> int:
    history = load_history(_read(args.history), CASE_REGISTRY)
    source = load_model(_read(args.model), history.metamodels)
    report: list[str] = []
    migrated = migrate([source], history, from_release=args.from_release,
                       to_release=args.to_release, report=report)
    _write(args.output, save_model(migrated[0]))
    for line in report:
        print(line)
    return 0


def _cmd_model_check(args) -> int:
    metamodels = _load_metamodel_set(args.metamodel)
    model = load_model(_read(args.model), metamodels)
    violations = check_conformance(model, metamodels)
    for v in violations:
        print(f"{v.rule}: {v.message}")
    if violations:
        return 1
    print("conforming")
    return 0


def _cmd_model_diff(args) -> int:
    metamodels = _load_metamodel_set(args.metamodel)
    left = load_model(_read(args.left), metamodels)
    right = load_model(_read(args.right), metamodels)
    if models_isomorphic(left, right):
        print("isomorphic")
        return 0
    print("different")
    return 1


def _cmd_case_run(args) -> int:
    model = load_model(_read(args.model), case_metamodels())
    statemachine, report = run_case(model)
    _write(args.output, save_model(statemachine))
    for line in report:
        print(line)
    return 0


def _cmd_case_gen(args) -> int:
    model = gen_fixture(args.states, args.transitions, args.pad, args.seed)
    _write(args.output, save_model(model))
    return 0


def _cmd_bench_inverse(args) -> int:
    report = bench_inverse(args.size, args.queries, args.seed)
    for line in report.lines():
        print(line)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coevo",
        description="coupled evolution of metamodels and models")
    sub = parser.add_subparsers(dest="command", required=True)

    history = sub.add_parser("history", help="history file operations")
    hsub = history.add_subparsers(dest="subcommand", required=True)

    p = hsub.add_parser("init", help="create a history over metamodel files")
    p.add_argument("--metamodel", action="append", required=True,
                   help="metamodel file (repeatable)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_history_init)

    p = hsub.add_parser("release", help="seal the open release")
    p.add_argument("--history", required=True)
    p.add_argument("--force", action="store_true",
                   help="allow releasing an empty change set")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_history_release)

    def _add_apply_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--history", required=True)
        p.add_argument("--name", required=True, help="operation name")
        p.add_argument("--bind", action="append", default=[],
                       metavar="PARAM=VALUE")
        p.add_argument("--model", action="append", default=[],
                       help="model file migrated in place (repeatable)")
        p.add_argument("-o", "--output")
        p.set_defaults(func=_cmd_history_apply)

    _add_apply_args(hsub.add_parser("apply", help="apply a reusable operation"))

    p = hsub.add_parser("migrate", help="replay the history over a model")
    p.add_argument("--history", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--from", dest="from_release", type=int, default=0)
    p.add_argument("--to", dest="to_release", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_history_migrate)

    # `op apply` mirrors `history apply`
    op = sub.add_parser("op", help="alias namespace for operations")
    osub = op.add_subparsers(dest="subcommand", required=True)
    _add_apply_args(osub.add_parser("apply", help="apply a reusable operation"))

    model = sub.add_parser("model", help="model file operations")
    msub = model.add_subparsers(dest="subcommand", required=True)

    p = msub.add_parser("check", help="report conformance violations")
    p.add_argument("--model", required=True)
    p.add_argument("--metamodel", action="append", required=True)
    p.set_defaults(func=_cmd_model_check)

    p = msub.add_parser("diff", help="compare two models up to isomorphism")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--metamodel", action="append", required=True)
    p.set_defaults(func=_cmd_model_diff)

    case = sub.add_parser("case", help="the statemachine extraction case")
    csub = case.add_subparsers(dest="subcommand", required=True)

    p = csub.add_parser("run", help="extract the statemachine from a java model")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_case_run)

    p = csub.add_parser("gen", help="generate a seeded java fixture model")
    p.add_argument("--states", type=int, default=3)
    p.add_argument("--transitions", type=int, default=1)
    p.add_argument("--pad", type=int, default=0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_case_gen)

    bench = sub.add_parser("bench", help="micro benchmarks")
    bsub = bench.add_subparsers(dest="subcommand", required=True)
    p = bsub.add_parser("inverse", help="forward reads vs inverse navigation")
    p.add_argument("--size", type=int, default=10000)
    p.add_argument("--queries", type=int, default=10000)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=_cmd_bench_inverse)

    p = sub.add_parser("serve", help="run the operation browser service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8646)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
