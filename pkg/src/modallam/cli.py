"""Command-line surface: infer / check / eval / tree / corpus.

Exit codes: 0 success, 1 the requested predicate or check failed on some
input, 2 parse error or ill-formed goal type, 3 unification branch cap hit.
The default branch cap can be overridden with MODAL_MAX_BRANCHES.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .evaluator import bohm, levy_longo, render_compact, render_indented, tree_json, whnf
from .inference import IllFormedGoal, InferenceResult, check_type, infer
from .linexpr import pretty_constraints
from .syntax import ParseError, parse_expr, print_expr
from .typegraph import TypeError_, parse_type, print_type
from .unifier import DEFAULT_MAX_BRANCHES, BranchCapExceeded

PRED_FLAGS = {
    "true": "true",
    "nonbot": "diff_infty",
    "llt": "infty_free",
    "bt": "tail_finite",
}

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_BRANCH_CAP = 3


def _max_branches(args) -> int | None:
    if args.max_branches is not None:
        return args.max_branches
    env = os.environ.get("MODAL_MAX_BRANCHES")
    if env:
        return int(env)
    return DEFAULT_MAX_BRANCHES


def _load(path: str):
    return parse_expr(Path(path).read_text(encoding="utf-8"))


def _entry_json(entry) -> dict:
    wit = entry.witness()
    inst = entry.display_instance()
    return {
        "type": print_type(entry.meta),
        "constraints": sorted(str(c) for c in entry.constraints),
        "witness": wit,
        "instance": None if inst is None else print_type(inst),
    }


def _report_infer(path: str, pred_flag: str, result: InferenceResult, elapsed: float, as_json: bool) -> None:
    if as_json:
        print(json.dumps({
            "file": path,
            "predicate": pred_flag,
            "count": len(result.entries),
            "entries": [_entry_json(e) for e in result.entries],
            "elapsed_ms": round(elapsed * 1000, 3),
        }, indent=2, ensure_ascii=False))
        return
    if not result.entries:
        print(f"{path}: no types (predicate {pred_flag})")
        return
    print(f"{path}: {len(result.entries)} meta-type(s) under predicate {pred_flag}")
    for entry in result.entries:
        print(f"  {print_type(entry.meta)}")
        print(f"    constraints {pretty_constraints(entry.constraints)}")
        wit = entry.witness()
        inst = entry.display_instance()
        if wit is not None:
            shown = {k: v for k, v in sorted(wit.items())}
            print(f"    e.g. {print_type(inst)}   with {shown}")


def cmd_infer(args) -> int:
    try:
        e = _load(args.file)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    pred = PRED_FLAGS[args.pred]
    start = time.perf_counter()
    try:
        result = infer(pred, e, max_branches=_max_branches(args))
    except BranchCapExceeded as err:
        print(f"branch cap: {err}", file=sys.stderr)
        return EXIT_BRANCH_CAP
    _report_infer(args.file, args.pred, result, time.perf_counter() - start, args.json)
    return EXIT_OK if result.entries else EXIT_FAILED


def cmd_check(args) -> int:
    try:
        e = _load(args.file)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    try:
        goal = parse_type(args.type)
    except TypeError_ as err:
        print(f"ill-formed goal type: {err}", file=sys.stderr)
        return EXIT_PARSE
    try:
        ok = check_type(e, goal, max_branches=_max_branches(args))
    except BranchCapExceeded as err:
        print(f"branch cap: {err}", file=sys.stderr)
        return EXIT_BRANCH_CAP
    except IllFormedGoal as err:
        print(f"ill-formed goal type: {err}", file=sys.stderr)
        return EXIT_PARSE
    verdict = "OK" if ok else "FAIL"
    if args.json:
        print(json.dumps({"file": args.file, "goal": print_type(goal), "ok": ok}))
    else:
        print(f"{args.file} : {print_type(goal)} ... {verdict}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_eval(args) -> int:
    try:
        e = _load(args.file)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    out = whnf(e, args.fuel)
    if args.json:
        print(json.dumps({
            "file": args.file,
            "finished": out.finished,
            "steps": out.steps,
            "result": print_expr(out.expr),
        }))
        return EXIT_OK if out.finished else EXIT_FAILED
    if out.finished:
        print(print_expr(out.expr))
        return EXIT_OK
    print(f"no weak head normal form within fuel {args.fuel}")
    return EXIT_FAILED


def cmd_tree(args) -> int:
    try:
        e = _load(args.file)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    build = levy_longo if args.kind == "llt" else bohm
    tree = build(e, args.depth, args.fuel)
    if args.json:
        print(json.dumps(tree_json(tree), ensure_ascii=False))
    elif args.compact:
        print(render_compact(tree))
    else:
        print(render_indented(tree))
    return EXIT_OK


def cmd_corpus(args) -> int:
    files = sorted(Path(args.dir).glob("*.lam"))
    if not files:
        print(f"no .lam files under {args.dir}", file=sys.stderr)
        return EXIT_PARSE
    pred = PRED_FLAGS[args.pred]
    rows = []
    worst = EXIT_OK
    for path in files:
        start = time.perf_counter()
        try:
            e = parse_expr(path.read_text(encoding="utf-8"))
            result = infer(pred, e, max_branches=_max_branches(args))
            verdict = "yes" if result.entries else "no"
            detail = print_type(result.entries[0].meta) if result.entries else ""
            if not result.entries:
                worst = max(worst, EXIT_FAILED)
        except ParseError as err:
            verdict, detail = "parse-error", str(err)
            worst = max(worst, EXIT_PARSE)
        except BranchCapExceeded:
            verdict, detail = "branch-cap", ""
            worst = max(worst, EXIT_BRANCH_CAP)
        rows.append((path.name, verdict, f"{(time.perf_counter() - start)*1000:8.1f}ms", detail))
    name_w = max(len(r[0]) for r in rows)
    print(f"predicate: {args.pred}")
    for name, verdict, ms, detail in rows:
        print(f"{name:<{name_w}}  {verdict:<11} {ms}  {detail}")
    return worst


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="modallam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="infer covering meta-types of an expression")
    p.add_argument("file")
    p.add_argument("--pred", choices=list(PRED_FLAGS), default="true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--max-branches", type=int, default=None)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("check", help="check an expression against a goal type")
    p.add_argument("file")
    p.add_argument("--type", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--max-branches", type=int, default=None)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("eval", help="reduce to weak head normal form")
    p.add_argument("file")
    p.add_argument("--fuel", type=int, default=10000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("tree", help="Levy-Longo or Bohm tree approximant")
    p.add_argument("file")
    p.add_argument("--kind", choices=["llt", "bt"], default="llt")
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--fuel", type=int, default=10000)
    p.add_argument("--json", action="store_true")
    p.add_argument("--compact", action="store_true")
    p.set_defaults(fn=cmd_tree)

    p = sub.add_parser("corpus", help="run inference over a directory of .lam files")
    p.add_argument("dir")
    p.add_argument("--pred", choices=list(PRED_FLAGS), default="true")
    p.add_argument("--max-branches", type=int, default=None)
    p.set_defaults(fn=cmd_corpus)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
