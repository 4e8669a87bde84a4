"""Batch front-end: validate, extract, solve, verify, generate, bench.

Inputs name either a file on disk, a file ``<name>.json`` inside the
directory given by the ``NPLS_FIXTURES`` environment variable, or one
of the built-in fixtures.  Exit codes are uniform across commands:
0 for success, 1 for a semantic failure (invalid derivation, failed
condition, unverified witness), 2 for an I/O or parse failure.

Text output is meant for people; ``--format machine`` switches every
command to line-delimited JSON records with deterministic bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .corpus import FIXTURES
from .derivation import (
    Derivation,
    DerivationTemplate,
    detect_mode,
    format_path,
    substitute_numeral,
    validate,
)
from .errors import FormatError, NplsError, ValidationFailed
from .extraction import (
    ExtractionContext,
    build_npls,
    build_pls,
    extract_witness_npls,
    extract_witness_pls,
)
from .nested_graph import (
    CostedDigraph,
    NestedGraphFamily,
    generate_family,
    npls_from_family,
    pls_from_digraph,
)
from .search_core import (
    as_function_pls,
    solve_npls,
    solve_pls,
    verify_npls_conditions,
)
from .serialization import (
    digraph_to_json,
    dumps,
    family_to_json,
    loads_document,
)

MODE_AUTO = "auto"


@dataclass(frozen=True)
class RunConfig:
    """One resolved command invocation."""

    command: str
    input_path: str | None
    mode: str
    x_value: int
    seed: int
    max_steps: int | None
    max_rank: int
    max_width: int
    output: str
    out_path: str | None


def _load_input(name: str):
    path = Path(name)
    if path.exists():
        return loads_document(path.read_text(encoding="utf-8"))
    fixture_dir = os.environ.get("NPLS_FIXTURES")
    if fixture_dir:
        candidate = Path(fixture_dir) / f"{name}.json"
        if candidate.exists():
            return loads_document(candidate.read_text(encoding="utf-8"))
    if name in FIXTURES:
        return FIXTURES[name]()
    raise OSError(f"no file or fixture named {name!r}")


def _as_derivation(doc, cfg: RunConfig) -> Derivation:
    if isinstance(doc, DerivationTemplate):
        return substitute_numeral(doc, cfg.x_value)
    if isinstance(doc, Derivation):
        return doc
    raise NplsError("this command needs a derivation or template input")


def _resolve_mode(cfg: RunConfig, derivation: Derivation) -> str:
    return detect_mode(derivation) if cfg.mode == MODE_AUTO else cfg.mode


# Commands.  Each returns (exit_code, output lines).


def cmd_validate(cfg: RunConfig) -> tuple[int, list[str]]:
    doc = _load_input(cfg.input_path)
    try:
        derivation = _as_derivation(doc, cfg)
    except ValidationFailed as exc:
        report = exc.report
        if report is None:
            raise
        return 1, _report_lines(report, cfg)
    report = validate(derivation, _resolve_mode(cfg, derivation))
    return (0 if report.ok else 1), _report_lines(report, cfg)


def _report_lines(report, cfg: RunConfig) -> list[str]:
    if cfg.output == "machine":
        lines = [
            dumps({"path": list(i.path), "message": i.message}) for i in report.issues
        ]
        lines.append(dumps({"ok": report.ok, "mode": report.mode}))
        return lines
    if report.ok:
        return [f"ok mode={report.mode}"]
    return report.lines()


def cmd_extract(cfg: RunConfig) -> tuple[int, list[str]]:
    doc = _load_input(cfg.input_path)
    derivation = _as_derivation(doc, cfg)
    mode = _resolve_mode(cfg, derivation)
    ctx = ExtractionContext(derivation, mode)
    if mode == "pls":
        report = extract_witness_pls(ctx, cfg.max_steps)
    else:
        report = extract_witness_npls(ctx, cfg.max_steps)
    flag = "true" if report.verified else "false"
    if cfg.output == "machine":
        lines = [
            dumps(
                {
                    "witness": report.witness,
                    "verified": report.verified,
                    "solution": list(report.solution_node),
                    "steps": report.trace.step_count,
                }
            )
        ]
    else:
        lines = [
            f"witness={report.witness} verified={flag}",
            f"solution={format_path(report.solution_node)}",
            f"steps={report.trace.step_count}",
        ]
    return (0 if report.verified else 1), lines


def _trace_lines(trace, solution, cfg: RunConfig) -> list[str]:
    if cfg.output == "machine":
        lines = [
            dumps(
                {
                    "action": s.action,
                    "source": s.source,
                    "target": s.target,
                    "rank": s.rank,
                    "cost": s.cost,
                }
            )
            for s in trace.steps
        ]
        lines.append(dumps({"solution": solution, "steps": trace.step_count}))
        return lines
    lines = [
        f"{s.action:<11} source={s.source} target={s.target} rank={s.rank} cost={s.cost}"
        for s in trace.steps
    ]
    lines.append(f"solution={solution} steps={trace.step_count}")
    return lines


def cmd_solve(cfg: RunConfig) -> tuple[int, list[str]]:
    doc = _load_input(cfg.input_path)
    if isinstance(doc, CostedDigraph):
        inst = as_function_pls(pls_from_digraph(doc))
        solution, trace = solve_pls(inst, cfg.x_value, cfg.max_steps)
    elif isinstance(doc, NestedGraphFamily):
        inst = npls_from_family(doc)
        solution, trace = solve_npls(inst, cfg.x_value, cfg.max_steps)
    else:
        derivation = _as_derivation(doc, cfg)
        mode = _resolve_mode(cfg, derivation)
        ctx = ExtractionContext(derivation, mode)
        if mode == "pls":
            solution, trace = solve_pls(build_pls(ctx), ctx.x, cfg.max_steps)
        else:
            solution, trace = solve_npls(build_npls(ctx), ctx.x, cfg.max_steps)
    return 0, _trace_lines(trace, solution, cfg)


def cmd_verify(cfg: RunConfig) -> tuple[int, list[str]]:
    doc = _load_input(cfg.input_path)
    if isinstance(doc, CostedDigraph):
        inst, x = npls_from_family(NestedGraphFamily(doc, 0)), 0
    elif isinstance(doc, NestedGraphFamily):
        inst, x = npls_from_family(doc), 0
    else:
        derivation = _as_derivation(doc, cfg)
        mode = _resolve_mode(cfg, derivation)
        if mode != "npls":
            raise NplsError("condition verification applies to nested instances only")
        inst, x = build_npls(ExtractionContext(derivation, mode)), derivation.end_x
    report = verify_npls_conditions(inst, x)
    if cfg.output == "machine":
        lines = [
            dumps(
                {
                    "name": c.name,
                    "passed": c.passed,
                    "counterexample": list(c.counterexample) if c.counterexample else None,
                    "detail": c.detail,
                }
            )
            for c in report.checks
        ]
        lines.append(dumps({"ok": report.all_passed}))
    else:
        lines = report.lines()
    return (0 if report.all_passed else 1), lines


def cmd_gen_graph(cfg: RunConfig) -> tuple[int, list[str]]:
    family = generate_family(cfg.seed, cfg.max_rank, cfg.max_width)
    obj = digraph_to_json(family.graph) if cfg.max_rank == 0 else family_to_json(family)
    return 0, [dumps(obj)]


def cmd_bench(cfg: RunConfig) -> tuple[int, list[str]]:
    """Solve and verify one generated family per seed in 1..seed."""
    lines: list[str] = []
    failures = 0
    for seed in range(1, cfg.seed + 1):
        family = generate_family(seed, cfg.max_rank, cfg.max_width)
        inst = npls_from_family(family)
        started = time.perf_counter()
        try:
            _, trace = solve_npls(inst, cfg.x_value, cfg.max_steps)
            ok = verify_npls_conditions(inst, cfg.x_value).all_passed
            steps = trace.step_count
        except NplsError as exc:
            ok, steps = False, 0
            lines.append(f"seed={seed} error={exc}")
        elapsed = (time.perf_counter() - started) * 1000.0
        if not ok:
            failures += 1
        if cfg.output == "machine":
            lines.append(
                dumps({"seed": seed, "ok": ok, "steps": steps, "ms": round(elapsed, 3)})
            )
        else:
            status = "ok" if ok else "FAIL"
            lines.append(f"seed={seed} {status} steps={steps} ms={elapsed:.1f}")
    return (0 if failures == 0 else 1), lines


_COMMANDS = {
    "validate": cmd_validate,
    "extract": cmd_extract,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "gen-graph": cmd_gen_graph,
    "bench": cmd_bench,
}

_NEEDS_INPUT = {"validate", "extract", "solve", "verify"}


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument(
        "--mode",
        choices=["pls", "npls", MODE_AUTO],
        default=MODE_AUTO,
        help="derivation mode; auto picks by quantifier class",
    )
    shared.add_argument("--x", type=int, default=0, help="parameter value for templates")
    shared.add_argument("--seed", type=int, default=1, help="generator seed (bench: seed count)")
    shared.add_argument("--max-steps", type=int, default=None, help="solver step budget")
    shared.add_argument("--max-rank", type=int, default=2, help="family nesting depth")
    shared.add_argument("--max-width", type=int, default=4, help="family problem size")
    shared.add_argument("--out", default=None, help="write output to this file")
    shared.add_argument(
        "--format",
        choices=["text", "machine"],
        default="text",
        dest="output",
        help="text tables or line-delimited JSON",
    )

    parser = argparse.ArgumentParser(
        prog="npls",
        description="Nested local search over proof trees and graph families.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, parents=[shared])
        if name in _NEEDS_INPUT:
            p.add_argument("input", help="file path or fixture name")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    if args.x < 0 or args.seed < 0:
        raise NplsError("--x and --seed must be non-negative")
    return RunConfig(
        command=args.command,
        input_path=getattr(args, "input", None),
        mode=args.mode,
        x_value=args.x,
        seed=args.seed,
        max_steps=args.max_steps,
        max_rank=args.max_rank,
        max_width=args.max_width,
        output=args.output,
        out_path=args.out,
    )


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        code, lines = _COMMANDS[cfg.command](cfg)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NplsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = "".join(line + "\n" for line in lines)
    if cfg.out_path is not None:
        Path(cfg.out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


def entry() -> None:
    sys.exit(main())
