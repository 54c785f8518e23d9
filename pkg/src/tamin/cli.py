"""Command-line front end.

Exit codes: 0 on success (or BISIMILAR), 1 when ``bisim`` finds the inputs
not bisimilar, 2 on usage, parse or semantic errors.
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .bisim import check_timed_bisim
from .ta import TaError, parse_ta, serialize_ta, validate
from .zonegraph import build_zone_graph, export_graph

EXIT_OK, EXIT_DIFFERENT, EXIT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _read(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise TaError("io", f"{path}: {exc.strerror or exc}") from None
    try:
        return parse_ta(data)
    except TaError as exc:
        exc.args = (f"{path}: {exc}",)
        raise


def _write(path: str | None, data: bytes):
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def cmd_minimize(args) -> int:
    from .minimize import minimize_pipeline

    ta = _read(args.input)
    out, report = minimize_pipeline(ta)
    _write(args.output, serialize_ta(out))
    if args.report:
        Path(args.report).write_text(report.to_json())
    return EXIT_OK


def cmd_zonegraph(args) -> int:
    ta = _read(args.input)
    _write(args.output, export_graph(build_zone_graph(ta)))
    return EXIT_OK


def cmd_bisim(args) -> int:
    a, b = _read(args.first), _read(args.second)
    result = check_timed_bisim(a, b)
    print(result)
    return EXIT_OK if result.bisimilar else EXIT_DIFFERENT


def cmd_validate(args) -> int:
    ta = _read(args.input)
    problems = validate(ta)
    for p in problems:
        print(f"{args.input}: {p}", file=sys.stderr)
    if problems:
        return EXIT_ERROR
    print(f"{args.input}: ok")
    return EXIT_OK


def cmd_stats(args) -> int:
    ta = _read(args.input)
    g = build_zone_graph(ta)
    rows = [
        ("locations", len(ta.locations)),
        ("clocks", ta.nclocks),
        ("edges", len(ta.edges)),
        ("max_constant", ta.max_constant()),
        ("zone_nodes", len(g.nodes)),
        ("zone_action_edges", len(g.action_edges)),
        ("zone_delay_edges", len(g.delay_edges)),
    ]
    for k, v in rows:
        print(f"{k}: {v}")
    return EXIT_OK


def cmd_random(args) -> int:
    from .generate import random_automaton

    ta = random_automaton(random.Random(args.seed), max_clocks=args.clocks,
                          max_locations=args.locations, max_constant=args.max_constant)
    _write(args.output, serialize_ta(ta))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tamin", description="Clock reduction for timed automata preserving timed bisimulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("minimize", help="reduce the number of clocks")
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True, help="output automaton ('-' for stdout)")
    s.add_argument("--report", help="write per-stage statistics as JSON")
    s.set_defaults(func=cmd_minimize)

    s = sub.add_parser("zonegraph", help="export the pre-stable zone graph (graphviz)")
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_zonegraph)

    s = sub.add_parser("bisim", help="decide timed bisimilarity; exit 0 if bisimilar, 1 if not")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(func=cmd_bisim)

    s = sub.add_parser("validate", help="parse and check an automaton")
    s.add_argument("input")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("stats", help="print size statistics")
    s.add_argument("input")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("random", help="write a seeded random automaton")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--clocks", type=int, default=2)
    s.add_argument("--locations", type=int, default=4)
    s.add_argument("--max-constant", type=int, default=4)
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_random)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
