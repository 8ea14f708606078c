"""Command-line entry point: ``taintcrawl crawl`` and ``taintcrawl compare``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import ExitStack
from typing import Optional

from .analyses import TargetAnalysis
from .compare import ALL_STRATEGIES, compare_strategies
from .crawler import GUIDED, HYBRID, RANDOM, StrategyConfig, crawl
from .gsl.bundle import BundleError, load_bundle
from .report import build_report, dumps, validate_report, write_report
from .taint.stages import TaintParams

EXIT_OK, EXIT_USAGE, EXIT_BUNDLE, EXIT_INTERNAL = 0, 1, 2, 3

STRATEGY_NAMES = {"acg": GUIDED, "random": RANDOM, "hybrid": HYBRID}

DEFAULTS = {
    "budget": 500,
    "hybrid_period": 5,
    "theta": 6,
    "eta": 0.1,
    "size_threshold": 0.20,
    "structure_threshold": 0.10,
}

log = logging.getLogger("taintcrawl")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--app", required=True, metavar="PATH", help="app bundle directory")
    p.add_argument("--analysis", choices=("xss", "ajax"), default="xss")
    p.add_argument("--hybrid-period", type=int, default=None, metavar="N")
    p.add_argument("--budget", type=int, default=None, metavar="N", help="event budget per crawl")
    p.add_argument("--theta", type=int, default=None, metavar="N", help="substring length gate")
    p.add_argument("--eta", type=float, default=None, metavar="F", help="similarity threshold")
    p.add_argument("--size-threshold", type=float, default=None, metavar="F")
    p.add_argument("--structure-threshold", type=float, default=None, metavar="F")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taintcrawl", description="Guided crawling with taint inference over GSL apps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("crawl", help="crawl one app and write a JSON report")
    _common(c)
    c.add_argument("--strategy", choices=tuple(STRATEGY_NAMES), default="acg")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--trace-log", metavar="PATH", help="write every trace event as JSON lines")
    c.add_argument("--dump-callgraph", metavar="PATH", help="write the final refined call graph")

    cmp_ = sub.add_parser("compare", help="compare strategies over many seeds")
    _common(cmp_)
    cmp_.add_argument("--strategy", choices=tuple(STRATEGY_NAMES), action="append",
                      help="repeatable; default: all strategies")
    cmp_.add_argument("--seed", type=int, default=0, help="first seed")
    cmp_.add_argument("--seeds", type=int, default=20, metavar="N", help="seeds per strategy")
    cmp_.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel crawl jobs")
    return parser


def _settings(args) -> tuple[dict, frozenset]:
    user = frozenset(k for k in DEFAULTS if getattr(args, k) is not None)
    values = {k: (getattr(args, k) if getattr(args, k) is not None else v) for k, v in DEFAULTS.items()}
    return values, user


def _configs(args, values, kind):
    params = TaintParams(theta=values["theta"], eta=values["eta"], seed=args.seed)
    cfg = StrategyConfig(kind=kind, hybrid_random_period=values["hybrid_period"], seed=args.seed,
                         size_change_threshold=values["size_threshold"],
                         structure_diff_threshold=values["structure_threshold"],
                         event_budget=values["budget"])
    return cfg, params


def _cmd_crawl(args) -> int:
    values, user = _settings(args)
    try:
        cfg, params = _configs(args, values, STRATEGY_NAMES[args.strategy])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bundle = load_bundle(args.app)
    with ExitStack() as stack:
        sink = None
        if args.trace_log:
            sink = stack.enter_context(open(args.trace_log, "w", encoding="utf-8"))
        result = crawl(bundle, TargetAnalysis.from_cli(args.analysis), cfg, params, sink)
    report = build_report(result, user)
    validate_report(report)
    if args.dump_callgraph:
        with open(args.dump_callgraph, "w", encoding="utf-8") as fh:
            fh.write(dumps(result.acg.to_json()))
    text = write_report(report, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"{len(report['flows'])} flow(s), {len(report['ajax_endpoints'])} endpoint(s), "
              f"{result.dispatched} event(s) -> {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_compare(args) -> int:
    values, _ = _settings(args)
    if args.seeds < 1 or args.jobs < 1:
        raise UsageError("--seeds and --jobs must be >= 1")
    strategies = tuple(dict.fromkeys(STRATEGY_NAMES[s] for s in args.strategy)) if args.strategy \
        else ALL_STRATEGIES
    try:
        _, params = _configs(args, values, GUIDED)
        StrategyConfig(hybrid_random_period=values["hybrid_period"], event_budget=values["budget"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bundle = load_bundle(args.app)
    result = compare_strategies(bundle, strategies, args.seeds, values["budget"],
                                TargetAnalysis.from_cli(args.analysis), base_seed=args.seed,
                                jobs=args.jobs, hybrid_period=values["hybrid_period"], params=params)
    print(result.table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dumps(result.to_json()))
    return EXIT_OK


def run_cli(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "crawl":
            return _cmd_crawl(args)
        return _cmd_compare(args)
    except UsageError as exc:
        print(f"taintcrawl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BundleError as exc:
        print(f"taintcrawl: bundle error: {exc}", file=sys.stderr)
        return EXIT_BUNDLE
    except OSError as exc:
        print(f"taintcrawl: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostics
        log.debug("internal error", exc_info=True)
        print(f"taintcrawl: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
