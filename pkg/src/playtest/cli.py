"""Command line: record demos, infer tactics, autoplay, baseline, serve, report.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from dataclasses import asdict
from pathlib import Path

from . import games
from .harness import (
    DEFAULT_BUDGET,
    DEFAULT_PERIOD_S,
    load_report,
    record_demo,
    run_random_baseline,
    run_test,
    save_report,
)
from .infer import infer_tactics, pair_demo, save_tactics, load_tactics
from .scene import load_icon_dir

log = logging.getLogger(__name__)

_REPORT_ROWS = (
    "game",
    "seed",
    "score",
    "level",
    "actions_issued",
    "valid_action_rate",
    "fallback_rate",
    "distinct_signatures",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting with code 2."""

    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="playtest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser(
        "demo",
        help="record a frame/trace demo session",
        description="Record a demo session. One action is collected per "
        "period; all gestures of an action (for example a pair of taps) "
        "must land within a single period, because the trace file closes "
        "at the next snapshot.",
    )
    demo.add_argument("--game", required=True, choices=games.GAME_IDS)
    demo.add_argument("--seed", required=True, type=int)
    demo.add_argument("--out", required=True, help="session directory to create")
    demo.add_argument("--source", required=True, choices=("oracle", "ui"))
    demo.add_argument("--actions", type=int, help="number of actions to record")
    demo.add_argument("--duration", type=float, help="seconds to record instead")
    demo.add_argument("--period", type=float, default=DEFAULT_PERIOD_S)
    demo.add_argument("--port", type=int, default=8000, help="UI port (ui source)")

    infer = sub.add_parser("infer", help="infer tactics from a demo session")
    infer.add_argument("--demo", required=True, help="demo session directory")
    infer.add_argument("--icons", required=True, help="icon template directory")
    infer.add_argument("--out", required=True, help="tactic file to write")
    infer.add_argument("--seed", type=int, default=0)

    play = sub.add_parser("play", help="autoplay a game with inferred tactics")
    play.add_argument("--game", required=True, choices=games.GAME_IDS)
    play.add_argument("--tactics", required=True, help="tactic file")
    play.add_argument("--seed", required=True, type=int)
    play.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    play.add_argument("--report", required=True, help="report JSON to write")

    baseline = sub.add_parser("baseline", help="run the random-input baseline")
    baseline.add_argument("--game", required=True, choices=games.GAME_IDS)
    baseline.add_argument("--seed", required=True, type=int)
    baseline.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    baseline.add_argument("--report", required=True, help="report JSON to write")

    serve = sub.add_parser("serve", help="host the web client and session socket")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--demos", default="demos", help="root for UI demo sessions")

    report = sub.add_parser("report", help="inspect or compare report files")
    report.add_argument("--compare", nargs=2, metavar=("A", "B"), required=True)
    return parser


def _cmd_demo(args) -> int:
    if args.actions is None and args.duration is None:
        raise _UsageError("demo: one of --actions or --duration is required")
    if args.source == "ui":
        from .server import serve_ui_demo

        serve_ui_demo(
            args.game,
            args.seed,
            args.out,
            args.actions,
            args.duration,
            args.period,
            port=args.port,
        )
        print(f"session saved to {args.out}")
        return 0
    session = record_demo(
        args.game,
        args.seed,
        args.out,
        source="oracle",
        n_actions=args.actions,
        duration=args.duration,
        period=args.period,
    )
    print(f"recorded {len(session.pairs)} pairs in {session.directory}")
    return 0


def _cmd_infer(args) -> int:
    specs = load_icon_dir(args.icons)
    pairs = pair_demo(args.demo, specs)
    tactic_set = infer_tactics(pairs, rng=random.Random(args.seed))
    save_tactics(tactic_set, args.out)
    rules = ", ".join(sorted(t.rule.name for t in tactic_set.tactics))
    print(f"inferred {len(tactic_set.tactics)} tactics ({rules}) -> {args.out}")
    return 0


def _summary(rep) -> str:
    return (
        f"{rep.game} seed={rep.seed}: score={rep.score} level={rep.level} "
        f"valid={rep.valid_action_rate:.2f} fallback={rep.fallback_rate:.2f} "
        f"signatures={rep.distinct_signatures} ({rep.wall_seconds:.1f}s)"
    )


def _cmd_play(args) -> int:
    tactic_set = load_tactics(args.tactics)
    rep = run_test(args.game, tactic_set, budget=args.budget, seed=args.seed)
    save_report(rep, args.report)
    print(_summary(rep))
    return 0


def _cmd_baseline(args) -> int:
    rep = run_random_baseline(args.game, budget=args.budget, seed=args.seed)
    save_report(rep, args.report)
    print(_summary(rep))
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    serve(port=args.port, host=args.host, demo_root=args.demos)
    return 0


def _cmd_report(args) -> int:
    path_a, path_b = args.compare
    rep_a, rep_b = load_report(path_a), load_report(path_b)
    da, db = asdict(rep_a), asdict(rep_b)
    width = max(len(Path(p).name) for p in args.compare) + 2
    print(f"{'field':<20}{Path(path_a).name:>{width}}{Path(path_b).name:>{width}}")
    for row in _REPORT_ROWS:
        va, vb = da[row], db[row]
        fmt = (lambda v: f"{v:.3f}") if isinstance(va, float) else str
        print(f"{row:<20}{fmt(va):>{width}}{fmt(vb):>{width}}")
    return 0


_COMMANDS = {
    "demo": _cmd_demo,
    "infer": _cmd_infer,
    "play": _cmd_play,
    "baseline": _cmd_baseline,
    "serve": _cmd_serve,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as exc:
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
