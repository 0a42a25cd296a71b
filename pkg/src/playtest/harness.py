"""Demo recording, tactic-driven autoplay, random baselines, and reports.

The harness owns the outer loop: it renders frames, shuttles event traces in
and out of the games, and accounts for every issued action. Games are driven
strictly through rendered frames and injected event text; no game internals
cross this boundary.
"""

from __future__ import annotations

import json
import logging
import math
import random
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import games
from .apply import (
    ApplyError,
    PlannedAction,
    action_to_events,
    match_context,
    synthesize_action,
)
from .games.base import SCREEN_H, SCREEN_W, Game
from .games.oracle import make_policy
from .infer import TacticSet
from .scene import Frame, IconSpec, build_context, load_icon_dir, write_ppm
from .trace import Action, Gesture, emit_trace

log = logging.getLogger(__name__)

DEFAULT_PERIOD_S = 9.0  # prompt cadence for human sources
DEFAULT_BUDGET = 500    # autoplay actions per run
_TIMEOUT_PERIODS = 3    # a source this many periods silent has timed out

# An input source is prompted once per round with (game state, timeout in
# seconds) and answers with the gestures of one action, or None on timeout.
InputSource = Callable[[Game, float], "list[Gesture] | None"]
StepObserver = Callable[[int, np.ndarray, PlannedAction, Game], None]


class HarnessError(Exception):
    """Base class for recording and autoplay failures."""


class SourceTimeout(HarnessError):
    """The input source produced nothing within the allowed wait."""

    def __init__(self, t: int):
        self.t = t
        super().__init__(f"no action arrived within the timeout at t={t} ms")


@dataclass(frozen=True)
class DemoSession:
    """An on-disk demo: ``<t>.ppm``/``<t>.txt`` pairs plus a manifest.

    ``t`` is milliseconds since session start; every timestamp names both a
    frame and a trace file, and the manifest lists every pair.
    """

    directory: Path
    game: str
    seed: int
    period_s: float
    source: str
    pairs: tuple[int, ...]

    def manifest(self) -> dict:
        return {
            "game": self.game,
            "seed": self.seed,
            "period_s": self.period_s,
            "source": self.source,
            "pairs": list(self.pairs),
        }


def load_demo_session(directory: str | Path) -> DemoSession:
    """Read a session manifest back and check its pairs are all on disk."""
    directory = Path(directory)
    data = json.loads((directory / "manifest.json").read_text())
    session = DemoSession(
        directory=directory,
        game=data["game"],
        seed=data["seed"],
        period_s=data["period_s"],
        source=data["source"],
        pairs=tuple(data["pairs"]),
    )
    for t in session.pairs:
        for suffix in (".ppm", ".txt"):
            if not (directory / f"{t}{suffix}").exists():
                raise HarnessError(f"manifest lists t={t} but {t}{suffix} is missing")
    return session


def record_demo(
    game_id: str,
    seed: int,
    out_dir: str | Path,
    source: str | InputSource = "oracle",
    n_actions: int | None = None,
    duration: float | None = None,
    period: float = DEFAULT_PERIOD_S,
) -> DemoSession:
    """Record a demo session of frame/trace pairs into ``out_dir``.

    Each round snapshots the scene as ``<t>.ppm``, prompts the source for one
    action, writes its event trace as ``<t>.txt``, and injects it into the
    game. The oracle source runs on a synthetic clock (one round per period,
    zero wait); callable sources are paced against the wall clock so rounds
    sit at least one period apart. A source silent for 3x the period still
    gets its pair written (empty trace) before SourceTimeout is raised.

    All gestures of one action must land within a single round: the trace
    file closes when the next snapshot is taken.
    """
    if n_actions is None and duration is None:
        raise ValueError("one of n_actions or duration is required")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if source == "oracle":
        policy = make_policy(game_id, seed)
        ask: InputSource = lambda game, _timeout: policy(game)
        source_name, synthetic = "oracle", True
    elif callable(source):
        ask = source
        source_name = getattr(source, "source_name", "ui")
        synthetic = False
    else:
        raise ValueError(f"unknown input source {source!r}")

    state = games.reset(game_id, seed)
    pairs: list[int] = []
    start = time.monotonic()

    def finish() -> DemoSession:
        session = DemoSession(out, game_id, seed, period, source_name, tuple(pairs))
        (out / "manifest.json").write_text(json.dumps(session.manifest(), indent=2) + "\n")
        return session

    while n_actions is None or len(pairs) < n_actions:
        now_ms = (
            len(pairs) * period * 1000.0
            if synthetic
            else (time.monotonic() - start) * 1000.0
        )
        if duration is not None and now_ms >= duration * 1000.0:
            break
        t = int(round(now_ms))
        if pairs and t <= pairs[-1]:
            t = pairs[-1] + 1
        write_ppm(out / f"{t}.ppm", games.render(state))
        gestures = ask(state, _TIMEOUT_PERIODS * period)
        if not gestures:
            (out / f"{t}.txt").write_text("")
            pairs.append(t)
            finish()
            raise SourceTimeout(t)
        text = emit_trace(Action(list(gestures)), base_ts=t / 1000.0)
        (out / f"{t}.txt").write_text(text)
        pairs.append(t)
        games.inject(state, text)
        if not synthetic:
            # Hold the next prompt until the next period tick.
            time.sleep(max(0.0, start + len(pairs) * period - time.monotonic()))
    return finish()


@dataclass(frozen=True)
class TestReport:
    """Outcome of one autoplay or baseline run.

    The three action counts partition actions_issued: valid actions are
    synthesized ones that changed game state, invalid ones synthesized but
    inert, and fallback ones the random taps issued when no tactic applied
    (counted there whatever their effect).
    """

    __test__ = False  # not a test case, despite the name

    game: str
    seed: int
    score: int
    level: int
    actions_issued: int
    valid_actions: int
    invalid_actions: int
    fallback_actions: int
    valid_action_rate: float
    fallback_rate: float
    distinct_signatures: int
    wall_seconds: float


def save_report(report: TestReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(asdict(report), indent=2) + "\n")


def load_report(path: str | Path) -> TestReport:
    return TestReport(**json.loads(Path(path).read_text()))


def reports_equal(
    a: TestReport, b: TestReport, ignore: tuple[str, ...] = ("wall_seconds",)
) -> bool:
    """Field-wise equality; wall_seconds is timing noise and skipped by default."""
    da, db = asdict(a), asdict(b)
    for key in ignore:
        da.pop(key, None)
        db.pop(key, None)
    return da == db


def _resolve_icons(
    game_id: str, icons: str | Path | list[IconSpec] | None
) -> list[IconSpec]:
    if icons is None:
        return load_icon_dir(games.icon_dir(game_id))
    if isinstance(icons, (str, Path)):
        return load_icon_dir(icons)
    return list(icons)


def _fallback_tap(rng: random.Random) -> PlannedAction:
    x = rng.uniform(0.0, SCREEN_W - 1.0)
    y = rng.uniform(0.0, SCREEN_H - 1.0)
    gesture = Gesture.tap(x, y, rng.uniform(0.04, 0.12))
    return PlannedAction(gestures=[gesture], tactic_id="fallback")


def run_test(
    game_id: str,
    tactic_set: TacticSet,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    icons: str | Path | list[IconSpec] | None = None,
    on_step: StepObserver | None = None,
) -> TestReport:
    """Autoplay ``budget`` actions by matching tactics against live scenes.

    Each step renders the scene, builds its context, and looks for a tactic
    with the same signature. A match is concretized and injected; a missing
    or failed match degrades to one uniformly random tap (logged), so the
    run always issues exactly ``budget`` actions.
    """
    specs = _resolve_icons(game_id, icons)
    state = games.reset(game_id, seed)
    rng = random.Random(f"autoplay:{game_id}:{seed}")
    tactic_ids = {id(t): f"t{i}" for i, t in enumerate(tactic_set.tactics)}
    valid = invalid = fallback = 0
    signatures: set = set()
    t0 = time.perf_counter()
    for step in range(budget):
        frame = games.render(state)
        context = build_context(Frame(frame, state.t_ms), specs)
        signatures.add(context.signature)
        planned: PlannedAction | None = None
        tactic = match_context(context, tactic_set, rng)
        if tactic is not None:
            try:
                planned = synthesize_action(
                    tactic, context, rng, tactic_id=tactic_ids[id(tactic)]
                )
            except ApplyError as err:
                log.debug("step %d: synthesis failed (%s); falling back", step, err)
        is_fallback = planned is None
        if is_fallback:
            planned = _fallback_tap(rng)
            log.debug(
                "step %d: no applicable tactic; random tap at (%.0f, %.0f)",
                step,
                planned.gestures[0].x_f,
                planned.gestures[0].y_f,
            )
        events = action_to_events(planned, base_ts=state.t_ms / 1000.0)
        changed = games.inject(state, events)
        if is_fallback:
            fallback += 1
        elif changed:
            valid += 1
        else:
            invalid += 1
        if on_step is not None:
            on_step(step, frame, planned, state)
    return TestReport(
        game=game_id,
        seed=seed,
        score=state.score,
        level=state.level,
        actions_issued=budget,
        valid_actions=valid,
        invalid_actions=invalid,
        fallback_actions=fallback,
        valid_action_rate=valid / budget if budget else 0.0,
        fallback_rate=fallback / budget if budget else 0.0,
        distinct_signatures=len(signatures),
        wall_seconds=time.perf_counter() - t0,
    )


def run_random_baseline(
    game_id: str, budget: int = DEFAULT_BUDGET, seed: int = 0
) -> TestReport:
    """Inject uniform random taps/swipes (50/50 mix) without reading frames.

    The blind player never renders, so distinct_signatures stays 0 and no
    fallback accounting applies: every action is its own best effort.
    """
    state = games.reset(game_id, seed)
    rng = random.Random(f"baseline:{game_id}:{seed}")
    valid = invalid = 0
    t0 = time.perf_counter()
    for _ in range(budget):
        x = rng.uniform(0.0, SCREEN_W - 1.0)
        y = rng.uniform(0.0, SCREEN_H - 1.0)
        if rng.random() < 0.5:
            gesture = Gesture.tap(x, y, rng.uniform(0.03, 0.12))
        else:
            angle = rng.uniform(0.0, math.tau)
            dist = rng.uniform(40.0, 220.0)
            x1 = min(max(x + dist * math.cos(angle), 0.0), SCREEN_W - 1.0)
            y1 = min(max(y + dist * math.sin(angle), 0.0), SCREEN_H - 1.0)
            gesture = Gesture.swipe(x, y, x1, y1, rng.uniform(0.1, 0.5))
        events = emit_trace(Action([gesture]), base_ts=state.t_ms / 1000.0)
        if games.inject(state, events):
            valid += 1
        else:
            invalid += 1
    return TestReport(
        game=game_id,
        seed=seed,
        score=state.score,
        level=state.level,
        actions_issued=budget,
        valid_actions=valid,
        invalid_actions=invalid,
        fallback_actions=0,
        valid_action_rate=valid / budget if budget else 0.0,
        fallback_rate=0.0,
        distinct_signatures=0,
        wall_seconds=time.perf_counter() - t0,
    )
