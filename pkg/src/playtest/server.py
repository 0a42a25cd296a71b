"""WebSocket host pairing browser sessions with the recorder and autoplayer.

One logical actor per session: a worker thread owns the game state and talks
to the socket only through two ordered queues (wire messages out, pointer
events in). The browser holds no tactic or game state, so closing a tab never
corrupts a session; a token lets a reconnecting client resume the stream.

Wire format: JSON objects ``{"type": t, "payload": {...}}`` with types frame
(base64 raw RGB), prompt, pointer, control, and status. Frames are throttled
to at most 10 per second.
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
import queue
import threading
import time
import uuid
from base64 import b64encode
from dataclasses import asdict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from . import games
from .apply import PlannedAction
from .harness import (
    DEFAULT_BUDGET,
    DEFAULT_PERIOD_S,
    SourceTimeout,
    record_demo,
    run_test,
    save_report,
)
from .infer import TacticSet, load_tactics, tactics_from_dict
from .trace import Gesture

log = logging.getLogger(__name__)

PROMPT_TEXT = "Please take an action to play the game"
FRAME_INTERVAL_S = 0.1  # at most 10 frames/s on the wire
TAP_DIST_PX = 20.0      # strokes shorter than this record as taps
_QUEUE_LIMIT = 256

_FALLBACK_HTML = """<!doctype html>
<html><head><title>playtest</title></head><body>
<h1>playtest server</h1>
<p>The web client is not built. Run <code>npm install &amp;&amp; npm run build</code>
in the <code>frontend/</code> directory, then restart the server.</p>
<p>The WebSocket endpoint at <code>/session</code> is live regardless.</p>
</body></html>"""


class _Stopped(Exception):
    pass


def _frame_payload(frame: np.ndarray, t_ms: int) -> dict:
    h, w = frame.shape[:2]
    return {
        "t": t_ms,
        "w": w,
        "h": h,
        "data": b64encode(np.ascontiguousarray(frame).tobytes()).decode("ascii"),
    }


def _planned_payload(planned: PlannedAction) -> dict:
    return {
        "tactic_id": planned.tactic_id,
        "rule": planned.rationale.name,
        "gestures": [
            {
                "kind": g.kind.name.lower(),
                "x0": g.x_f,
                "y0": g.y_f,
                "x1": g.x_l,
                "y1": g.y_l,
                "dur": g.dur,
            }
            for g in planned.gestures
        ],
    }


class _StrokeBuilder:
    """Folds pointer down/move/up messages into finished gestures."""

    def __init__(self):
        self._start: tuple[float, float, float] | None = None

    def feed(self, phase: str, x: float, y: float, t_ms: float) -> Gesture | None:
        if phase == "down":
            self._start = (x, y, t_ms)
        elif phase == "up" and self._start is not None:
            x0, y0, t0 = self._start
            self._start = None
            dur = max(0.0, (t_ms - t0) / 1000.0)
            if math.hypot(x - x0, y - y0) < TAP_DIST_PX:
                return Gesture.tap(x0, y0, dur)
            return Gesture.swipe(x0, y0, x, y, dur)
        return None


class Session:
    """One recording or autoplay run and its outbound message stream."""

    def __init__(self, token: str, kind: str):
        self.token = token
        self.kind = kind
        self.out: queue.Queue = queue.Queue(maxsize=_QUEUE_LIMIT)
        self.pointers: queue.Queue = queue.Queue()
        self.stop = threading.Event()
        self.done = threading.Event()
        self.thread: threading.Thread | None = None

    def send(self, msg_type: str, payload: dict) -> None:
        msg = {"type": msg_type, "payload": payload}
        while True:
            try:
                self.out.put_nowait(msg)
                return
            except queue.Full:  # drop the oldest message; frames dominate
                try:
                    self.out.get_nowait()
                except queue.Empty:
                    pass


def _demo_worker(
    session: Session,
    game_id: str,
    seed: int,
    out_dir: Path,
    n_actions: int | None,
    duration: float | None,
    period: float,
) -> None:
    builder = _StrokeBuilder()
    rounds = {"n": 0, "score": 0, "level": 0}

    def drain(gathered: list[Gesture], deadline: float) -> None:
        while time.monotonic() < deadline and not session.stop.is_set():
            try:
                item = session.pointers.get(timeout=0.05)
            except queue.Empty:
                continue
            gesture = builder.feed(
                item["phase"], float(item["x"]), float(item["y"]), float(item["t_ms"])
            )
            if gesture is not None:
                gathered.append(gesture)

    def source(state, timeout: float) -> list[Gesture] | None:
        rounds["score"], rounds["level"] = state.score, state.level
        session.send("frame", _frame_payload(games.render(state), state.t_ms))
        session.send("prompt", {"text": PROMPT_TEXT})
        session.send(
            "status",
            {"score": state.score, "level": state.level, "actions": rounds["n"]},
        )
        gathered: list[Gesture] = []
        start = time.monotonic()
        # One period window per action; a late first gesture is waited out
        # until the timeout, but gestures after the window close are the
        # next action's problem.
        drain(gathered, start + period)
        while (
            not gathered
            and not session.stop.is_set()
            and time.monotonic() - start < timeout
        ):
            drain(gathered, time.monotonic() + 0.05)
        if session.stop.is_set() or not gathered:
            return None
        rounds["n"] += 1
        return gathered

    try:
        demo = record_demo(
            game_id,
            seed,
            out_dir,
            source=source,
            n_actions=n_actions,
            duration=duration,
            period=period,
        )
        session.send(
            "status",
            {
                "score": rounds["score"],
                "level": rounds["level"],
                "actions": len(demo.pairs),
                "done": True,
                "session_dir": str(demo.directory),
            },
        )
    except SourceTimeout as exc:
        session.send(
            "status",
            {
                "score": rounds["score"],
                "level": rounds["level"],
                "actions": rounds["n"],
                "done": True,
                "error": "source timeout",
                "t": exc.t,
            },
        )
    except Exception as exc:
        log.exception("demo session %s failed", session.token)
        session.send("status", {"done": True, "error": str(exc)})
    finally:
        session.done.set()


def _play_worker(
    session: Session,
    game_id: str,
    seed: int,
    budget: int,
    tactic_set: TacticSet,
    report_path: str | None,
) -> None:
    last_frame = {"t": 0.0}

    def on_step(step, frame, planned, state):
        if session.stop.is_set():
            raise _Stopped()
        now = time.monotonic()
        if now - last_frame["t"] >= FRAME_INTERVAL_S:
            last_frame["t"] = now
            session.send("frame", _frame_payload(frame, state.t_ms))
        session.send(
            "status",
            {
                "score": state.score,
                "level": state.level,
                "actions": step + 1,
                "planned": _planned_payload(planned),
            },
        )

    try:
        report = run_test(game_id, tactic_set, budget=budget, seed=seed, on_step=on_step)
        if report_path:
            save_report(report, report_path)
        session.send(
            "status",
            {
                "score": report.score,
                "level": report.level,
                "actions": report.actions_issued,
                "done": True,
                "report": asdict(report),
            },
        )
    except _Stopped:
        session.send("status", {"done": True, "error": "stopped"})
    except Exception as exc:
        log.exception("autoplay session %s failed", session.token)
        session.send("status", {"done": True, "error": str(exc)})
    finally:
        session.done.set()


def _resolve_tactics(payload: dict) -> TacticSet:
    if "tactics" in payload:
        return tactics_from_dict(payload["tactics"])
    if "tactics_path" in payload:
        return load_tactics(payload["tactics_path"])
    raise ValueError("start_play needs tactics (inline) or tactics_path")


def _launch(app: FastAPI, payload: dict) -> Session:
    cmd = payload["cmd"]
    game_id = payload["game"]
    if game_id not in games.GAME_IDS:
        raise ValueError(f"unknown game {game_id!r}")
    seed = int(payload.get("seed", 0))
    token = uuid.uuid4().hex[:12]
    session = Session(token, cmd)
    if cmd == "start_demo":
        out_dir = Path(payload.get("out") or app.state.demo_root / token)
        n_actions = payload.get("actions")
        n_actions = int(n_actions) if n_actions is not None else None
        duration = payload.get("duration")
        duration = float(duration) if duration is not None else None
        if n_actions is None and duration is None:
            n_actions = 10
        args = (
            session,
            game_id,
            seed,
            out_dir,
            n_actions,
            duration,
            float(payload.get("period", DEFAULT_PERIOD_S)),
        )
        target = _demo_worker
    else:
        args = (
            session,
            game_id,
            seed,
            int(payload.get("budget", DEFAULT_BUDGET)),
            _resolve_tactics(payload),
            payload.get("report"),
        )
        target = _play_worker
    session.thread = threading.Thread(target=target, args=args, daemon=True)
    session.thread.start()
    app.state.sessions[token] = session
    return session


def _default_static_dir() -> Path | None:
    packaged = Path(__file__).parent / "static"
    if (packaged / "index.html").exists():
        return packaged
    dev = Path(__file__).parents[2] / "frontend" / "dist"
    if (dev / "index.html").exists():
        return dev
    return None


def create_app(
    demo_root: str | Path = "demos", static_dir: str | Path | None = None
) -> FastAPI:
    app = FastAPI()
    app.state.sessions = {}
    app.state.demo_root = Path(demo_root)
    app.state.autostart = None

    @app.websocket("/session")
    async def session_ws(ws: WebSocket):  # noqa: C901 - protocol switchboard
        await ws.accept()
        session: Session | None = None
        sender: asyncio.Task | None = None

        async def pump(sess: Session):
            while not (sess.done.is_set() and sess.out.empty()):
                try:
                    msg = await asyncio.to_thread(sess.out.get, True, 0.2)
                except queue.Empty:
                    continue
                await ws.send_text(json.dumps(msg))

        async def attach(sess: Session, ack: dict):
            nonlocal session, sender
            session = sess
            await ws.send_text(json.dumps({"type": "control", "payload": ack}))
            sender = asyncio.create_task(pump(sess))

        auto = app.state.autostart
        if auto is not None:
            app.state.autostart = None
            sess = _launch(app, auto)
            await attach(sess, {**auto, "token": sess.token})

        try:
            while True:
                msg = json.loads(await ws.receive_text())
                mtype, payload = msg.get("type"), msg.get("payload", {})
                if mtype == "pointer":
                    if session is not None:
                        session.pointers.put(payload)
                elif mtype == "control":
                    cmd = payload.get("cmd")
                    if cmd in ("start_demo", "start_play"):
                        if session is not None and not session.done.is_set():
                            await ws.send_text(json.dumps({
                                "type": "status",
                                "payload": {"error": "session already running"},
                            }))
                            continue
                        try:
                            sess = _launch(app, payload)
                        except Exception as exc:
                            await ws.send_text(json.dumps({
                                "type": "status", "payload": {"error": str(exc)},
                            }))
                            continue
                        await attach(sess, {
                            "cmd": "started",
                            "token": sess.token,
                            "game": payload["game"],
                            "seed": payload.get("seed", 0),
                        })
                    elif cmd == "resume":
                        sess = app.state.sessions.get(payload.get("token"))
                        if sess is None:
                            await ws.send_text(json.dumps({
                                "type": "status",
                                "payload": {"error": "stale session token"},
                            }))
                        else:
                            await attach(sess, {"cmd": "resumed", "token": sess.token})
                    elif cmd == "stop":
                        if session is not None:
                            session.stop.set()
        except WebSocketDisconnect:
            pass
        finally:
            if sender is not None:
                sender.cancel()
            # The worker keeps running: a demo source times out on its own,
            # and the session stays resumable by token meanwhile.

    static = Path(static_dir) if static_dir is not None else _default_static_dir()
    if static is not None and static.is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="static")
    else:
        @app.get("/")
        def index() -> HTMLResponse:
            return HTMLResponse(_FALLBACK_HTML)

    return app


def serve(port: int = 8000, host: str = "127.0.0.1", demo_root: str | Path = "demos") -> None:
    import uvicorn

    uvicorn.run(create_app(demo_root=demo_root), host=host, port=port, log_level="warning")


def serve_ui_demo(
    game_id: str,
    seed: int,
    out_dir: str | Path,
    n_actions: int | None,
    duration: float | None,
    period: float,
    port: int = 8000,
    host: str = "127.0.0.1",
) -> None:
    """Host the UI until one browser-driven demo session completes."""
    import uvicorn

    app = create_app(demo_root=Path(out_dir).parent)
    app.state.autostart = {
        "cmd": "start_demo",
        "game": game_id,
        "seed": seed,
        "out": str(out_dir),
        "actions": n_actions,
        "duration": duration,
        "period": period,
    }
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)

    def watch():
        while not app.state.sessions:
            time.sleep(0.2)
        for session in list(app.state.sessions.values()):
            session.done.wait()
        time.sleep(0.5)  # let the final messages flush
        server.should_exit = True

    threading.Thread(target=watch, daemon=True).start()
    print(f"open http://{host}:{port}/ to record the demo")
    server.run()
