// Page wiring: one canvas, two modes. Demo mode shows each prompt and streams
// pointer strokes back; observe mode watches an autoplay run with planned
// gestures drawn over the frames.

import { decodeFrame, type DecodedFrame } from "./frames.js";
import { overlayLabel, plannedShapes, RING_RADIUS } from "./overlay.js";
import { canvasToGame, StrokeRecorder } from "./pointer.js";
import { reportSummary, statusLine } from "./status.js";
import { WsTransport } from "./transport.js";
import type { PlannedAction, StatusPayload, WireMessage } from "./wire.js";
import { controlMessage, pointerMessage } from "./wire.js";

const GAME_W = 480;
const GAME_H = 800;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("screen");
const ctx = canvas.getContext("2d")!;
const promptBox = el<HTMLDivElement>("prompt");
const statusBox = el<HTMLDivElement>("status");
const errorBox = el<HTMLDivElement>("error");
const connBox = el<HTMLSpanElement>("conn");
const modeSel = el<HTMLSelectElement>("mode");
const gameSel = el<HTMLSelectElement>("game");
const seedIn = el<HTMLInputElement>("seed");
const actionsIn = el<HTMLInputElement>("actions");
const budgetIn = el<HTMLInputElement>("budget");
const tacticsIn = el<HTMLInputElement>("tactics");
const startBtn = el<HTMLButtonElement>("start");
const stopBtn = el<HTMLButtonElement>("stop");

let lastFrame: DecodedFrame | null = null;
let lastPlanned: PlannedAction | null = null;
const stroke = new StrokeRecorder();

function render(): void {
  if (lastFrame) {
    ctx.putImageData(
      new ImageData(lastFrame.pixels, lastFrame.width, lastFrame.height),
      0,
      0,
    );
  }
  if (lastPlanned && modeSel.value === "observe") {
    ctx.lineWidth = 3;
    ctx.strokeStyle = "#ff3b30";
    for (const shape of plannedShapes(lastPlanned)) {
      ctx.beginPath();
      if (shape.kind === "ring") {
        ctx.arc(shape.x, shape.y, RING_RADIUS, 0, 2 * Math.PI);
      } else {
        ctx.moveTo(shape.x0, shape.y0);
        ctx.lineTo(shape.x1, shape.y1);
        for (const [bx, by] of shape.barbs) {
          ctx.moveTo(shape.x1, shape.y1);
          ctx.lineTo(bx, by);
        }
      }
      ctx.stroke();
    }
    ctx.fillStyle = "#ff3b30";
    ctx.font = "14px system-ui";
    ctx.fillText(overlayLabel(lastPlanned), 8, 20);
  }
}

function showError(detail: string): void {
  errorBox.textContent = detail;
  errorBox.hidden = false;
}

function onStatus(payload: StatusPayload): void {
  if (payload.planned) lastPlanned = payload.planned;
  const line = statusLine(payload);
  if (line) statusBox.textContent = line;
  if (payload.report) statusBox.textContent = reportSummary(payload.report);
  if (payload.error) showError(payload.error);
  if (payload.done) {
    promptBox.hidden = true;
    if (payload.session_dir) {
      statusBox.textContent = `demo saved to ${payload.session_dir}`;
    }
  }
  render();
}

function onMessage(msg: WireMessage): void {
  switch (msg.type) {
    case "frame":
      lastFrame = decodeFrame(msg.payload);
      render();
      break;
    case "prompt":
      promptBox.textContent = msg.payload.text;
      promptBox.hidden = false;
      break;
    case "status":
      onStatus(msg.payload);
      break;
    case "control":
      if (msg.payload.error) showError(msg.payload.error);
      else if (msg.payload.cmd === "start_demo" || msg.payload.cmd === "start_play") {
        // Autostarted session: reflect what the server already launched.
        modeSel.value = msg.payload.cmd === "start_demo" ? "demo" : "observe";
        if (typeof msg.payload.game === "string") gameSel.value = msg.payload.game;
      }
      break;
    case "pointer":
      break; // client-to-server only
  }
}

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/session`;
const transport = new WsTransport(wsUrl, {
  onMessage,
  onState: (state) => {
    connBox.textContent = state;
    connBox.className = state;
  },
  onWireError: showError,
});

startBtn.addEventListener("click", () => {
  errorBox.hidden = true;
  lastPlanned = null;
  const seed = Number(seedIn.value) || 0;
  if (modeSel.value === "demo") {
    transport.send(controlMessage("start_demo", {
      game: gameSel.value,
      seed,
      actions: Number(actionsIn.value) || 10,
    }));
  } else {
    transport.send(controlMessage("start_play", {
      game: gameSel.value,
      seed,
      budget: Number(budgetIn.value) || 100,
      tactics_path: tacticsIn.value,
    }));
  }
});

stopBtn.addEventListener("click", () => transport.send(controlMessage("stop")));

modeSel.addEventListener("change", () => {
  document.body.dataset.mode = modeSel.value;
});
document.body.dataset.mode = modeSel.value;

function gamePoint(ev: PointerEvent): { x: number; y: number } {
  const box = canvas.getBoundingClientRect();
  return canvasToGame(
    { left: box.left, top: box.top, width: box.width, height: box.height },
    GAME_W,
    GAME_H,
    ev.clientX,
    ev.clientY,
  );
}

canvas.addEventListener("pointerdown", (ev) => {
  if (modeSel.value !== "demo") return;
  canvas.setPointerCapture(ev.pointerId);
  const { x, y } = gamePoint(ev);
  const p = stroke.begin(x, y, ev.timeStamp);
  transport.send(pointerMessage(p.phase, p.x, p.y, p.t_ms));
});

canvas.addEventListener("pointermove", (ev) => {
  if (!stroke.active) return;
  const { x, y } = gamePoint(ev);
  const p = stroke.extend(x, y, ev.timeStamp);
  if (p) transport.send(pointerMessage(p.phase, p.x, p.y, p.t_ms));
});

canvas.addEventListener("pointerup", (ev) => {
  if (!stroke.active) return;
  const { x, y } = gamePoint(ev);
  // down/move were streamed live; only the final up is still unsent.
  const points = stroke.finish(x, y, ev.timeStamp);
  const up = points[points.length - 1];
  if (up) transport.send(pointerMessage(up.phase, up.x, up.y, up.t_ms));
  promptBox.hidden = true;
});

transport.connect();
