// Pointer capture: canvas-space to game-space scaling and stroke assembly.
// The server only ever sees game pixels, so demos recorded here carry the
// same coordinate semantics as scripted ones.

import type { PointerPayload } from "./wire.js";

export interface CanvasBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function canvasToGame(
  box: CanvasBox,
  gameW: number,
  gameH: number,
  clientX: number,
  clientY: number,
): { x: number; y: number } {
  const sx = gameW / box.width;
  const sy = gameH / box.height;
  const x = (clientX - box.left) * sx;
  const y = (clientY - box.top) * sy;
  return {
    x: Math.min(gameW - 1, Math.max(0, Math.round(x))),
    y: Math.min(gameH - 1, Math.max(0, Math.round(y))),
  };
}

// One finger-down..finger-up stroke. t_ms is kept monotone even if the
// browser delivers equal or reordered event timestamps.
export class StrokeRecorder {
  private points: PointerPayload[] = [];
  private lastT = -Infinity;

  get active(): boolean {
    return this.points.length > 0;
  }

  private clampT(t: number): number {
    const out = t <= this.lastT ? this.lastT + 1 : t;
    this.lastT = out;
    return out;
  }

  begin(x: number, y: number, t: number): PointerPayload {
    this.points = [];
    this.lastT = -Infinity;
    const p: PointerPayload = { phase: "down", x, y, t_ms: this.clampT(t) };
    this.points.push(p);
    return p;
  }

  extend(x: number, y: number, t: number): PointerPayload | null {
    if (!this.active) return null;
    const p: PointerPayload = { phase: "move", x, y, t_ms: this.clampT(t) };
    this.points.push(p);
    return p;
  }

  finish(x: number, y: number, t: number): PointerPayload[] {
    if (!this.active) return [];
    this.points.push({ phase: "up", x, y, t_ms: this.clampT(t) });
    const stroke = this.points;
    this.points = [];
    return stroke;
  }
}
