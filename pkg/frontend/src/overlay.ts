// Planned-action overlay geometry: swipe arrows and tap rings, as plain
// shapes so the math stays testable without a canvas.

import type { PlannedAction } from "./wire.js";

export interface ArrowShape {
  kind: "arrow";
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  barbs: [number, number][]; // two points forming the arrowhead with (x1, y1)
}

export interface RingShape {
  kind: "ring";
  x: number;
  y: number;
  r: number;
}

export type OverlayShape = ArrowShape | RingShape;

const BARB_LEN = 14;
const BARB_ANGLE = Math.PI / 7;
export const RING_RADIUS = 16;

function arrow(x0: number, y0: number, x1: number, y1: number): ArrowShape {
  const theta = Math.atan2(y1 - y0, x1 - x0);
  const barbs: [number, number][] = [theta - BARB_ANGLE, theta + BARB_ANGLE].map(
    (a) => [x1 - BARB_LEN * Math.cos(a), y1 - BARB_LEN * Math.sin(a)] as [number, number],
  );
  return { kind: "arrow", x0, y0, x1, y1, barbs };
}

export function plannedShapes(planned: PlannedAction): OverlayShape[] {
  return planned.gestures.map((g) =>
    g.kind === "swipe"
      ? arrow(g.x0, g.y0, g.x1, g.y1)
      : { kind: "ring", x: g.x0, y: g.y0, r: RING_RADIUS },
  );
}

export function overlayLabel(planned: PlannedAction): string {
  return `${planned.tactic_id} (${planned.rule})`;
}
