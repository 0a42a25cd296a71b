// Status line and end-of-run summary formatting.

import type { StatusPayload } from "./wire.js";

export function statusLine(s: StatusPayload): string {
  const parts: string[] = [];
  if (s.score !== undefined) parts.push(`score ${s.score}`);
  if (s.level !== undefined) parts.push(`level ${s.level}`);
  if (s.actions !== undefined) parts.push(`actions ${s.actions}`);
  return parts.join(" · ");
}

export function reportSummary(report: Record<string, unknown>): string {
  const num = (k: string): number => Number(report[k] ?? 0);
  const rate = (num("valid_action_rate") * 100).toFixed(1);
  return (
    `finished: score ${num("score")}, level ${num("level")}, ` +
    `${num("actions_issued")} actions (${rate}% valid, ` +
    `${num("fallback_actions")} fallback)`
  );
}
