// Frame payload decoding: base64 raw RGB into the RGBA layout canvases want.

import type { FramePayload } from "./wire.js";
import { WireError } from "./wire.js";

export interface DecodedFrame {
  width: number;
  height: number;
  t: number;
  pixels: Uint8ClampedArray<ArrayBuffer>; // RGBA, width*height*4
}

export function decodeFrame(payload: FramePayload): DecodedFrame {
  const raw = atob(payload.data);
  const expected = payload.w * payload.h * 3;
  if (raw.length !== expected) {
    throw new WireError(`frame is ${raw.length} bytes, expected ${expected}`);
  }
  const pixels = new Uint8ClampedArray(payload.w * payload.h * 4);
  for (let i = 0, j = 0; i < raw.length; i += 3, j += 4) {
    pixels[j] = raw.charCodeAt(i);
    pixels[j + 1] = raw.charCodeAt(i + 1);
    pixels[j + 2] = raw.charCodeAt(i + 2);
    pixels[j + 3] = 255;
  }
  return { width: payload.w, height: payload.h, t: payload.t, pixels };
}
