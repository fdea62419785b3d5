// Point coloring. The signed-magnitude mode is the diverging map pinned at
// +-strength: +strength (protrusion) is pure red, -strength (intrusion)
// pure blue, fading through white at zero; unmasked points are gray. This
// matches the palette of the exported visualization files byte for byte.

import type { ColorMode } from "./types.js";

export const GRAY: [number, number, number] = [128, 128, 128];
export const PLAIN: [number, number, number] = [70, 130, 180];

/** Round half to even, matching the exporter's rounding. */
export function rint(x: number): number {
  const rounded = Math.round(x);
  if (Math.abs(x % 1) === 0.5 && rounded % 2 !== 0) {
    return rounded - 1;
  }
  return rounded;
}

export function pointColor(
  masked: boolean,
  magnitude: number,
  strength: number,
  mode: ColorMode,
): [number, number, number] {
  if (mode === "plain") {
    return PLAIN;
  }
  if (!masked) {
    return GRAY;
  }
  if (mode === "mask") {
    return [255, 64, 64];
  }
  const t = Math.max(-1, Math.min(1, magnitude / strength));
  const fade = rint(255 * (1 - Math.abs(t)));
  return t >= 0 ? [255, fade, fade] : [fade, fade, 255];
}

/**
 * Per-point RGB bytes for a whole payload; feeds the renderer's color
 * attribute 1:1, so asserting on this buffer is asserting rendered colors.
 */
export function buildColorBuffer(
  mask: Uint8Array,
  magnitudes: Float32Array,
  strength: number,
  mode: ColorMode,
): Uint8Array {
  const out = new Uint8Array(mask.length * 3);
  for (let i = 0; i < mask.length; i++) {
    const [r, g, b] = pointColor(mask[i] === 1, magnitudes[i], strength, mode);
    out[i * 3] = r;
    out[i * 3 + 1] = g;
    out[i * 3 + 2] = b;
  }
  return out;
}
