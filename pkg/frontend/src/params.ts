// Parameter bounds, validation, and the copyable reproduction command.
// Bounds replicate the server-side invariants so bad values never leave
// the client.

import type { AnomalyParamsUI } from "./types.js";

export interface Bound {
  min?: number;
  max?: number;
  /** true when the bound itself is excluded (strict inequality). */
  exclusiveMin?: boolean;
  exclusiveMax?: boolean;
  integer?: boolean;
  invariant: string;
}

export const PARAM_BOUNDS: Record<keyof Omit<AnomalyParamsUI, "coordinate_mode">, Bound> = {
  scale: { min: 0, exclusiveMin: true, invariant: "scale > 0" },
  octaves: { min: 1, integer: true, invariant: "octaves >= 1" },
  persistence: { min: 0, max: 1, exclusiveMin: true, invariant: "0 < persistence <= 1" },
  lacunarity: { min: 1, invariant: "lacunarity >= 1" },
  threshold: { min: 0, max: 1, exclusiveMin: true, exclusiveMax: true, invariant: "0 < threshold < 1" },
  mask_ratio: { min: 0, max: 1, exclusiveMin: true, exclusiveMax: true, invariant: "0 < mask_ratio < 1" },
  strength: { min: 0, exclusiveMin: true, invariant: "strength > 0" },
  grid_res: { min: 2, integer: true, invariant: "grid_res >= 2" },
  knn: { min: 3, integer: true, invariant: "knn >= 3" },
};

export const DEFAULT_PARAMS: AnomalyParamsUI = {
  scale: 2.0,
  octaves: 2,
  persistence: 0.5,
  lacunarity: 2.0,
  coordinate_mode: "normalized",
  threshold: 0.6,
  mask_ratio: 0.05,
  strength: 0.05,
  grid_res: 64,
  knn: 10,
};

/** Violated invariants keyed by field name; empty object means valid. */
export function validateParams(params: AnomalyParamsUI): Record<string, string> {
  const errors: Record<string, string> = {};
  for (const [name, bound] of Object.entries(PARAM_BOUNDS)) {
    const value = params[name as keyof AnomalyParamsUI] as number;
    if (!Number.isFinite(value)) {
      errors[name] = `${name} must be a number`;
      continue;
    }
    const belowMin =
      bound.min !== undefined &&
      (bound.exclusiveMin ? value <= bound.min : value < bound.min);
    const aboveMax =
      bound.max !== undefined &&
      (bound.exclusiveMax ? value >= bound.max : value > bound.max);
    if (belowMin || aboveMax || (bound.integer && !Number.isInteger(value))) {
      errors[name] = `${name} must satisfy ${bound.invariant}`;
    }
  }
  return errors;
}

/**
 * CLI invocation that reproduces the current view exactly.
 * Paths are relative to the fixtures directory the server was started with.
 */
export function reproCommand(
  fixture: string,
  params: AnomalyParamsUI,
  seed: number,
  outputDir = "out",
): string {
  return [
    "pnas3d generate",
    fixture,
    outputDir,
    `--scale ${params.scale}`,
    `--octaves ${params.octaves}`,
    `--persistence ${params.persistence}`,
    `--lacunarity ${params.lacunarity}`,
    `--threshold ${params.threshold}`,
    `--mask-ratio ${params.mask_ratio}`,
    `--strength ${params.strength}`,
    `--grid-res ${params.grid_res}`,
    `--knn ${params.knn}`,
    `--coordinate-mode ${params.coordinate_mode}`,
    `--seed ${seed}`,
  ].join(" ");
}
