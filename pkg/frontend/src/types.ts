// Shared types mirroring the HTTP API payloads.

export interface AnomalyParamsUI {
  scale: number;
  octaves: number;
  persistence: number;
  lacunarity: number;
  coordinate_mode: "normalized" | "physical";
  threshold: number;
  mask_ratio: number;
  strength: number;
  grid_res: number;
  knn: number;
}

export interface SynthesizeRequestBody extends AnomalyParamsUI {
  fixture: string;
  seed: number;
  max_points?: number;
  include_normals?: boolean;
}

/** Raw JSON body of POST /api/synthesize. */
export interface SynthesizeResponseJson {
  count: number;
  positions_b64: string;
  mask_b64: string;
  magnitudes_b64: string;
  normals_b64?: string;
  effective_threshold: number;
  masked_fraction: number;
  warnings: { constant_field: boolean; degenerate_neighborhoods: number };
  params: Record<string, number | string>;
}

/** Decoded, render-ready form of a synthesize response. */
export interface DecodedResponse {
  count: number;
  positions: Float32Array; // xyz interleaved
  mask: Uint8Array;        // one 0/1 per point
  magnitudes: Float32Array;
  effectiveThreshold: number;
  maskedFraction: number;
  warnings: { constantField: boolean; degenerateNeighborhoods: number };
  params: Record<string, number | string>;
}

export interface GridCell {
  s: number;
  o: number;
  status: "ok" | "error";
  masked_fraction?: number;
  max_abs_displacement?: number;
  effective_threshold?: number;
  synthesize_request?: SynthesizeRequestBody;
  error?: string;
}

export interface GridManifest {
  fixture: string;
  seed: number;
  s_values: number[];
  o_values: number[];
  cells: GridCell[];
}

export type ColorMode = "magnitude" | "mask" | "plain";

export interface ViewState {
  fixture: string | null;
  params: AnomalyParamsUI;
  seed: number;
  colorMode: ColorMode;
  /** Selected grid cell as [s, o], or null outside the grid view. */
  gridSelection: [number, number] | null;
}
