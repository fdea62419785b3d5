// HTTP client and payload decoding. Binary fields arrive as base64:
// float32 little-endian arrays and an MSB-first packed bitset for the mask.

import type {
  DecodedResponse,
  GridManifest,
  SynthesizeRequestBody,
  SynthesizeResponseJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export class PayloadMismatchError extends Error {}

export function b64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    bytes[i] = binary.charCodeAt(i);
  }
  return bytes;
}

export function b64ToFloat32(b64: string): Float32Array {
  const bytes = b64ToBytes(b64);
  if (bytes.byteLength % 4 !== 0) {
    throw new PayloadMismatchError(
      `float32 payload has ${bytes.byteLength} bytes, not a multiple of 4`,
    );
  }
  // Typed-array views are platform-endian; every supported target is LE.
  return new Float32Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 4);
}

/** Unpack an MSB-first bitset into one 0/1 byte per point. */
export function unpackBitset(b64: string, count: number): Uint8Array {
  const packed = b64ToBytes(b64);
  if (packed.length * 8 < count) {
    throw new PayloadMismatchError(
      `bitset holds ${packed.length * 8} bits but ${count} points were sent`,
    );
  }
  const out = new Uint8Array(count);
  for (let i = 0; i < count; i++) {
    out[i] = (packed[i >> 3] >> (7 - (i & 7))) & 1;
  }
  return out;
}

export function decodeSynthesizeResponse(json: SynthesizeResponseJson): DecodedResponse {
  const positions = b64ToFloat32(json.positions_b64);
  const magnitudes = b64ToFloat32(json.magnitudes_b64);
  const mask = unpackBitset(json.mask_b64, json.count);
  if (positions.length !== json.count * 3) {
    throw new PayloadMismatchError(
      `positions hold ${positions.length / 3} points, response says ${json.count}`,
    );
  }
  if (magnitudes.length !== json.count) {
    throw new PayloadMismatchError(
      `magnitudes hold ${magnitudes.length} points, response says ${json.count}`,
    );
  }
  return {
    count: json.count,
    positions,
    mask,
    magnitudes,
    effectiveThreshold: json.effective_threshold,
    maskedFraction: json.masked_fraction,
    warnings: {
      constantField: json.warnings.constant_field,
      degenerateNeighborhoods: json.warnings.degenerate_neighborhoods,
    },
    params: json.params,
  };
}

async function postJson<T>(url: string, body: unknown): Promise<T> {
  const response = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const parsed = await response.json();
      detail = typeof parsed.detail === "string" ? parsed.detail : JSON.stringify(parsed.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly base = "") {}

  async clouds(): Promise<string[]> {
    const response = await fetch(`${this.base}/api/clouds`);
    if (!response.ok) throw new ApiError(`${response.status}`, response.status);
    return ((await response.json()) as { clouds: string[] }).clouds;
  }

  async profiles(): Promise<Array<Record<string, number | string>>> {
    const response = await fetch(`${this.base}/api/profiles`);
    if (!response.ok) throw new ApiError(`${response.status}`, response.status);
    return ((await response.json()) as { profiles: Array<Record<string, number | string>> })
      .profiles;
  }

  async synthesize(body: SynthesizeRequestBody): Promise<DecodedResponse> {
    const json = await postJson<SynthesizeResponseJson>(
      `${this.base}/api/synthesize`,
      body,
    );
    return decodeSynthesizeResponse(json);
  }

  async grid(body: Record<string, unknown>): Promise<GridManifest> {
    return postJson<GridManifest>(`${this.base}/api/grid`, body);
  }
}
