import { describe, expect, it } from "vitest";

import {
  b64ToFloat32,
  decodeSynthesizeResponse,
  PayloadMismatchError,
  unpackBitset,
} from "../src/api.js";
import type { SynthesizeResponseJson } from "../src/types.js";

function floatB64(values: number[]): string {
  const arr = new Float32Array(values);
  return Buffer.from(arr.buffer).toString("base64");
}

function bitsB64(bits: number[]): string {
  const packed = new Uint8Array(Math.ceil(bits.length / 8));
  bits.forEach((bit, i) => {
    if (bit) packed[i >> 3] |= 1 << (7 - (i & 7));
  });
  return Buffer.from(packed).toString("base64");
}

function responseJson(count: number): SynthesizeResponseJson {
  const positions = Array.from({ length: count * 3 }, (_, i) => i * 0.5);
  const magnitudes = Array.from({ length: count }, (_, i) => (i % 2 ? 0.05 : 0));
  const mask = Array.from({ length: count }, (_, i) => i % 2);
  return {
    count,
    positions_b64: floatB64(positions),
    mask_b64: bitsB64(mask),
    magnitudes_b64: floatB64(magnitudes),
    effective_threshold: 0.7,
    masked_fraction: 0.5,
    warnings: { constant_field: false, degenerate_neighborhoods: 0 },
    params: { scale: 2, seed: 7 },
  };
}

describe("b64ToFloat32", () => {
  it("round-trips little-endian float32 values", () => {
    const decoded = b64ToFloat32(floatB64([1.5, -2.25, 0]));
    expect(Array.from(decoded)).toEqual([1.5, -2.25, 0]);
  });

  it("rejects lengths that are not a multiple of 4", () => {
    expect(() => b64ToFloat32(Buffer.from([1, 2, 3]).toString("base64"))).toThrow(
      PayloadMismatchError,
    );
  });
});

describe("unpackBitset", () => {
  it("unpacks MSB-first", () => {
    const bits = [1, 0, 0, 1, 0, 0, 0, 1, 1, 0];
    expect(Array.from(unpackBitset(bitsB64(bits), 10))).toEqual(bits);
  });

  it("rejects a bitset shorter than the point count", () => {
    expect(() => unpackBitset(bitsB64([1, 0]), 99)).toThrow(PayloadMismatchError);
  });
});

describe("decodeSynthesizeResponse", () => {
  it("decodes a consistent payload", () => {
    const decoded = decodeSynthesizeResponse(responseJson(10));
    expect(decoded.count).toBe(10);
    expect(decoded.positions).toHaveLength(30);
    expect(Array.from(decoded.mask)).toEqual([0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
    expect(decoded.effectiveThreshold).toBe(0.7);
    expect(decoded.warnings.constantField).toBe(false);
  });

  it("throws PayloadMismatchError when counts disagree", () => {
    const bad = { ...responseJson(10), count: 11, mask_b64: bitsB64(new Array(11).fill(0)) };
    expect(() => decodeSynthesizeResponse(bad)).toThrow(PayloadMismatchError);
  });
});
