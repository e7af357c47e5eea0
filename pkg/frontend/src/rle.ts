/**
 * Run-length mask codec matching the service wire format.
 *
 * Masks are flat Uint8Arrays (0/1) over the x-fastest linear voxel order:
 * index = x + W * (y + H * z). The service ships masks as base64-encoded
 * little-endian uint32 [start, length] pairs; scribble deltas travel as
 * plain [start, length] integer pairs in JSON.
 */

export type Dims = [number, number, number];
export type Run = [number, number];

export interface MaskWire {
  dims: number[];
  count?: number;
  rle_b64: string;
}

export function voxelCount(dims: Dims): number {
  return dims[0] * dims[1] * dims[2];
}

export function linearIndex(dims: Dims, x: number, y: number, z: number): number {
  return x + dims[0] * (y + dims[1] * z);
}

export function encodeRuns(mask: Uint8Array): Run[] {
  const runs: Run[] = [];
  let start = -1;
  for (let i = 0; i < mask.length; i++) {
    if (mask[i] && start < 0) {
      start = i;
    } else if (!mask[i] && start >= 0) {
      runs.push([start, i - start]);
      start = -1;
    }
  }
  if (start >= 0) {
    runs.push([start, mask.length - start]);
  }
  return runs;
}

export function decodeRuns(runs: Run[], length: number): Uint8Array {
  const mask = new Uint8Array(length);
  let previousEnd = 0;
  for (const [start, runLength] of runs) {
    if (runLength <= 0 || start < previousEnd || start + runLength > length) {
      throw new Error(`invalid run [${start}, ${runLength}] for ${length} voxels`);
    }
    mask.fill(1, start, start + runLength);
    previousEnd = start + runLength;
  }
  return mask;
}

const B64_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
const B64_LOOKUP = new Int8Array(128).fill(-1);
for (let i = 0; i < B64_ALPHABET.length; i++) {
  B64_LOOKUP[B64_ALPHABET.charCodeAt(i)] = i;
}

/** Environment-free base64 (no Buffer, no atob), enough for mask payloads. */
export function base64Encode(bytes: Uint8Array): string {
  let out = "";
  for (let i = 0; i < bytes.length; i += 3) {
    const a = bytes[i];
    const b = i + 1 < bytes.length ? bytes[i + 1] : 0;
    const c = i + 2 < bytes.length ? bytes[i + 2] : 0;
    out += B64_ALPHABET[a >> 2];
    out += B64_ALPHABET[((a & 3) << 4) | (b >> 4)];
    out += i + 1 < bytes.length ? B64_ALPHABET[((b & 15) << 2) | (c >> 6)] : "=";
    out += i + 2 < bytes.length ? B64_ALPHABET[c & 63] : "=";
  }
  return out;
}

export function base64Decode(text: string): Uint8Array {
  const clean = text.replace(/=+$/, "");
  const out = new Uint8Array(Math.floor((clean.length * 3) / 4));
  let value = 0;
  let bits = 0;
  let index = 0;
  for (const ch of clean) {
    const code = B64_LOOKUP[ch.charCodeAt(0)];
    if (code < 0) {
      throw new Error(`invalid base64 character ${ch}`);
    }
    value = (value << 6) | code;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out[index++] = (value >> bits) & 0xff;
    }
  }
  return out;
}

export function runsFromWire(wire: MaskWire): Run[] {
  const bytes = base64Decode(wire.rle_b64);
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const runs: Run[] = [];
  for (let offset = 0; offset + 8 <= bytes.length; offset += 8) {
    runs.push([view.getUint32(offset, true), view.getUint32(offset + 4, true)]);
  }
  return runs;
}

export function maskFromWire(wire: MaskWire): Uint8Array {
  const dims = wire.dims as Dims;
  const mask = decodeRuns(runsFromWire(wire), voxelCount(dims));
  if (wire.count !== undefined) {
    let set = 0;
    for (const v of mask) set += v;
    if (set !== wire.count) {
      throw new Error(`mask count mismatch: payload says ${wire.count}, runs give ${set}`);
    }
  }
  return mask;
}

export function wireFromMask(dims: Dims, mask: Uint8Array): MaskWire {
  const runs = encodeRuns(mask);
  const bytes = new Uint8Array(runs.length * 8);
  const view = new DataView(bytes.buffer);
  runs.forEach(([start, length], i) => {
    view.setUint32(i * 8, start, true);
    view.setUint32(i * 8 + 4, length, true);
  });
  let count = 0;
  for (const v of mask) count += v;
  return { dims: [...dims], count, rle_b64: base64Encode(bytes) };
}
