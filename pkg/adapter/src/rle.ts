/**
 * Run-length codec for binary masks, bit-exact with the Python side:
 * row-major runs of alternating values starting with the zero count
 * (first run may be 0), each count a little-endian base-128 varint.
 */

export function encodeRle(bits: Uint8Array): Uint8Array {
  if (bits.length === 0) throw new Error("empty mask");
  const runs: number[] = [];
  let current = 0; // runs always start by counting zeros
  let length = 0;
  for (let i = 0; i < bits.length; i++) {
    const v = bits[i] ? 1 : 0;
    if (v === current) {
      length++;
    } else {
      runs.push(length);
      current = v;
      length = 1;
    }
  }
  runs.push(length);
  const out: number[] = [];
  for (let run of runs) {
    while (run >= 0x80) {
      out.push((run & 0x7f) | 0x80);
      run = Math.floor(run / 128);
    }
    out.push(run);
  }
  return Uint8Array.from(out);
}

export function decodeRle(data: Uint8Array, width: number, height: number): Uint8Array {
  if (width <= 0 || height <= 0) throw new Error(`degenerate dimensions ${width}x${height}`);
  if (data.length === 0) throw new Error("empty run-length payload");
  const runs: number[] = [];
  let value = 0;
  let shift = 1;
  let inVarint = false;
  for (const byte of data) {
    value += (byte & 0x7f) * shift;
    if (byte & 0x80) {
      shift *= 128;
      inVarint = true;
    } else {
      runs.push(value);
      value = 0;
      shift = 1;
      inVarint = false;
    }
  }
  if (inVarint) throw new Error("payload ends inside a varint");
  const total = runs.reduce((a, b) => a + b, 0);
  if (total !== width * height) {
    throw new Error(`runs cover ${total} pixels, raster has ${width * height}`);
  }
  const bits = new Uint8Array(width * height);
  let pos = 0;
  let bit = 0;
  for (const run of runs) {
    if (bit) bits.fill(1, pos, pos + run);
    pos += run;
    bit ^= 1;
  }
  return bits;
}
