/**
 * LBL1 raster reader/writer: 16-byte header (magic "LBL1", then width,
 * height, class_count as u32 LE) and a row-major u16 LE payload with
 * 0xFFFF as the ignore value.
 */

export const IGNORE_VALUE = 0xffff;

export interface LabelRaster {
  width: number;
  height: number;
  classCount: number;
  labels: Uint16Array; // row-major
}

export function decodeLbl(raw: Buffer): LabelRaster {
  if (raw.length < 16) throw new Error("truncated LBL1 header");
  if (raw.toString("latin1", 0, 4) !== "LBL1") throw new Error("bad LBL1 magic");
  const width = raw.readUInt32LE(4);
  const height = raw.readUInt32LE(8);
  const classCount = raw.readUInt32LE(12);
  const expected = 16 + 2 * width * height;
  if (raw.length !== expected) {
    throw new Error(`LBL1 payload is ${raw.length} bytes, expected ${expected}`);
  }
  const labels = new Uint16Array(width * height);
  for (let i = 0; i < labels.length; i++) {
    labels[i] = raw.readUInt16LE(16 + 2 * i);
  }
  return { width, height, classCount, labels };
}

export function encodeLbl(raster: LabelRaster): Buffer {
  const buf = Buffer.alloc(16 + 2 * raster.width * raster.height);
  buf.write("LBL1", 0, "latin1");
  buf.writeUInt32LE(raster.width, 4);
  buf.writeUInt32LE(raster.height, 8);
  buf.writeUInt32LE(raster.classCount, 12);
  for (let i = 0; i < raster.labels.length; i++) {
    buf.writeUInt16LE(raster.labels[i], 16 + 2 * i);
  }
  return buf;
}
