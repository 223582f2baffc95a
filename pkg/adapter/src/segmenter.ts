/**
 * Mask backends. A Segmenter answers point prompts on one image with
 * exactly three candidate masks (whole / part / subpart) plus scores.
 *
 * The shipped backend derives instances from LBL1 label rasters: the
 * whole candidate is the connected component of the prompts' majority
 * class, the part is its half on the prompt-centroid side, the subpart
 * the quarter nearest the centroid. It is fully deterministic. A
 * checkpoint-based segmenter plugs in behind the same interface.
 */

import { readFile } from "node:fs/promises";
import { join, normalize } from "node:path";

import { IGNORE_VALUE, LabelRaster, decodeLbl } from "./lbl.js";
import { CandidateMask } from "./protocol.js";
import { LruCache } from "./cache.js";

export interface Prediction {
  masks: CandidateMask[];
  width: number;
  height: number;
}

export interface Segmenter {
  predict(imageRef: string, points: [number, number][]): Promise<Prediction>;
}

export class UnknownImageError extends Error {}

const NESTED_SCORES = [0.6, 0.9, 0.7];

export class LabelOracleSegmenter implements Segmenter {
  private cache: LruCache<string, LabelRaster>;

  constructor(private imageRoot: string, cacheSize = 16) {
    this.cache = new LruCache(cacheSize);
  }

  async predict(imageRef: string, points: [number, number][]): Promise<Prediction> {
    const raster = await this.load(imageRef);
    const { width, height } = raster;
    const empty = () => ({ bits: new Uint8Array(width * height), score: 0 });

    const majority = majorityClass(raster, points);
    if (majority === null) {
      return { masks: [empty(), empty(), empty()], width, height };
    }
    const inside = points.filter(
      ([x, y]) => labelAt(raster, x, y) === majority,
    );
    const whole = componentContaining(raster, majority, inside[0]);
    const [cx, cy] = centroid(inside);
    const [part, subpart] = nestedParts(whole, width, height, cx, cy);
    return {
      masks: [
        { bits: whole, score: NESTED_SCORES[0] },
        { bits: part, score: NESTED_SCORES[1] },
        { bits: subpart, score: NESTED_SCORES[2] },
      ],
      width,
      height,
    };
  }

  private async load(imageRef: string): Promise<LabelRaster> {
    const hit = this.cache.get(imageRef);
    if (hit) return hit;
    const clean = normalize(imageRef);
    if (clean.startsWith("..") || clean.startsWith("/")) {
      throw new UnknownImageError(`image_ref escapes the image root: ${imageRef}`);
    }
    let raw: Buffer;
    try {
      raw = await readFile(join(this.imageRoot, clean));
    } catch {
      throw new UnknownImageError(`cannot resolve image_ref ${imageRef}`);
    }
    const raster = decodeLbl(raw);
    this.cache.set(imageRef, raster);
    return raster;
  }
}

function labelAt(r: LabelRaster, x: number, y: number): number | null {
  if (x < 0 || y < 0 || x >= r.width || y >= r.height) return null;
  const v = r.labels[y * r.width + x];
  return v === IGNORE_VALUE || v === 0 ? null : v;
}

function majorityClass(r: LabelRaster, points: [number, number][]): number | null {
  const counts = new Map<number, number>();
  for (const [x, y] of points) {
    const v = labelAt(r, x, y);
    if (v !== null) counts.set(v, (counts.get(v) ?? 0) + 1);
  }
  let best: number | null = null;
  let bestCount = 0;
  for (const [cls, count] of [...counts.entries()].sort((a, b) => a[0] - b[0])) {
    if (count > bestCount) {
      best = cls;
      bestCount = count;
    }
  }
  return best;
}

function componentContaining(
  r: LabelRaster,
  cls: number,
  seed: [number, number],
): Uint8Array {
  const { width, height, labels } = r;
  const bits = new Uint8Array(width * height);
  const stack = [seed[1] * width + seed[0]];
  bits[stack[0]] = 1;
  while (stack.length) {
    const idx = stack.pop()!;
    const x = idx % width;
    const y = (idx - x) / width;
    for (let dy = -1; dy <= 1; dy++) {
      for (let dx = -1; dx <= 1; dx++) {
        if (dx === 0 && dy === 0) continue;
        const nx = x + dx;
        const ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const nidx = ny * width + nx;
        if (!bits[nidx] && labels[nidx] === cls) {
          bits[nidx] = 1;
          stack.push(nidx);
        }
      }
    }
  }
  return bits;
}

function centroid(points: [number, number][]): [number, number] {
  const sx = points.reduce((a, p) => a + p[0], 0);
  const sy = points.reduce((a, p) => a + p[1], 0);
  return [sx / points.length, sy / points.length];
}

function boundingBox(bits: Uint8Array, width: number, height: number) {
  let x0 = width, y0 = height, x1 = 0, y1 = 0;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      if (bits[y * width + x]) {
        if (x < x0) x0 = x;
        if (y < y0) y0 = y;
        if (x >= x1) x1 = x + 1;
        if (y >= y1) y1 = y + 1;
      }
    }
  }
  return { x0, y0, x1, y1 };
}

function nestedParts(
  whole: Uint8Array,
  width: number,
  height: number,
  cx: number,
  cy: number,
): [Uint8Array, Uint8Array] {
  const box = boundingBox(whole, width, height);
  const xm = box.x0 + Math.floor((box.x1 - box.x0) / 2);
  const ym = box.y0 + Math.floor((box.y1 - box.y0) / 2);
  const horizontalCut = box.x1 - box.x0 >= box.y1 - box.y0;
  const part = new Uint8Array(width * height);
  const subpart = new Uint8Array(width * height);
  const xLow = cx < xm;
  const yLow = cy < ym;
  for (let y = box.y0; y < box.y1; y++) {
    for (let x = box.x0; x < box.x1; x++) {
      const idx = y * width + x;
      if (!whole[idx]) continue;
      const inHalf = horizontalCut ? (xLow ? x < xm : x >= xm) : yLow ? y < ym : y >= ym;
      if (inHalf) part[idx] = 1;
      const inQuarter = (xLow ? x < xm : x >= xm) && (yLow ? y < ym : y >= ym);
      if (inQuarter) subpart[idx] = 1;
    }
  }
  return [part, subpart];
}
