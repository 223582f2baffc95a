import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { PassThrough } from "node:stream";

import { beforeAll, describe, expect, it } from "vitest";

import { encodeLbl, IGNORE_VALUE, LabelRaster } from "../src/lbl.js";
import { decodeRle } from "../src/rle.js";
import { LabelOracleSegmenter } from "../src/segmenter.js";
import { serve } from "../src/serve.js";
import { LruCache } from "../src/cache.js";

let imageRoot: string;

/** 30x20 raster: class 1 rectangle x[4,16) y[4,14), class 2 square x[20,28) y[10,18). */
function fixtureRaster(): LabelRaster {
  const width = 30;
  const height = 20;
  const labels = new Uint16Array(width * height);
  for (let y = 4; y < 14; y++) for (let x = 4; x < 16; x++) labels[y * width + x] = 1;
  for (let y = 10; y < 18; y++) for (let x = 20; x < 28; x++) labels[y * width + x] = 2;
  return { width, height, classCount: 3, labels };
}

beforeAll(() => {
  imageRoot = mkdtempSync(join(tmpdir(), "adapter-fixtures-"));
  writeFileSync(join(imageRoot, "img0.lbl"), encodeLbl(fixtureRaster()));
});

async function runServe(lines: string[]): Promise<string> {
  const input = new PassThrough();
  const output = new PassThrough();
  const chunks: Buffer[] = [];
  output.on("data", (c) => chunks.push(Buffer.from(c)));
  const segmenter = new LabelOracleSegmenter(imageRoot);
  const done = serve(input, output, segmenter, {
    variant: "vit_b",
    backend: "label-oracle",
    deterministic: true,
  });
  input.end(lines.join("\n") + "\n");
  await done;
  return Buffer.concat(chunks).toString("utf8");
}

describe("serve loop", () => {
  it("opens with a header carrying the variant tag", async () => {
    const out = await runServe([
      JSON.stringify({ request_id: "a", image_ref: "img0.lbl", points: [[5, 5]] }),
    ]);
    const first = JSON.parse(out.split("\n")[0]);
    expect(first.header.variant).toBe("vit_b");
    expect(first.header.backend).toBe("label-oracle");
  });

  it("answers with exactly three masks that decode to image dimensions", async () => {
    const out = await runServe([
      JSON.stringify({ request_id: "a", image_ref: "img0.lbl", points: [[5, 5], [10, 9]] }),
    ]);
    const resp = JSON.parse(out.trim().split("\n")[1]);
    expect(resp.request_id).toBe("a");
    expect(resp.masks).toHaveLength(3);
    expect(resp.width).toBe(30);
    expect(resp.height).toBe(20);
    const whole = decodeRle(Buffer.from(resp.masks[0].rle, "base64"), 30, 20);
    expect(whole.reduce((a: number, b: number) => a + b, 0)).toBe(12 * 10);
    const part = decodeRle(Buffer.from(resp.masks[1].rle, "base64"), 30, 20);
    expect(part.reduce((a: number, b: number) => a + b, 0)).toBe(6 * 10);
  });

  it("routes prompts to the majority class component", async () => {
    const out = await runServe([
      JSON.stringify({
        request_id: "m",
        image_ref: "img0.lbl",
        points: [[5, 5], [22, 12], [25, 15]],
      }),
    ]);
    const resp = JSON.parse(out.trim().split("\n")[1]);
    const whole = decodeRle(Buffer.from(resp.masks[0].rle, "base64"), 30, 20);
    expect(whole.reduce((a: number, b: number) => a + b, 0)).toBe(8 * 8);
  });

  it("returns empty zero-score candidates for background prompts", async () => {
    const out = await runServe([
      JSON.stringify({ request_id: "bg", image_ref: "img0.lbl", points: [[0, 0]] }),
    ]);
    const resp = JSON.parse(out.trim().split("\n")[1]);
    for (const m of resp.masks) {
      expect(m.score).toBe(0);
      const bits = decodeRle(Buffer.from(m.rle, "base64"), 30, 20);
      expect(bits.every((b: number) => b === 0)).toBe(true);
    }
  });

  it("emits an error line with the request_id for unknown images", async () => {
    const out = await runServe([
      JSON.stringify({ request_id: "gone", image_ref: "missing.lbl", points: [[1, 1]] }),
    ]);
    const resp = JSON.parse(out.trim().split("\n")[1]);
    expect(resp.request_id).toBe("gone");
    expect(resp.error).toMatch(/cannot resolve/);
  });

  it("keeps serving after a malformed request", async () => {
    const out = await runServe([
      "{this is not json",
      JSON.stringify({ request_id: "ok", image_ref: "img0.lbl", points: [[5, 5]] }),
    ]);
    const lines = out.trim().split("\n");
    expect(JSON.parse(lines[1]).error).toMatch(/malformed/);
    expect(JSON.parse(lines[2]).request_id).toBe("ok");
  });

  it("is byte-identical across sessions in deterministic mode", async () => {
    const lines = [
      JSON.stringify({ request_id: "a", image_ref: "img0.lbl", points: [[5, 5], [12, 8]] }),
      JSON.stringify({ request_id: "b", image_ref: "img0.lbl", points: [[22, 12]] }),
    ];
    expect(await runServe(lines)).toBe(await runServe(lines));
  });

  it("rejects image refs escaping the root", async () => {
    const out = await runServe([
      JSON.stringify({ request_id: "esc", image_ref: "../secrets.lbl", points: [[1, 1]] }),
    ]);
    expect(JSON.parse(out.trim().split("\n")[1]).error).toMatch(/escapes|cannot/);
  });
});

describe("lru cache", () => {
  it("evicts the least recently used entry", () => {
    const cache = new LruCache<string, number>(2);
    cache.set("a", 1);
    cache.set("b", 2);
    cache.get("a");
    cache.set("c", 3);
    expect(cache.get("b")).toBeUndefined();
    expect(cache.get("a")).toBe(1);
    expect(cache.size).toBe(2);
  });
});
