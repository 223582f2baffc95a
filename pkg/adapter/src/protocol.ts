/**
 * Line protocol objects: one JSON object per line.
 * request  = {request_id, image_ref, points: [[x, y], ...]}
 * response = {request_id, masks: [{rle: <base64>, score} x3], width, height}
 * error    = {request_id, error}
 * header   = {header: {...}} (first line of a response stream)
 */

import { encodeRle } from "./rle.js";

export interface WireRequest {
  requestId: string;
  imageRef: string;
  points: [number, number][];
}

export interface CandidateMask {
  bits: Uint8Array;
  score: number;
}

export function parseRequestLine(line: string): WireRequest {
  const obj = JSON.parse(line);
  if (typeof obj !== "object" || obj === null) throw new Error("not an object");
  const { request_id, image_ref, points } = obj as Record<string, unknown>;
  if (typeof request_id !== "string" && typeof request_id !== "number") {
    throw new Error("missing request_id");
  }
  if (typeof image_ref !== "string") throw new Error("missing image_ref");
  if (!Array.isArray(points) || points.length === 0) {
    throw new Error("a request carries at least one point");
  }
  const parsed: [number, number][] = points.map((p) => {
    if (!Array.isArray(p) || p.length !== 2) throw new Error("bad point");
    const [x, y] = p;
    if (!Number.isInteger(x) || !Number.isInteger(y)) throw new Error("bad point");
    return [x, y];
  });
  return { requestId: String(request_id), imageRef: image_ref, points: parsed };
}

export function responseLine(
  requestId: string,
  masks: CandidateMask[],
  width: number,
  height: number,
): string {
  if (masks.length !== 3) throw new Error("protocol requires exactly 3 masks");
  return JSON.stringify({
    request_id: requestId,
    masks: masks.map((m) => ({
      rle: Buffer.from(encodeRle(m.bits)).toString("base64"),
      score: m.score,
    })),
    width,
    height,
  });
}

export function errorLine(requestId: string, message: string): string {
  return JSON.stringify({ request_id: requestId, error: message });
}

export function headerLine(fields: Record<string, unknown>): string {
  return JSON.stringify({ header: fields });
}
