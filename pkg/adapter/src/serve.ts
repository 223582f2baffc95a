/**
 * The serving loop: read request lines, answer with response lines.
 *
 * The stream opens with a header line recording the backend and variant
 * tag. Malformed requests and unresolvable image_refs produce error
 * lines (carrying the request_id when recoverable) and processing
 * continues. Every response is flushed as one line.
 */

import { createInterface } from "node:readline";
import type { Readable, Writable } from "node:stream";

import { errorLine, headerLine, parseRequestLine, responseLine } from "./protocol.js";
import { Segmenter, UnknownImageError } from "./segmenter.js";

export interface ServeOptions {
  variant: string;
  backend: string;
  deterministic: boolean;
}

export async function serve(
  input: Readable,
  output: Writable,
  segmenter: Segmenter,
  options: ServeOptions,
): Promise<void> {
  output.write(
    headerLine({
      variant: options.variant,
      backend: options.backend,
      deterministic: options.deterministic,
    }) + "\n",
  );
  const lines = createInterface({ input, crlfDelay: Infinity });
  for await (const line of lines) {
    if (!line.trim()) continue;
    let requestId = "";
    try {
      const request = parseRequestLine(line);
      requestId = request.requestId;
      const prediction = await segmenter.predict(request.imageRef, request.points);
      output.write(
        responseLine(requestId, prediction.masks, prediction.width, prediction.height) +
          "\n",
      );
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      if (err instanceof UnknownImageError) {
        output.write(errorLine(requestId, message) + "\n");
      } else {
        output.write(errorLine(requestId, `malformed request: ${message}`) + "\n");
      }
    }
  }
}
