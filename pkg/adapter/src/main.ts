#!/usr/bin/env node
/**
 * Adapter entry point.
 *
 *   node dist/main.js --image-root DIR [--variant vit_b] [--deterministic]
 *                     [--requests IN.jsonl --responses OUT.jsonl]
 *                     [--cache-size 16] [--backend label-oracle]
 *
 * Default transport is stdin/stdout; the --requests/--responses pair
 * switches to file mode. The label-oracle backend answers from LBL1
 * rasters under --image-root; a checkpoint-based backend would be
 * selected with --backend and --checkpoint once linked in.
 */

import { createReadStream, createWriteStream } from "node:fs";
import process from "node:process";

import { serve } from "./serve.js";
import { LabelOracleSegmenter, Segmenter } from "./segmenter.js";

interface Flags {
  imageRoot: string;
  variant: string;
  backend: string;
  deterministic: boolean;
  cacheSize: number;
  requests?: string;
  responses?: string;
  checkpoint?: string;
  device: string;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {
    imageRoot: ".",
    variant: "vit_b",
    backend: "label-oracle",
    deterministic: false,
    cacheSize: 16,
    device: "cpu",
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      const v = argv[++i];
      if (v === undefined) throw new Error(`flag ${arg} needs a value`);
      return v;
    };
    switch (arg) {
      case "--image-root":
        flags.imageRoot = next();
        break;
      case "--variant":
        flags.variant = next();
        break;
      case "--backend":
        flags.backend = next();
        break;
      case "--deterministic":
        flags.deterministic = true;
        break;
      case "--cache-size":
        flags.cacheSize = Number(next());
        break;
      case "--requests":
        flags.requests = next();
        break;
      case "--responses":
        flags.responses = next();
        break;
      case "--checkpoint":
        flags.checkpoint = next();
        break;
      case "--device":
        flags.device = next();
        break;
      default:
        throw new Error(`unknown flag ${arg}`);
    }
  }
  return flags;
}

function buildSegmenter(flags: Flags): Segmenter {
  if (flags.backend === "label-oracle") {
    return new LabelOracleSegmenter(flags.imageRoot, flags.cacheSize);
  }
  throw new Error(
    `backend ${flags.backend} is not linked into this build; ` +
      "implement the Segmenter interface and register it here",
  );
}

async function main(): Promise<number> {
  let flags: Flags;
  try {
    flags = parseFlags(process.argv.slice(2));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  if ((flags.requests === undefined) !== (flags.responses === undefined)) {
    console.error("--requests and --responses must be given together");
    return 2;
  }
  const segmenter = buildSegmenter(flags);
  const input = flags.requests ? createReadStream(flags.requests) : process.stdin;
  const output = flags.responses ? createWriteStream(flags.responses) : process.stdout;
  await serve(input, output, segmenter, {
    variant: flags.variant,
    backend: flags.backend,
    deterministic: flags.deterministic,
  });
  if (flags.responses) {
    await new Promise<void>((resolve, reject) =>
      (output as import("node:fs").WriteStream).close((err) =>
        err ? reject(err) : resolve(),
      ),
    );
  }
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
