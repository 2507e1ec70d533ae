#!/usr/bin/env node
// extract --uses PATH --model NAME --layers 1-12 --out DIR
//         [--max-length N] [--window center|tail] [--batch-size N]

import { parseArgs } from "node:util";

import { resolveEncoder } from "./encoder.js";
import { extract } from "./extract.js";
import { WindowPolicy } from "./tokenizer.js";
import { loadUses } from "./usesFile.js";

export function parseLayers(raw: string): number[] {
  const out = new Set<number>();
  for (const part of raw.split(",")) {
    const range = /^(\d+)-(\d+)$/.exec(part.trim());
    if (range) {
      for (let k = Number(range[1]); k <= Number(range[2]); k++) {
        out.add(k);
      }
    } else if (/^\d+$/.test(part.trim())) {
      out.add(Number(part.trim()));
    } else {
      throw new Error(`cannot parse --layers component '${part}'`);
    }
  }
  if (out.size === 0) {
    throw new Error("--layers selected nothing");
  }
  return [...out].sort((a, b) => a - b);
}

export async function main(argv: string[]): Promise<number> {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      uses: { type: "string" },
      model: { type: "string", default: "hash" },
      layers: { type: "string", default: "1-12" },
      out: { type: "string" },
      "max-length": { type: "string", default: "128" },
      window: { type: "string", default: "center" },
      "batch-size": { type: "string", default: "16" },
    },
  });
  if (positionals[0] !== "extract" || !values.uses || !values.out) {
    console.error(
      "usage: lscd-extract extract --uses PATH --out DIR [--model NAME] " +
        "[--layers 1-12] [--max-length N] [--window center|tail] [--batch-size N]",
    );
    return 2;
  }
  if (values.window !== "center" && values.window !== "tail") {
    console.error(`unknown --window '${values.window}'; expected center or tail`);
    return 2;
  }

  const layers = parseLayers(values.layers!);
  const usages = loadUses(values.uses);
  const encoder = await resolveEncoder(values.model!, Math.max(12, ...layers));
  const result = await extract(usages, encoder, {
    layers,
    maxLength: Number(values["max-length"]),
    windowPolicy: values.window as WindowPolicy,
    batchSize: Number(values["batch-size"]),
  }, values.out);

  for (const skip of result.skipped) {
    console.error(`warning: skipped ${skip.usageId}: ${skip.reason}`);
  }
  console.log(
    `wrote ${result.written.length} file(s) for ${usages.length - result.skipped.length} usage(s)`,
  );
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(process.argv.slice(2))
    .then((code) => {
      process.exitCode = code;
    })
    .catch((error) => {
      console.error(`lscd-extract: ${error instanceof Error ? error.message : error}`);
      process.exitCode = 1;
    });
}
