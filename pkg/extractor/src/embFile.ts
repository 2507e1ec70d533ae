// Writer for the embedding interchange format: a header line
// `#dim=<d>\tcount=<n>\tlayer=<spec>\tmodel=<name>` followed by one
// `usage_id\t<floats>` row per usage. Floats carry 8 significant digits.

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

export interface EmbeddingRow {
  usageId: string;
  vector: number[];
}

export function formatFloat(x: number): string {
  if (Number.isInteger(x) && Math.abs(x) < 1e15) {
    return String(x);
  }
  // toPrecision(8) then strip trailing zeros, keeping exponent notation
  const text = x.toPrecision(8);
  if (text.includes("e")) {
    const [mant, exp] = text.split("e");
    return `${mant.replace(/\.?0+$/, "")}e${exp}`;
  }
  return text.replace(/(\.\d*?)0+$/, "$1").replace(/\.$/, "");
}

export function renderEmbeddingFile(
  rows: EmbeddingRow[],
  dim: number,
  layerSpec: string,
  model: string,
): string {
  const lines = [`#dim=${dim}\tcount=${rows.length}\tlayer=${layerSpec}\tmodel=${model}`];
  for (const row of rows) {
    if (row.vector.length !== dim) {
      throw new Error(
        `row for ${row.usageId} has ${row.vector.length} values, expected ${dim}`,
      );
    }
    lines.push(`${row.usageId}\t${row.vector.map(formatFloat).join(" ")}`);
  }
  return lines.join("\n") + "\n";
}

export function writeEmbeddingFile(
  path: string,
  rows: EmbeddingRow[],
  dim: number,
  layerSpec: string,
  model: string,
): void {
  mkdirSync(dirname(path), { recursive: true });
  writeFileSync(path, renderEmbeddingFile(rows, dim, layerSpec, model), "utf-8");
}
