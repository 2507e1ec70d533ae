// Parsing of the tab-separated uses format shared with the scoring package:
// a header row naming at least lemma, identifier, context,
// indexes_target_token ("start:end" character offsets) and grouping.

import { readFileSync } from "node:fs";

export interface Usage {
  usageId: string;
  lemma: string;
  context: string;
  targetStart: number;
  targetEnd: number;
  periodId: string;
}

const REQUIRED = [
  "lemma",
  "identifier",
  "context",
  "indexes_target_token",
  "grouping",
] as const;

export function parseUses(text: string, where = "<uses>"): Usage[] {
  const lines = text.split("\n");
  if (lines.length === 0 || lines[0].trim() === "") {
    throw new Error(`${where}: empty uses file`);
  }
  const header = lines[0].replace(/\r$/, "").split("\t");
  const col: Record<string, number> = {};
  header.forEach((name, i) => {
    col[name] = i;
  });
  for (const name of REQUIRED) {
    if (!(name in col)) {
      throw new Error(`${where}: missing column '${name}'`);
    }
  }
  const usages: Usage[] = [];
  for (let lineno = 1; lineno < lines.length; lineno++) {
    const raw = lines[lineno].replace(/\r$/, "");
    if (raw === "") continue;
    const fields = raw.split("\t");
    const span = fields[col.indexes_target_token] ?? "";
    const match = /^(\d+):(\d+)$/.exec(span.trim());
    if (!match) {
      throw new Error(`${where}:${lineno + 1}: cannot parse offsets '${span}'`);
    }
    const start = Number(match[1]);
    const end = Number(match[2]);
    const context = fields[col.context] ?? "";
    if (!(start >= 0 && start < end && end <= context.length)) {
      throw new Error(
        `${where}:${lineno + 1}: offsets ${start}:${end} out of bounds for context of length ${context.length}`,
      );
    }
    usages.push({
      usageId: fields[col.identifier],
      lemma: fields[col.lemma],
      context,
      targetStart: start,
      targetEnd: end,
      periodId: fields[col.grouping],
    });
  }
  return usages;
}

export function loadUses(path: string): Usage[] {
  return parseUses(readFileSync(path, "utf-8"), path);
}
