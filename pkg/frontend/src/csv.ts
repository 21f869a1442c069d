/** Result-table reader for the sensing harness CSV contract. */

import { readFileSync } from "node:fs";

export interface ResultRow {
  sweep: number;
  metric: string;
  value: number;
  trials: number;
  seed: number;
}

export const EXPECTED_HEADER = ["sweep", "metric", "value", "trials", "seed"];

/** Parse one harness CSV; rejects files whose header deviates. */
export function parseResultCsv(text: string, source = "<csv>"): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`${source}: empty file`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  if (
    header.length !== EXPECTED_HEADER.length ||
    header.some((h, i) => h !== EXPECTED_HEADER[i])
  ) {
    throw new Error(
      `${source}: expected header '${EXPECTED_HEADER.join(",")}', got '${lines[0]}'`,
    );
  }
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 5) {
      throw new Error(`${source}:${i + 1}: expected 5 columns`);
    }
    const sweep = Number(parts[0]);
    const value = Number(parts[2]);
    const trials = Number(parts[3]);
    const seed = Number(parts[4]);
    if (!Number.isFinite(sweep) || !Number.isFinite(value)) {
      throw new Error(`${source}:${i + 1}: non-numeric sweep or value`);
    }
    rows.push({ sweep, metric: parts[1].trim(), value, trials, seed });
  }
  return rows;
}

export function loadResultCsvs(paths: string[]): ResultRow[] {
  const out: ResultRow[] = [];
  for (const p of paths) {
    out.push(...parseResultCsv(readFileSync(p, "utf-8"), p));
  }
  return out;
}
