#!/usr/bin/env node
/** plotkit --kind <figure_kind> --csv <paths...> --out fig.png [--log-y 0|1] */

import { FIGURE_KINDS, type FigureKind, type FigureSpec } from "./figure.js";
import { render } from "./render.js";

export function parseArgs(argv: string[]): FigureSpec {
  let kind: string | undefined;
  const csv: string[] = [];
  let out: string | undefined;
  let logY: boolean | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--kind") {
      kind = argv[++i];
    } else if (a === "--csv") {
      while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        csv.push(argv[++i]);
      }
    } else if (a === "--out") {
      out = argv[++i];
    } else if (a === "--log-y") {
      logY = argv[++i] !== "0";
    } else {
      throw new Error(`unknown argument '${a}'`);
    }
  }
  if (!kind || !(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new Error(`--kind must be one of: ${FIGURE_KINDS.join(", ")}`);
  }
  if (csv.length === 0) {
    throw new Error("--csv needs at least one path");
  }
  if (!out) {
    throw new Error("--out is required");
  }
  return { csvPaths: csv, figureKind: kind as FigureKind, outputPath: out, logY };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    render(spec);
    console.log(`wrote ${spec.outputPath}`);
    return 0;
  } catch (err) {
    console.error(`plotkit: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plotkit")) {
  process.exit(main(process.argv.slice(2)));
}
