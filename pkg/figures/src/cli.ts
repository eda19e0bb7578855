/** Shared command-line front end for the per-figure scripts. */

import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { FigureKind, FigureSpec, renderFigure } from "./figure.js";

export function parseArgs(kind: FigureKind, argv: string[]): FigureSpec {
  const parsed = yargs(argv)
    .option("in", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "input result file(s) in the simulator's CSV format",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output SVG path",
    })
    .option("group-by", {
      type: "string",
      describe: "column that separates the curves",
    })
    .strict()
    .parseSync();
  return {
    kind,
    inputs: parsed.in as string[],
    output: parsed.out as string,
    groupBy: parsed["group-by"],
  };
}

export function runFigureCli(kind: FigureKind, argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(kind, argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  try {
    const svg = renderFigure(spec);
    writeFileSync(spec.output, svg, "utf-8");
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}
