#!/usr/bin/env node
/** figures --kind K --in FILE [--in FILE2] --out IMG */

import path from "node:path";
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { FIGURE_KINDS, FigureKind, render } from "./figures.js";

export function main(argv: string[]): number {
  const args = yargs(argv)
    .scriptName("figures")
    .usage("$0 --kind K --in FILE [--in FILE2] --out IMG")
    .option("kind", {
      choices: FIGURE_KINDS,
      demandOption: true,
      describe: "figure kind to render",
    })
    .option("in", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "input experiment CSV (repeatable)",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output SVG path",
    })
    .strict()
    .exitProcess(false)
    .parseSync();

  try {
    render({ kind: args.kind as FigureKind, inputs: args.in, out: args.out });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(path.resolve(process.argv[1])).href;
if (invokedDirectly) {
  process.exit(main(hideBin(process.argv)));
}
