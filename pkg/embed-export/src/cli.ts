#!/usr/bin/env node
/**
 * embed-export --corpus <jsonl> --model <name> --out <file> [--batch 64]
 */

import { realpathSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { exportEmbeddings } from "./export.js";

const USAGE = "usage: embed-export --corpus <jsonl> --model <name> --out <file> [--batch 64]";

export function parseArgs(argv: string[]): { corpus: string; model: string; out: string; batch: number } {
  const values: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(USAGE);
    }
    values[flag.slice(2)] = argv[i + 1];
  }
  const { corpus, model, out, batch = "64", ...rest } = values;
  const unknown = Object.keys(rest);
  if (unknown.length > 0) {
    throw new Error(`unknown flag --${unknown[0]}\n${USAGE}`);
  }
  if (!corpus || !model || !out) {
    throw new Error(USAGE);
  }
  const batchSize = Number(batch);
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new Error(`--batch must be a positive integer, got ${JSON.stringify(batch)}`);
  }
  return { corpus, model, out, batch: batchSize };
}

export async function main(argv: string[]): Promise<number> {
  let args: ReturnType<typeof parseArgs>;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error(e instanceof Error ? e.message : String(e));
    return 2;
  }
  try {
    const summary = await exportEmbeddings({
      corpusPath: args.corpus,
      model: args.model,
      outPath: args.out,
      batchSize: args.batch,
    });
    console.log(`wrote ${summary.rows} x ${summary.dim} embeddings to ${args.out}`);
    return 0;
  } catch (e) {
    console.error(`error: ${e instanceof Error ? e.message : String(e)}`);
    return 1;
  }
}

const entryUrl = process.argv[1] ? pathToFileURL(realpathSync(process.argv[1])).href : "";
if (import.meta.url === entryUrl) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
