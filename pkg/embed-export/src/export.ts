/**
 * Corpus-to-embeddings export: encode every document and write one TPFG
 * file with ids in corpus order.
 */

import { readCorpusJsonl } from "./corpus.js";
import { resolveEncoder } from "./encoders.js";
import { writeTpfg } from "./format.js";

export interface ExportJob {
  corpusPath: string;
  model: string;
  outPath: string;
  batchSize: number;
}

export interface ExportSummary {
  rows: number;
  dim: number;
}

export async function exportEmbeddings(job: ExportJob): Promise<ExportSummary> {
  if (!Number.isInteger(job.batchSize) || job.batchSize < 1) {
    throw new Error(`batch size must be a positive integer, got ${job.batchSize}`);
  }
  const docs = readCorpusJsonl(job.corpusPath);
  if (docs.length === 0) {
    throw new Error(`${job.corpusPath}: corpus has no documents`);
  }
  const encoder = await resolveEncoder(job.model);

  // fixed batch order: row order is the id contract
  const rows: Float32Array[] = [];
  for (let start = 0; start < docs.length; start += job.batchSize) {
    const batch = docs.slice(start, start + job.batchSize);
    const encoded = await encoder.encode(batch.map((d) => d.text));
    if (encoded.length !== batch.length) {
      throw new Error(
        `encoder returned ${encoded.length} rows for a batch of ${batch.length}`
      );
    }
    rows.push(...encoded);
  }

  if (rows.length !== docs.length) {
    throw new Error(`id/row mismatch: ${docs.length} documents but ${rows.length} rows`);
  }
  const dim = rows[0].length;
  if (dim < 1) {
    throw new Error(`encoder ${JSON.stringify(encoder.name)} produced dimension 0`);
  }
  writeTpfg(
    job.outPath,
    docs.map((d) => d.id),
    rows,
    dim
  );
  return { rows: rows.length, dim };
}
