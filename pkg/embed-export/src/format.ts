/**
 * TPFG embeddings interchange file.
 *
 * Layout: "TPFG" magic, u32 LE version (1), u64 LE row count, u32 LE
 * dimension, then one u16 LE byte length + UTF-8 bytes per document id
 * in row order, then the float32 LE row-major matrix. No trailing bytes.
 */

import { writeFileSync, readFileSync } from "node:fs";

export const TPFG_MAGIC = "TPFG";
export const TPFG_VERSION = 1;

export interface EmbeddingFile {
  ids: string[];
  dim: number;
  /** Row-major, ids.length * dim values. */
  data: Float32Array;
}

export function encodeTpfg(ids: string[], rows: Float32Array[], dim: number): Buffer {
  if (dim < 1) {
    throw new Error(`embedding dimension must be >= 1, got ${dim}`);
  }
  if (ids.length !== rows.length) {
    throw new Error(`id/row mismatch: ${ids.length} ids for ${rows.length} rows`);
  }
  const idBytes = ids.map((id) => Buffer.from(id, "utf-8"));
  for (const [i, b] of idBytes.entries()) {
    if (b.length > 0xffff) {
      throw new Error(`id at row ${i} exceeds 65535 UTF-8 bytes`);
    }
  }
  for (const [i, row] of rows.entries()) {
    if (row.length !== dim) {
      throw new Error(`row ${i} has ${row.length} values, expected ${dim}`);
    }
    for (const v of row) {
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite value in row ${i}`);
      }
    }
  }

  const headerSize = 4 + 4 + 8 + 4;
  const idsSize = idBytes.reduce((s, b) => s + 2 + b.length, 0);
  const buf = Buffer.alloc(headerSize + idsSize + ids.length * dim * 4);
  let offset = 0;
  offset += buf.write(TPFG_MAGIC, offset, "ascii");
  offset = buf.writeUInt32LE(TPFG_VERSION, offset);
  offset = buf.writeBigUInt64LE(BigInt(ids.length), offset);
  offset = buf.writeUInt32LE(dim, offset);
  for (const b of idBytes) {
    offset = buf.writeUInt16LE(b.length, offset);
    offset += b.copy(buf, offset);
  }
  for (const row of rows) {
    for (const v of row) {
      offset = buf.writeFloatLE(v, offset);
    }
  }
  return buf;
}

export function writeTpfg(path: string, ids: string[], rows: Float32Array[], dim: number): void {
  writeFileSync(path, encodeTpfg(ids, rows, dim));
}

export function decodeTpfg(buf: Buffer): EmbeddingFile {
  const need = (n: number, offset: number, what: string) => {
    if (offset + n > buf.length) {
      throw new Error(`truncated TPFG data while reading ${what}`);
    }
  };
  need(4, 0, "magic");
  if (buf.toString("ascii", 0, 4) !== TPFG_MAGIC) {
    throw new Error("not a TPFG file (bad magic)");
  }
  need(4, 4, "version");
  const version = buf.readUInt32LE(4);
  if (version !== TPFG_VERSION) {
    throw new Error(`unsupported TPFG version ${version}`);
  }
  need(8, 8, "row count");
  const rowsBig = buf.readBigUInt64LE(8);
  if (rowsBig > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new Error("row count does not fit in a safe integer");
  }
  const rows = Number(rowsBig);
  need(4, 16, "dimension");
  const dim = buf.readUInt32LE(16);
  if (dim < 1) {
    throw new Error(`embedding dimension must be >= 1, got ${dim}`);
  }

  let offset = 20;
  const ids: string[] = [];
  for (let i = 0; i < rows; i++) {
    need(2, offset, `id length at row ${i}`);
    const len = buf.readUInt16LE(offset);
    offset += 2;
    need(len, offset, `id at row ${i}`);
    ids.push(buf.toString("utf-8", offset, offset + len));
    offset += len;
  }

  const payload = rows * dim * 4;
  need(payload, offset, "matrix payload");
  const data = new Float32Array(rows * dim);
  for (let k = 0; k < data.length; k++) {
    data[k] = buf.readFloatLE(offset + k * 4);
  }
  offset += payload;
  if (offset !== buf.length) {
    throw new Error(`trailing bytes after TPFG payload (${buf.length - offset})`);
  }
  for (const v of data) {
    if (!Number.isFinite(v)) {
      throw new Error("non-finite value in TPFG payload");
    }
  }
  return { ids, dim, data };
}

export function readTpfg(path: string): EmbeddingFile {
  return decodeTpfg(readFileSync(path));
}
