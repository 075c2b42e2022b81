/**
 * Sentence encoders behind one async interface.
 *
 * Two families are resolved from the model name: `hash-<dim>` is a
 * dependency-free deterministic feature-hashing encoder (useful offline
 * and in tests), and anything else is treated as a transformer model id
 * loaded through @xenova/transformers with mean pooling + L2
 * normalization, e.g. "Xenova/all-MiniLM-L6-v2".
 */

export interface Encoder {
  readonly name: string;
  encode(texts: string[]): Promise<Float32Array[]>;
}

const TOKEN_RE = /[\p{L}\p{N}]+/gu;

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

export function hashEncoder(dim: number): Encoder {
  if (!Number.isInteger(dim) || dim < 1) {
    throw new Error(`hash encoder dimension must be a positive integer, got ${dim}`);
  }
  const encodeOne = (text: string): Float32Array => {
    const row = new Float32Array(dim);
    const tokens = text.toLowerCase().match(TOKEN_RE) ?? [];
    for (const token of tokens) {
      const h = fnv1a(token);
      const bucket = h % dim;
      const sign = (h >>> 16) & 1 ? 1 : -1;
      row[bucket] += sign;
    }
    let norm = 0;
    for (const v of row) {
      norm += v * v;
    }
    norm = Math.sqrt(norm);
    if (norm > 0) {
      for (let i = 0; i < dim; i++) {
        row[i] /= norm;
      }
    }
    return row;
  };
  return {
    name: `hash-${dim}`,
    async encode(texts) {
      return texts.map(encodeOne);
    },
  };
}

export async function transformerEncoder(model: string): Promise<Encoder> {
  let extractor: any;
  try {
    const { pipeline } = await import("@xenova/transformers");
    extractor = await pipeline("feature-extraction", model);
  } catch (e) {
    const msg = e instanceof Error ? e.message : String(e);
    throw new Error(`failed to load encoder ${JSON.stringify(model)}: ${msg}`);
  }
  return {
    name: model,
    async encode(texts) {
      const out = await extractor(texts, { pooling: "mean", normalize: true });
      const [batch, dim] = out.dims as [number, number];
      if (batch !== texts.length) {
        throw new Error(`encoder returned ${batch} rows for ${texts.length} texts`);
      }
      const flat = out.data as Float32Array;
      const rows: Float32Array[] = [];
      for (let i = 0; i < batch; i++) {
        rows.push(Float32Array.from(flat.subarray(i * dim, (i + 1) * dim)));
      }
      return rows;
    },
  };
}

export async function resolveEncoder(model: string): Promise<Encoder> {
  const hashed = /^hash-(\d+)$/.exec(model);
  if (hashed) {
    return hashEncoder(Number(hashed[1]));
  }
  return transformerEncoder(model);
}
