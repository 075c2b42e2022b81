import { describe, expect, it } from "vitest";

import { hashEncoder, resolveEncoder, transformerEncoder } from "../src/encoders.js";

describe("hashEncoder", () => {
  it("is deterministic across calls", async () => {
    const enc = hashEncoder(64);
    const [a] = await enc.encode(["the quick brown fox"]);
    const [b] = await enc.encode(["the quick brown fox"]);
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("gives duplicate texts identical rows", async () => {
    const enc = hashEncoder(128);
    const [a, b] = await enc.encode(["Same words here.", "Same words here."]);
    for (let i = 0; i < a.length; i++) {
      expect(Math.abs(a[i] - b[i])).toBeLessThanOrEqual(1e-6);
    }
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("separates different texts", async () => {
    const enc = hashEncoder(128);
    const [a, b] = await enc.encode(["alpha beta gamma", "delta epsilon zeta"]);
    expect(Array.from(a)).not.toEqual(Array.from(b));
  });

  it("produces unit-norm rows for non-empty texts", async () => {
    const enc = hashEncoder(64);
    const [row] = await enc.encode(["several distinct tokens in a row"]);
    const norm = Math.sqrt(row.reduce((s, v) => s + v * v, 0));
    expect(norm).toBeCloseTo(1, 6); // float32 storage
  });

  it("leaves rows for token-free texts at zero", async () => {
    const enc = hashEncoder(64);
    const [row] = await enc.encode(["... !!! ..."]);
    expect(row.every((v) => v === 0)).toBe(true);
  });

  it("ignores case and punctuation", async () => {
    const enc = hashEncoder(64);
    const [a, b] = await enc.encode(["Hello, World!", "hello world"]);
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("rejects non-positive dimensions", () => {
    expect(() => hashEncoder(0)).toThrow(/positive integer/);
  });
});

describe("resolveEncoder", () => {
  it("maps hash-<dim> names to the hashing encoder", async () => {
    const enc = await resolveEncoder("hash-96");
    expect(enc.name).toBe("hash-96");
    const [row] = await enc.encode(["words"]);
    expect(row).toHaveLength(96);
  });
});

describe("transformerEncoder", () => {
  // needs downloadable weights; exercised only where the hub is reachable
  it("mean-pools and normalizes when the model loads", { timeout: 120_000 }, async (ctx) => {
    let enc;
    try {
      enc = await transformerEncoder("Xenova/all-MiniLM-L6-v2");
    } catch {
      ctx.skip();
      return;
    }
    const [a, b] = await enc.encode(["a small test sentence", "a small test sentence"]);
    expect(a).toHaveLength(384);
    for (let i = 0; i < a.length; i++) {
      expect(Math.abs(a[i] - b[i])).toBeLessThanOrEqual(1e-6);
    }
    const norm = Math.sqrt(a.reduce((s, v) => s + v * v, 0));
    expect(norm).toBeCloseTo(1, 3);
  });

  it("wraps load failures with the model name", async () => {
    await expect(transformerEncoder("no-such-org/no-such-model-xyz")).rejects.toThrow(
      /failed to load encoder "no-such-org\/no-such-model-xyz"/
    );
  });
});
