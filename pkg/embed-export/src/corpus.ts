/**
 * JSONL corpus reader matching the pipeline's corpus contract: one object
 * per line with `id` and `text`, blank lines skipped, ids unique.
 */

import { readFileSync } from "node:fs";

export interface CorpusDoc {
  id: string;
  text: string;
}

export function readCorpusJsonl(path: string): CorpusDoc[] {
  const raw = readFileSync(path, "utf-8");
  const docs: CorpusDoc[] = [];
  const seen = new Set<string>();
  const lines = raw.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) {
      continue;
    }
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new Error(`line ${i + 1}: not valid JSON`);
    }
    if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
      throw new Error(`line ${i + 1}: expected a JSON object`);
    }
    const record = obj as Record<string, unknown>;
    if (!("id" in record)) {
      throw new Error(`line ${i + 1}: missing "id"`);
    }
    if (!("text" in record)) {
      throw new Error(`line ${i + 1}: missing "text"`);
    }
    const id = String(record.id);
    if (seen.has(id)) {
      throw new Error(`line ${i + 1}: duplicate document id ${JSON.stringify(id)}`);
    }
    seen.add(id);
    docs.push({ id, text: String(record.text) });
  }
  return docs;
}
