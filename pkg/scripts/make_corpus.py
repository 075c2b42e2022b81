#!/usr/bin/env python3
"""Write a synthetic labelled corpus as JSONL.

Each line carries id, text, timestamp, and category, so the output works
with every CLI subcommand including `dtm --group-by category`.
Run: python scripts/make_corpus.py --out corpus.jsonl --n-docs 2000
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from topicforge.datasets import synthetic_corpus  # noqa: E402


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output JSONL path")
    parser.add_argument("--n-docs", type=int, default=2000)
    parser.add_argument("--categories", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--words-per-category", type=int, default=120)
    parser.add_argument("--shared-words", type=int, default=150)
    parser.add_argument("--min-len", type=int, default=30)
    parser.add_argument("--max-len", type=int, default=80)
    parser.add_argument("--category-share", type=float, default=0.7,
                        help="expected fraction of tokens from the category pool")
    args = parser.parse_args(argv)

    syn = synthetic_corpus(
        n_docs=args.n_docs,
        n_categories=args.categories,
        seed=args.seed,
        words_per_category=args.words_per_category,
        shared_words=args.shared_words,
        doc_len=(args.min_len, args.max_len),
        category_token_share=args.category_share,
    )
    with open(args.out, "w", encoding="utf-8") as f:
        for doc, cat in zip(syn.corpus.documents, syn.categories):
            row = {
                "id": doc.id,
                "text": doc.raw_text,
                "timestamp": doc.timestamp,
                "category": f"cat{cat}",
            }
            f.write(json.dumps(row) + "\n")
    print(f"wrote {args.n_docs} documents ({args.categories} categories) to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
