#!/usr/bin/env python3
"""Download a 20 Newsgroups subset and write it as JSONL.

Needs network access; environments without it can generate an equivalent
labelled corpus with scripts/make_corpus.py instead. Message bodies are
taken after the first blank line (headers dropped), timestamps come from
the Date header when it parses, and the newsgroup name is kept in a
`category` field for `dtm --group-by category`.
Run: python scripts/fetch_newsgroups.py --out newsgroups.jsonl
"""

import argparse
import email.utils
import json
import random
import tarfile
import urllib.request
from pathlib import Path

ARCHIVE_URL = "http://qwone.com/~jason/20Newsgroups/20news-bydate.tar.gz"
DEFAULT_CATEGORIES = (
    "comp.graphics",
    "rec.autos",
    "rec.sport.hockey",
    "sci.med",
    "talk.politics.mideast",
)


def _download(cache_dir: Path) -> Path:
    cache_dir.mkdir(parents=True, exist_ok=True)
    archive = cache_dir / "20news-bydate.tar.gz"
    if not archive.exists():
        print(f"downloading {ARCHIVE_URL} ...")
        urllib.request.urlretrieve(ARCHIVE_URL, archive)
    return archive


def _parse_message(raw: bytes):
    text = raw.decode("latin-1")
    head, _, body = text.partition("\n\n")
    timestamp = None
    for line in head.splitlines():
        if line.lower().startswith("date:"):
            parsed = email.utils.parsedate_to_datetime(line[5:].strip())
            if parsed is not None:
                timestamp = int(parsed.timestamp())
            break
    return body.strip(), timestamp


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output JSONL path")
    parser.add_argument("--categories", default=",".join(DEFAULT_CATEGORIES),
                        help="comma-separated newsgroup names")
    parser.add_argument("--per-category", type=int, default=400)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--cache-dir", default=str(Path.home() / ".cache" / "topicforge"))
    args = parser.parse_args(argv)

    categories = [c.strip() for c in args.categories.split(",") if c.strip()]
    archive = _download(Path(args.cache_dir))
    rng = random.Random(args.seed)

    by_category: dict[str, list[tuple[str, bytes]]] = {c: [] for c in categories}
    with tarfile.open(archive, "r:gz") as tar:
        for member in tar.getmembers():
            if not member.isfile():
                continue
            parts = member.name.split("/")
            # 20news-bydate-train/<newsgroup>/<message id>
            if len(parts) != 3 or parts[1] not in by_category:
                continue
            handle = tar.extractfile(member)
            if handle is None:
                continue
            by_category[parts[1]].append((f"{parts[1]}/{parts[2]}", handle.read()))

    n_written = 0
    with open(args.out, "w", encoding="utf-8") as f:
        for category in categories:
            messages = sorted(by_category[category])
            if not messages:
                raise SystemExit(f"no messages found for category {category!r}")
            rng.shuffle(messages)
            for doc_id, raw in messages[: args.per_category]:
                body, timestamp = _parse_message(raw)
                if not body:
                    continue
                row = {"id": doc_id, "text": body, "category": category}
                if timestamp is not None:
                    row["timestamp"] = timestamp
                f.write(json.dumps(row) + "\n")
                n_written += 1
    print(f"wrote {n_written} documents across {len(categories)} categories to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
