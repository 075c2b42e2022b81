"""Corpus loading, normalization, vocabulary construction, and time binning.

Documents arrive as JSONL (one object per line with ``id``, ``text`` and an
optional integer ``timestamp``). Preprocessing is deliberately simple and
fully deterministic: optional lowercasing, punctuation stripping, and
stopword removal, followed by a Unicode-whitespace split. No lemmatization
or language detection is performed.
"""

from __future__ import annotations

import hashlib
import json
import string
import unicodedata
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError

_ASCII_PUNCT = set(string.punctuation)
_punct_cache: dict[str, bool] = {}


def _is_punct(ch: str) -> bool:
    cached = _punct_cache.get(ch)
    if cached is None:
        cached = ch in _ASCII_PUNCT or unicodedata.category(ch).startswith("P")
        _punct_cache[ch] = cached
    return cached


def default_stopwords() -> frozenset[str]:
    """The small English stopword list shipped with the package."""
    text = resources.files("topicforge").joinpath("data/english_stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Load a user-supplied stopword file, one term per line, UTF-8."""
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip() for line in f if line.strip())


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    tokens: tuple[str, ...] = ()
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    @property
    def n_docs(self) -> int:
        return len(self.documents)

    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def token_lists(self) -> list[tuple[str, ...]]:
        return [d.tokens for d in self.documents]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    term_to_index: dict[str, int]
    document_frequency: np.ndarray  # int64, aligned with terms

    @property
    def size(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index


@dataclass(frozen=True)
class PreprocessOptions:
    """Normalization switches applied before whitespace tokenization.

    Punctuation stripping replaces every ASCII punctuation character and
    every character in a Unicode P* category with a space. Documents left
    with fewer than ``min_doc_tokens`` tokens are dropped entirely.
    """

    lowercase: bool = True
    strip_punctuation: bool = True
    remove_stopwords: bool = True
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    min_doc_tokens: int = 5
    min_df: int = 1

    def __post_init__(self):
        if self.min_doc_tokens < 0:
            raise ValidationError("min_doc_tokens must be >= 0")
        if self.min_df < 1:
            raise ValidationError("min_df must be >= 1")


@dataclass(frozen=True)
class TimeBinning:
    num_bins: int
    bin_edges: tuple[float, ...]  # ascending, length num_bins + 1
    doc_to_bin: np.ndarray  # int64, aligned with corpus order

    def bin_counts(self) -> np.ndarray:
        return np.bincount(self.doc_to_bin, minlength=self.num_bins)


def load_jsonl(path: str | Path) -> Corpus:
    """Read a corpus from a JSONL file, preserving file order.

    Each line must be a JSON object with string ``id`` and ``text`` fields;
    ``timestamp`` (integer seconds) is optional. Whitespace-only lines are
    skipped. Tokens stay empty until :func:`preprocess` runs.
    """
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"{path}: line {lineno}: malformed JSON ({e.msg})") from e
            if not isinstance(obj, dict):
                raise ValidationError(f"{path}: line {lineno}: expected a JSON object")
            if "id" not in obj:
                raise ValidationError(f"{path}: line {lineno}: missing 'id' field")
            if "text" not in obj:
                raise ValidationError(f"{path}: line {lineno}: missing 'text' field")
            doc_id = str(obj["id"])
            if doc_id in seen:
                raise ValidationError(f"{path}: line {lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            ts = obj.get("timestamp")
            if ts is not None and not isinstance(ts, int):
                raise ValidationError(f"{path}: line {lineno}: timestamp must be an integer")
            docs.append(Document(id=doc_id, raw_text=str(obj["text"]), timestamp=ts))
    return Corpus(documents=tuple(docs))


def tokenize(text: str, opts: PreprocessOptions) -> tuple[str, ...]:
    """Normalize one text and split it on Unicode whitespace."""
    if opts.lowercase:
        text = text.lower()
    if opts.strip_punctuation:
        text = "".join(" " if _is_punct(ch) else ch for ch in text)
    tokens = text.split()
    if opts.remove_stopwords:
        tokens = [t for t in tokens if t not in opts.stopwords]
    return tuple(tokens)


def preprocess(corpus: Corpus, opts: PreprocessOptions) -> Corpus:
    """Tokenize every document and drop those shorter than min_doc_tokens.

    Deterministic for fixed options, and idempotent: tokens are always
    re-derived from raw_text, so a second pass reproduces the first.
    """
    kept = []
    for doc in corpus.documents:
        tokens = tokenize(doc.raw_text, opts)
        if len(tokens) >= opts.min_doc_tokens:
            kept.append(replace(doc, tokens=tokens))
    return Corpus(documents=tuple(kept))


def build_vocabulary(corpus: Corpus, min_df: int = 1) -> Vocabulary:
    """Collect terms with document frequency >= min_df, sorted lexicographically."""
    if min_df < 1:
        raise ValidationError("min_df must be >= 1")
    df: dict[str, int] = {}
    for doc in corpus.documents:
        for term in set(doc.tokens):
            df[term] = df.get(term, 0) + 1
    terms = tuple(sorted(t for t, c in df.items() if c >= min_df))
    return Vocabulary(
        terms=terms,
        term_to_index={t: i for i, t in enumerate(terms)},
        document_frequency=np.array([df[t] for t in terms], dtype=np.int64),
    )


def bin_timestamps(corpus: Corpus, num_bins: int) -> TimeBinning:
    """Partition [min_ts, max_ts] into equal-width bins and map every document.

    Bins are half-open [lo, hi) except the last, which is closed, so the
    maximum timestamp lands in bin num_bins - 1. When all timestamps are
    equal every document goes to bin 0 and the remaining bins stay empty.
    """
    if num_bins < 1:
        raise ValidationError("num_bins must be >= 1")
    missing = [d.id for d in corpus.documents if d.timestamp is None]
    if missing:
        raise ValidationError(f"documents without timestamps: {missing}")
    if corpus.n_docs == 0:
        raise ValidationError("cannot bin an empty corpus")

    ts = np.array([d.timestamp for d in corpus.documents], dtype=np.int64)
    lo, hi = int(ts.min()), int(ts.max())
    span = hi - lo
    if span == 0:
        bins = np.zeros(corpus.n_docs, dtype=np.int64)
    else:
        # integer arithmetic keeps edge assignment exact
        bins = np.minimum((ts - lo) * num_bins // span, num_bins - 1)
    edges = tuple(lo + i * span / num_bins for i in range(num_bins)) + (float(hi),)
    return TimeBinning(num_bins=num_bins, bin_edges=edges, doc_to_bin=bins)


def corpus_fingerprint(corpus: Corpus) -> str:
    """Digest of document ids and token streams, in corpus order.

    Persistence records this at fit time and refuses to load a model
    against a corpus that hashes differently.
    """
    h = hashlib.blake2b(digest_size=16)
    for doc in corpus.documents:
        h.update(doc.id.encode("utf-8"))
        h.update(b"\x1e")
        for tok in doc.tokens:
            h.update(tok.encode("utf-8"))
            h.update(b"\x1f")
        h.update(b"\x1d")
    return h.hexdigest()


def group_by_field(values: Sequence[str]) -> tuple[TimeBinning, list[str]]:
    """Build a categorical binning from arbitrary per-document labels.

    Sorted unique labels become bin indices, so per-category topic
    representations can reuse the timestep machinery unchanged. Returns the
    binning and the label list aligned with bin indices.
    """
    labels = sorted(set(values))
    index = {v: i for i, v in enumerate(labels)}
    bins = np.array([index[v] for v in values], dtype=np.int64)
    edges = tuple(float(i) for i in range(len(labels) + 1))
    return TimeBinning(num_bins=len(labels), bin_edges=edges, doc_to_bin=bins), labels
