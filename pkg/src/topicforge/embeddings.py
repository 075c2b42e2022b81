"""Document embedding interchange and the built-in fallback embedder.

Embeddings cross process and language boundaries through a small binary
format (magic ``TPFG``): a self-describing header, the document ids, and a
row-major float32 payload. External encoders write this file; the reader
validates it against the corpus before anything downstream runs.

The fallback embedder needs no external encoder: per-document TF-IDF
vectors are pushed through a seeded sparse random projection and
L2-normalized, which preserves cosine geometry well enough for clustering.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import sparse

from .corpus import Corpus, Vocabulary
from .errors import ValidationError

MAGIC = b"TPFG"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class EmbeddingMatrix:
    data: np.ndarray  # float32, shape (rows, dim)
    doc_ids: tuple[str, ...]
    provenance: Literal["external", "fallback"]

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValidationError("embedding data must be 2-dimensional")
        if self.data.shape[0] != len(self.doc_ids):
            raise ValidationError("doc_ids length must match row count")


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Serialize an embedding matrix to the TPFG interchange format."""
    data = np.ascontiguousarray(matrix.data, dtype="<f4")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQI", FORMAT_VERSION, matrix.rows, matrix.dim))
        for doc_id in matrix.doc_ids:
            raw = doc_id.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValidationError(f"document id too long to serialize: {doc_id[:40]}...")
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
        f.write(data.tobytes())


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise ValidationError(f"truncated embeddings file: expected {n} bytes for {what}")
    return buf


def read_embeddings(path: str | Path, corpus: Corpus | None = None) -> EmbeddingMatrix:
    """Read a TPFG file, validating it against the corpus when given.

    Raises distinct validation errors for a bad magic, a row count that
    does not match the corpus, ids out of order, and non-finite values.
    """
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise ValidationError(f"{path}: not an embeddings file (magic {magic!r} != {MAGIC!r})")
        version, rows, dim = struct.unpack("<IQI", _read_exact(f, 16, "header"))
        if version != FORMAT_VERSION:
            raise ValidationError(f"{path}: unsupported format version {version}")
        ids = []
        for i in range(rows):
            (id_len,) = struct.unpack("<H", _read_exact(f, 2, f"id record {i}"))
            ids.append(_read_exact(f, id_len, f"id record {i}").decode("utf-8"))
        payload = _read_exact(f, rows * dim * 4, "float payload")
        if f.read(1):
            raise ValidationError(f"{path}: trailing bytes after payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, dim).copy()
    if not np.isfinite(data).all():
        raise ValidationError(f"{path}: embeddings contain non-finite values")
    if corpus is not None:
        if rows != corpus.n_docs:
            raise ValidationError(
                f"{path}: row count {rows} does not match corpus size {corpus.n_docs}"
            )
        corpus_ids = corpus.ids()
        if ids != corpus_ids:
            for i, (a, b) in enumerate(zip(ids, corpus_ids)):
                if a != b:
                    raise ValidationError(
                        f"{path}: id mismatch at row {i}: file has {a!r}, corpus has {b!r}"
                    )
    return EmbeddingMatrix(data=data, doc_ids=tuple(ids), provenance="external")


def doc_term_counts(corpus: Corpus, vocab: Vocabulary) -> sparse.csr_matrix:
    """Sparse document-term count matrix in corpus order."""
    indptr = [0]
    indices: list[int] = []
    values: list[int] = []
    t2i = vocab.term_to_index
    for doc in corpus.documents:
        counts: dict[int, int] = {}
        for tok in doc.tokens:
            idx = t2i.get(tok)
            if idx is not None:
                counts[idx] = counts.get(idx, 0) + 1
        for idx in sorted(counts):
            indices.append(idx)
            values.append(counts[idx])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(values, dtype=np.int64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(corpus.n_docs, vocab.size),
    )


def _projection_matrix(vocab_size: int, dim: int, seed: int) -> np.ndarray:
    """Seeded sparse random projection, density 1/sqrt(V), entries +-scale."""
    s = np.sqrt(vocab_size)
    scale = np.sqrt(s / dim)
    rng = np.random.default_rng(seed)
    u = rng.random((vocab_size, dim))
    half_density = 0.5 / s
    return np.where(u < half_density, scale, np.where(u > 1.0 - half_density, -scale, 0.0))


def _hash_direction(tokens: tuple[str, ...], dim: int) -> np.ndarray:
    """Deterministic unit vector for documents with no in-vocabulary mass."""
    digest = hashlib.blake2b("\x1f".join(tokens).encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def fallback_embed(corpus: Corpus, vocab: Vocabulary, dim: int = 64, seed: int = 0) -> EmbeddingMatrix:
    """Deterministic TF-IDF + sparse random projection embeddings.

    Rows are L2-normalized float32; identical token sequences always map to
    identical rows. Documents whose TF-IDF vector is entirely zero fall back
    to raw term counts, and documents with no in-vocabulary tokens at all
    get a content-hashed unit direction so every row stays unit-norm.
    """
    if vocab.size == 0:
        raise ValidationError("cannot embed with an empty vocabulary")
    if dim < 2:
        raise ValidationError("embedding dim must be >= 2")

    counts = doc_term_counts(corpus, vocab)
    n = corpus.n_docs
    idf = np.log(n / vocab.document_frequency.astype(np.float64)) if n else np.zeros(vocab.size)
    tfidf = counts.multiply(idf).tocsr()
    proj = _projection_matrix(vocab.size, dim, seed)

    out = np.asarray(tfidf @ proj, dtype=np.float64)
    zero_tfidf = np.asarray(np.abs(tfidf).sum(axis=1)).ravel() == 0
    if zero_tfidf.any():
        out[zero_tfidf] = counts[zero_tfidf].astype(np.float64) @ proj
    norms = np.linalg.norm(out, axis=1)
    for i in np.flatnonzero(norms == 0):
        out[i] = _hash_direction(corpus.documents[i].tokens, dim)
        norms[i] = 1.0
    out /= norms[:, None]
    return EmbeddingMatrix(
        data=out.astype(np.float32), doc_ids=tuple(corpus.ids()), provenance="fallback"
    )


def fallback_term_vectors(vocab: Vocabulary, dim: int, seed: int) -> dict[str, np.ndarray]:
    """Unit vectors for vocabulary terms under the same seeded projection.

    A term's direction is its projection row, which equals the embedding of
    a one-term pseudo-document up to scale. Terms whose projection row is
    all-zero are omitted.
    """
    proj = _projection_matrix(vocab.size, dim, seed)
    norms = np.linalg.norm(proj, axis=1)
    return {
        term: proj[i] / norms[i]
        for i, term in enumerate(vocab.terms)
        if norms[i] > 0
    }
