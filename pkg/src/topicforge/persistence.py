"""Model archives: save a fitted TopicModel, restore it without refitting.

An archive is a directory of little-endian binary arrays plus a JSON
manifest. Payloads are written first and the manifest last (fsynced), so a
directory with a readable manifest is a complete archive. Nothing
time-dependent is written; archiving the same model twice produces
byte-identical directories.

The document-term matrix is not stored: the load-time corpus is
re-preprocessed with the archived options and must hash to the archived
fingerprint, after which recounting reproduces the matrix exactly.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np
from scipy import sparse

from . import __version__
from .corpus import (
    Corpus,
    PreprocessOptions,
    Vocabulary,
    corpus_fingerprint,
    preprocess,
)
from .ctfidf import ClassTermMatrix, TopicModel, TopicWordMatrix, topics_payload
from .embeddings import doc_term_counts
from .errors import ArchiveError

ARRAY_MAGIC = b"TPFA"
ARCHIVE_VERSION = 1

_MANIFEST = "manifest.json"
_VOCAB = "vocabulary.json"
_TOP_WORDS = "top_words.json"
_ARRAYS = {
    "doc_topics": "doc_topics.bin",
    "probabilities": "probabilities.bin",
    "timestamps": "timestamps.bin",
    "class_counts_row": "class_counts_row.bin",
    "class_counts_col": "class_counts_col.bin",
    "class_counts_val": "class_counts_val.bin",
    "topic_words_row": "topic_words_row.bin",
    "topic_words_col": "topic_words_col.bin",
    "topic_words_val": "topic_words_val.bin",
}


def write_array(path: Path, arr: np.ndarray) -> None:
    """One-array binary file: magic, version, dtype tag, shape, raw bytes."""
    arr = np.ascontiguousarray(arr)
    dtype_tag = arr.dtype.str.encode("ascii")  # e.g. b"<i8"
    with open(path, "wb") as f:
        f.write(ARRAY_MAGIC)
        f.write(struct.pack("<I", ARCHIVE_VERSION))
        f.write(struct.pack("<H", len(dtype_tag)))
        f.write(dtype_tag)
        f.write(struct.pack("<I", arr.ndim))
        for dim in arr.shape:
            f.write(struct.pack("<Q", dim))
        f.write(arr.tobytes(order="C"))


def _read_exact(f, n: int, path: Path, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise ArchiveError(f"{path}: truncated while reading {what}")
    return buf


def read_array(path: Path) -> np.ndarray:
    with open(path, "rb") as f:
        if _read_exact(f, 4, path, "magic") != ARRAY_MAGIC:
            raise ArchiveError(f"{path}: not an archive array (bad magic)")
        (version,) = struct.unpack("<I", _read_exact(f, 4, path, "version"))
        if version != ARCHIVE_VERSION:
            raise ArchiveError(f"{path}: unsupported array version {version}")
        (tag_len,) = struct.unpack("<H", _read_exact(f, 2, path, "dtype tag length"))
        dtype = np.dtype(_read_exact(f, tag_len, path, "dtype tag").decode("ascii"))
        (ndim,) = struct.unpack("<I", _read_exact(f, 4, path, "rank"))
        shape = tuple(
            struct.unpack("<Q", _read_exact(f, 8, path, f"dim {i}"))[0] for i in range(ndim)
        )
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        payload = _read_exact(f, count * dtype.itemsize, path, "payload")
        if f.read(1):
            raise ArchiveError(f"{path}: trailing bytes after payload")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def _sparse_triplets(matrix: sparse.csr_matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    coo = matrix.tocoo()
    return (
        coo.row.astype(np.int64),
        coo.col.astype(np.int64),
        np.ascontiguousarray(coo.data),
    )


def _sparse_from_triplets(
    row: np.ndarray, col: np.ndarray, val: np.ndarray, shape: tuple[int, int]
) -> sparse.csr_matrix:
    return sparse.coo_matrix((val, (row, col)), shape=shape).tocsr()


def _preprocess_manifest(opts: PreprocessOptions) -> dict:
    return {
        "lowercase": opts.lowercase,
        "strip_punctuation": opts.strip_punctuation,
        "remove_stopwords": opts.remove_stopwords,
        "stopwords": sorted(opts.stopwords),
        "min_doc_tokens": opts.min_doc_tokens,
        "min_df": opts.min_df,
    }


def _preprocess_from_manifest(payload: dict) -> PreprocessOptions:
    return PreprocessOptions(
        lowercase=payload["lowercase"],
        strip_punctuation=payload["strip_punctuation"],
        remove_stopwords=payload["remove_stopwords"],
        stopwords=frozenset(payload["stopwords"]),
        min_doc_tokens=payload["min_doc_tokens"],
        min_df=payload["min_df"],
    )


def _dump_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")


def save_model(model: TopicModel, path: str | Path, opts: PreprocessOptions | None = None) -> None:
    """Write a model archive directory.

    ``opts`` are the preprocessing options the corpus was prepared with;
    they are archived so load_model can reproduce the token streams. The
    manifest is written last and fsynced, making it the completion marker.
    """
    if opts is None:
        opts = PreprocessOptions()
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)

    write_array(out / _ARRAYS["doc_topics"], model.doc_topics.astype(np.int64))
    write_array(out / _ARRAYS["probabilities"], model.probabilities.astype(np.float64))
    if model.timestamps is not None:
        write_array(out / _ARRAYS["timestamps"], model.timestamps.astype(np.int64))

    for prefix, matrix in (
        ("class_counts", model.class_counts.counts),
        ("topic_words", model.topic_words.weights),
    ):
        row, col, val = _sparse_triplets(matrix)
        write_array(out / _ARRAYS[f"{prefix}_row"], row)
        write_array(out / _ARRAYS[f"{prefix}_col"], col)
        write_array(out / _ARRAYS[f"{prefix}_val"], val)

    _dump_json(
        out / _VOCAB,
        {
            "terms": list(model.vocabulary.terms),
            "document_frequency": model.vocabulary.document_frequency.tolist(),
        },
    )
    _dump_json(out / _TOP_WORDS, topics_payload(model))

    manifest = {
        "archive_version": ARCHIVE_VERSION,
        "package_version": __version__,
        "corpus_fingerprint": model.meta.get("corpus_fingerprint"),
        "doc_ids": list(model.doc_ids),
        "has_timestamps": model.timestamps is not None,
        "topic_ids": list(model.class_counts.topic_ids),
        "vocab_size": model.vocabulary.size,
        "n_docs": model.n_docs,
        "preprocess": _preprocess_manifest(opts),
        "parameters": model.meta,
    }
    manifest_path = out / _MANIFEST
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
        f.write("\n")
        f.flush()
        os.fsync(f.fileno())


def _read_manifest(root: Path) -> dict:
    manifest_path = root / _MANIFEST
    if not manifest_path.exists():
        raise ArchiveError(f"{root}: no manifest; archive missing or incomplete")
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise ArchiveError(f"{manifest_path}: manifest is not valid JSON ({e})") from e
    if manifest.get("archive_version") != ARCHIVE_VERSION:
        raise ArchiveError(
            f"{root}: archive version {manifest.get('archive_version')} "
            f"is not supported (expected {ARCHIVE_VERSION})"
        )
    return manifest


def archive_preprocess_options(path: str | Path) -> PreprocessOptions:
    """The preprocessing options a model archive was fitted with."""
    return _preprocess_from_manifest(_read_manifest(Path(path))["preprocess"])


def load_model(path: str | Path, corpus: Corpus, force: bool = False) -> TopicModel:
    """Restore a model archive against its corpus.

    The corpus is re-preprocessed with the archived options and must
    fingerprint-match the archive (checked unless ``force``); the
    document-term matrix is then recounted, which reproduces the fitted one
    exactly. Raises ArchiveError for missing or damaged archives.
    """
    root = Path(path)
    manifest = _read_manifest(root)
    opts = _preprocess_from_manifest(manifest["preprocess"])
    prepared = preprocess(corpus, opts)
    fingerprint = corpus_fingerprint(prepared)
    recorded = manifest.get("corpus_fingerprint")
    if not force and recorded is not None and fingerprint != recorded:
        raise ArchiveError(
            f"{root}: corpus fingerprint {fingerprint} does not match the archived "
            f"{recorded}; pass force=True to load anyway"
        )
    # force bypasses the content fingerprint, never id alignment: the
    # per-document arrays are meaningless against a different document set
    if list(prepared.ids()) != manifest["doc_ids"]:
        raise ArchiveError(f"{root}: document ids do not match the archive")

    vocab_payload = json.loads((root / _VOCAB).read_text("utf-8"))
    terms = tuple(vocab_payload["terms"])
    vocab = Vocabulary(
        terms=terms,
        term_to_index={t: i for i, t in enumerate(terms)},
        document_frequency=np.asarray(vocab_payload["document_frequency"], dtype=np.int64),
    )

    doc_topics = read_array(root / _ARRAYS["doc_topics"])
    probabilities = read_array(root / _ARRAYS["probabilities"])
    timestamps = (
        read_array(root / _ARRAYS["timestamps"]) if manifest["has_timestamps"] else None
    )

    topic_ids = tuple(int(t) for t in manifest["topic_ids"])
    shape = (len(topic_ids), vocab.size)
    matrices = {}
    for prefix in ("class_counts", "topic_words"):
        row = read_array(root / _ARRAYS[f"{prefix}_row"])
        col = read_array(root / _ARRAYS[f"{prefix}_col"])
        val = read_array(root / _ARRAYS[f"{prefix}_val"])
        matrices[prefix] = _sparse_from_triplets(row, col, val, shape)

    n_docs = manifest["n_docs"]
    if doc_topics.shape[0] != n_docs or prepared.n_docs != n_docs:
        raise ArchiveError(f"{root}: document count mismatch with the archive")

    doc_term = doc_term_counts(prepared, vocab)
    return TopicModel(
        doc_ids=tuple(prepared.ids()),
        vocabulary=vocab,
        doc_term=doc_term,
        doc_topics=doc_topics,
        probabilities=probabilities,
        class_counts=ClassTermMatrix(counts=matrices["class_counts"], topic_ids=topic_ids),
        topic_words=TopicWordMatrix(weights=matrices["topic_words"], topic_ids=topic_ids),
        timestamps=timestamps,
        meta=dict(manifest.get("parameters") or {}),
    )
