"""Class-based TF-IDF topic representations.

Documents sharing a cluster label are concatenated into one class, and
terms are weighted by tf(t, c) * ln(1 + A / tf_t), where A is the average
word count per class and tf_t the term's total frequency across classes.
Outlier documents (label -1) are excluded from the classes, so they dilute
neither A nor tf_t.

The per-bin dynamic representations reuse the exact same idf vector and
sparse multiply, which keeps a single-bin run bit-identical to the global
model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse

from .corpus import Vocabulary
from .errors import ValidationError


@dataclass(frozen=True)
class ClassTermMatrix:
    """Per-class term counts, one row per topic in ``topic_ids`` order."""

    counts: sparse.csr_matrix  # K x V, int64
    topic_ids: tuple[int, ...]

    @property
    def n_classes(self) -> int:
        return len(self.topic_ids)


@dataclass(frozen=True)
class TopicWordMatrix:
    """Class-based TF-IDF weights, aligned with a ClassTermMatrix."""

    weights: sparse.csr_matrix  # K x V, float64
    topic_ids: tuple[int, ...]


def aggregate_classes(
    doc_term: sparse.csr_matrix,
    labels: np.ndarray,
    topic_ids: Sequence[int] | None = None,
    doc_mask: np.ndarray | None = None,
) -> ClassTermMatrix:
    """Sum document rows into class rows, skipping outliers (label -1).

    ``topic_ids`` pins the row order (topics absent from the documents keep
    an all-zero row); by default it is the sorted set of non-negative
    labels. ``doc_mask`` restricts aggregation to a document subset, which
    the dynamic model uses for time bins.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n_docs = doc_term.shape[0]
    if labels.shape[0] != n_docs:
        raise ValidationError("labels do not match the document-term matrix")
    if topic_ids is None:
        topic_ids = sorted(int(t) for t in np.unique(labels) if t >= 0)
    topic_ids = tuple(int(t) for t in topic_ids)
    if not topic_ids:
        raise ValidationError("no topics found: every document is labeled as outlier")
    row_of = {t: r for r, t in enumerate(topic_ids)}

    keep = labels >= 0
    if doc_mask is not None:
        keep = keep & np.asarray(doc_mask, dtype=bool)
    docs = np.flatnonzero(keep)
    docs = docs[np.isin(labels[docs], topic_ids)]
    rows = np.array([row_of[int(l)] for l in labels[docs]], dtype=np.int64)
    indicator = sparse.csr_matrix(
        (np.ones(docs.size, dtype=np.int64), (rows, docs)),
        shape=(len(topic_ids), n_docs),
    )
    counts = (indicator @ doc_term).tocsr()
    # sparse products leave column indices unsorted; canonicalize so the
    # internal arrays round-trip through archives bit for bit
    counts.sum_duplicates()
    counts.sort_indices()
    return ClassTermMatrix(counts=counts, topic_ids=topic_ids)


def average_class_size(matrix: ClassTermMatrix) -> float:
    """A in the weighting formula: mean word count over the classes."""
    if matrix.n_classes == 0:
        raise ValidationError("no classes to average over")
    return float(np.asarray(matrix.counts.sum(axis=1)).ravel().mean())


def idf_vector(matrix: ClassTermMatrix) -> np.ndarray:
    """ln(1 + A / tf_t) per term; terms absent from every class get 0."""
    tf_t = np.asarray(matrix.counts.sum(axis=0)).ravel().astype(np.float64)
    a = average_class_size(matrix)
    idf = np.zeros_like(tf_t)
    present = tf_t > 0
    idf[present] = np.log1p(a / tf_t[present])
    return idf


def ctfidf_transform(matrix: ClassTermMatrix) -> TopicWordMatrix:
    idf = idf_vector(matrix)
    weights = matrix.counts.multiply(idf.reshape(1, -1)).tocsr()
    return TopicWordMatrix(weights=weights, topic_ids=matrix.topic_ids)


def classic_tfidf(doc_term: sparse.csr_matrix) -> sparse.csr_matrix:
    """Per-document weights tf(t, d) * ln(N / df_t)."""
    n_docs = doc_term.shape[0]
    if n_docs == 0:
        raise ValidationError("empty document-term matrix")
    df = np.asarray((doc_term > 0).sum(axis=0)).ravel().astype(np.float64)
    idf = np.zeros_like(df)
    present = df > 0
    idf[present] = np.log(n_docs / df[present])
    return doc_term.multiply(idf.reshape(1, -1)).tocsr()


def top_n_words(
    matrix: TopicWordMatrix, vocab: Vocabulary, n: int = 10
) -> dict[int, list[tuple[str, float]]]:
    """Highest-weighted terms per topic, descending weight.

    Ties break lexicographically (the vocabulary is sorted, so lower index
    means earlier term). Zero-weight terms never appear, so lists can be
    shorter than n.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    out: dict[int, list[tuple[str, float]]] = {}
    weights = matrix.weights
    for row, topic in enumerate(matrix.topic_ids):
        start, stop = weights.indptr[row], weights.indptr[row + 1]
        cols = weights.indices[start:stop]
        vals = weights.data[start:stop]
        nonzero = vals > 0
        cols, vals = cols[nonzero], vals[nonzero]
        order = np.lexsort((cols, -vals))[:n]
        out[topic] = [(vocab.terms[c], float(v)) for c, v in zip(cols[order], vals[order])]
    return out


@dataclass(frozen=True)
class TopicModel:
    """A fitted topic model: assignments plus class-level representations.

    ``doc_topics`` follows corpus order; -1 marks outlier documents that
    belong to no topic. ``meta`` carries fit parameters and provenance for
    persistence and is excluded from equality.
    """

    doc_ids: tuple[str, ...]
    vocabulary: Vocabulary
    doc_term: sparse.csr_matrix = field(repr=False)
    doc_topics: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)
    class_counts: ClassTermMatrix = field(repr=False)
    topic_words: TopicWordMatrix = field(repr=False)
    timestamps: np.ndarray | None = field(default=None, repr=False)
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def n_topics(self) -> int:
        return len(self.class_counts.topic_ids)

    def topic_sizes(self) -> dict[int, int]:
        ids, counts = np.unique(self.doc_topics, return_counts=True)
        sizes = {int(t): int(c) for t, c in zip(ids, counts)}
        for t in self.class_counts.topic_ids:
            sizes.setdefault(t, 0)
        return sizes

    def top_words(self, n: int = 10) -> dict[int, list[tuple[str, float]]]:
        return top_n_words(self.topic_words, self.vocabulary, n)


def build_topic_model(
    doc_ids: Sequence[str],
    vocab: Vocabulary,
    doc_term: sparse.csr_matrix,
    doc_topics: np.ndarray,
    probabilities: np.ndarray,
    timestamps: np.ndarray | None = None,
    meta: dict | None = None,
) -> TopicModel:
    """Assemble a TopicModel, deriving class counts and weights."""
    class_counts = aggregate_classes(doc_term, doc_topics)
    return TopicModel(
        doc_ids=tuple(doc_ids),
        vocabulary=vocab,
        doc_term=doc_term,
        doc_topics=np.asarray(doc_topics, dtype=np.int64),
        probabilities=np.asarray(probabilities, dtype=np.float64),
        class_counts=class_counts,
        topic_words=ctfidf_transform(class_counts),
        timestamps=None if timestamps is None else np.asarray(timestamps, dtype=np.int64),
        meta=dict(meta or {}),
    )


def topics_payload(
    model: TopicModel,
    top_n: int = 10,
    words_override: Mapping[int, list[tuple[str, float]]] | None = None,
) -> list[dict]:
    """JSON-ready topic summary: id, size, top words; outlier bucket last.

    ``words_override`` substitutes precomputed word lists (e.g. after MMR
    reranking) while keeping ids and sizes from the model.
    """
    sizes = model.topic_sizes()
    words = model.top_words(top_n) if words_override is None else words_override
    payload = [
        {
            "topic_id": int(t),
            "size": int(sizes.get(t, 0)),
            "top_words": [{"term": w, "weight": v} for w, v in words.get(t, [])],
        }
        for t in model.class_counts.topic_ids
    ]
    payload.append({"topic_id": -1, "size": int((model.doc_topics == -1).sum()), "top_words": []})
    return payload


def reduce_topics(model: TopicModel, n_topics: int) -> TopicModel:
    """Merge topics until at most ``n_topics`` remain.

    Each step folds the smallest topic (fewest documents, ties to the
    lowest id) into its most similar surviving topic by cosine similarity
    of weight rows (ties again to the lowest id), then relabels documents,
    compacts ids to 0..K-1, and recomputes counts and weights from scratch.
    Outliers are untouched and per-document probabilities are kept as
    fitted. A model already at or below the target is returned unchanged.
    """
    if n_topics < 1:
        raise ValidationError("n_topics must be >= 1")
    if model.n_topics <= n_topics:
        return model

    doc_topics = model.doc_topics.copy()
    class_counts = model.class_counts
    weights = model.topic_words.weights
    while len(class_counts.topic_ids) > n_topics:
        ids = np.asarray(class_counts.topic_ids)
        sizes = np.array([(doc_topics == t).sum() for t in ids])
        source_row = int(np.argmin(sizes))

        dense = np.asarray(weights.todense())
        norms = np.linalg.norm(dense, axis=1)
        safe = np.where(norms == 0, 1.0, norms)
        sims = (dense @ dense[source_row]) / (safe * safe[source_row])
        sims[norms == 0] = 0.0
        sims[source_row] = -np.inf
        target_row = int(np.argmax(sims))

        doc_topics[doc_topics == ids[source_row]] = ids[target_row]
        survivors = [t for r, t in enumerate(ids) if r != source_row]
        remap = {old: new for new, old in enumerate(survivors)}
        for old, new in remap.items():
            if old != new:
                doc_topics[doc_topics == old] = new
        class_counts = aggregate_classes(model.doc_term, doc_topics, topic_ids=range(len(survivors)))
        weights = ctfidf_transform(class_counts).weights

    meta = dict(model.meta)
    meta["reduced_to"] = int(len(class_counts.topic_ids))
    return replace(
        model,
        doc_topics=doc_topics,
        class_counts=class_counts,
        topic_words=TopicWordMatrix(weights=weights, topic_ids=class_counts.topic_ids),
        meta=meta,
    )


def mmr_rerank(
    top_words: Sequence[tuple[str, float]],
    word_vectors: Mapping[str, np.ndarray],
    lam: float = 0.5,
    n: int = 10,
) -> list[tuple[str, float]]:
    """Maximal-marginal-relevance reranking of a topic's word list.

    Greedily picks the candidate maximizing
    lam * relevance - (1 - lam) * max cosine similarity to already-selected
    words, with relevance the weight scaled by the list maximum. lam=1
    keeps pure relevance order, lam=0 maximizes diversity. Ties go to the
    earliest candidate. Candidates without a vector disable reranking: the
    input order is kept (truncated to n) and a warning is emitted.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValidationError("lambda must be in [0, 1]")
    if n < 1:
        raise ValidationError("n must be >= 1")
    candidates = list(top_words)
    if len(candidates) <= 1:
        return candidates[:n]
    missing = [w for w, _ in candidates if w not in word_vectors]
    if missing:
        warnings.warn(
            f"no vectors for {len(missing)} candidate word(s) ({missing[0]!r}, ...); "
            "skipping MMR rerank",
            stacklevel=2,
        )
        return candidates[:n]

    vecs = np.stack([np.asarray(word_vectors[w], dtype=np.float64) for w, _ in candidates])
    norms = np.linalg.norm(vecs, axis=1)
    vecs = vecs / np.where(norms == 0, 1.0, norms)[:, None]
    sim = vecs @ vecs.T

    weights = np.array([w for _, w in candidates], dtype=np.float64)
    top = weights.max()
    relevance = weights / top if top > 0 else np.ones_like(weights)

    chosen: list[int] = []
    max_sim = np.zeros(len(candidates))
    available = np.ones(len(candidates), dtype=bool)
    while len(chosen) < min(n, len(candidates)):
        score = lam * relevance - (1.0 - lam) * max_sim
        score[~available] = -np.inf
        pick = int(np.argmax(score))
        chosen.append(pick)
        available[pick] = False
        max_sim = np.maximum(max_sim, sim[:, pick])
    return [candidates[i] for i in chosen]
