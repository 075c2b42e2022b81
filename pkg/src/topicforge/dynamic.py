"""Dynamic topic representations from a frozen global model.

Per time bin, term frequencies are re-counted inside each global topic and
multiplied by the global idf vector; nothing is re-embedded or
re-clustered. An optional smoothing pass averages each topic's
L1-normalized representation with its predecessor so adjacent timesteps
evolve gradually.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .corpus import Corpus, TimeBinning, Vocabulary
from .ctfidf import TopicModel, TopicWordMatrix, aggregate_classes, idf_vector, top_n_words
from .errors import ValidationError


@dataclass(frozen=True)
class TimestepRepresentation:
    """One time bin's topic-term weights, aligned with the global model."""

    timestep: int
    matrix: sparse.csr_matrix = field(repr=False)  # K x V, float64
    topic_ids: tuple[int, ...]
    normalized: bool
    doc_count: int


def topics_over_time(
    model: TopicModel, corpus: Corpus, binning: TimeBinning
) -> list[TimestepRepresentation]:
    """Per-bin topic representations using the global idf.

    Bin term counts within each topic are multiplied by the fitted model's
    idf vector, so a single bin spanning everything reproduces the global
    weights exactly. Topics with no documents in a bin get an all-zero row.
    """
    if corpus.n_docs != model.n_docs or tuple(corpus.ids()) != model.doc_ids:
        raise ValidationError("corpus does not match the fitted model")
    if binning.doc_to_bin.shape[0] != model.n_docs:
        raise ValidationError("binning does not cover the corpus")

    idf = idf_vector(model.class_counts)
    topic_ids = model.class_counts.topic_ids
    reps: list[TimestepRepresentation] = []
    for i in range(binning.num_bins):
        mask = binning.doc_to_bin == i
        ctm = aggregate_classes(
            model.doc_term, model.doc_topics, topic_ids=topic_ids, doc_mask=mask
        )
        weights = ctm.counts.multiply(idf.reshape(1, -1)).tocsr()
        reps.append(
            TimestepRepresentation(
                timestep=i,
                matrix=weights,
                topic_ids=topic_ids,
                normalized=False,
                doc_count=int(mask.sum()),
            )
        )
    return reps


def _l1_normalize_rows(matrix: sparse.csr_matrix) -> sparse.csr_matrix:
    sums = np.asarray(np.abs(matrix).sum(axis=1)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    return sparse.diags(scale) @ matrix


def smooth_representations(
    reps: list[TimestepRepresentation],
) -> list[TimestepRepresentation]:
    """Average each timestep's normalized rows with the previous timestep.

    Every topic row is first L1-normalized within its timestep. The first
    timestep keeps its normalized rows; later timesteps average with the
    predecessor row unless one side is all zero: a zero current row stays
    zero (the topic is absent), and a zero predecessor leaves the current
    row as is rather than damping a reappearing topic. The pass is not
    recursive: averages always use the normalized input, not prior output.
    """
    steps = [r.timestep for r in reps]
    if steps != sorted(steps):
        raise ValidationError("representations must be ordered by timestep")
    if not reps:
        return []

    normalized = [_l1_normalize_rows(r.matrix).tocsr() for r in reps]
    smoothed: list[sparse.csr_matrix] = [normalized[0]]
    for i in range(1, len(normalized)):
        cur, prev = normalized[i], normalized[i - 1]
        cur_nz = np.asarray(np.abs(cur).sum(axis=1)).ravel() > 0
        prev_nz = np.asarray(np.abs(prev).sum(axis=1)).ravel() > 0
        both = cur_nz & prev_nz
        cur_scale = np.where(both, 0.5, np.where(cur_nz, 1.0, 0.0))
        prev_scale = np.where(both, 0.5, 0.0)
        mixed = sparse.diags(cur_scale) @ cur + sparse.diags(prev_scale) @ prev
        smoothed.append(mixed.tocsr())

    return [
        TimestepRepresentation(
            timestep=r.timestep,
            matrix=m,
            topic_ids=r.topic_ids,
            normalized=True,
            doc_count=r.doc_count,
        )
        for r, m in zip(reps, smoothed)
    ]


def timestep_top_words(
    rep: TimestepRepresentation, vocab: Vocabulary, n: int = 10
) -> dict[int, list[tuple[str, float]]]:
    """Top terms per topic at one timestep, same extraction as globally."""
    return top_n_words(TopicWordMatrix(weights=rep.matrix, topic_ids=rep.topic_ids), vocab, n)
