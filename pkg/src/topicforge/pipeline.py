"""End-to-end fit orchestration and run artifacts.

fit_pipeline chains corpus preparation, embedding, reduction, clustering,
and topic representation under one config and one seed. Stage failures
surface with the stage name and a remediation hint. The JSON writers here
are shared by the CLI subcommands so that composed runs (fit, then dtm on
the archive) produce byte-identical files to a single combined run.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, TypeVar

import numpy as np

from . import __version__
from .clustering import ClusterResult, hdbscan_fit, kmeans_fit
from .corpus import (
    Corpus,
    PreprocessOptions,
    TimeBinning,
    Vocabulary,
    build_vocabulary,
    corpus_fingerprint,
    load_stopwords,
    preprocess,
)
from .ctfidf import (
    TopicModel,
    build_topic_model,
    mmr_rerank,
    reduce_topics,
    topics_payload,
)
from .dynamic import TimestepRepresentation, smooth_representations, timestep_top_words
from .embeddings import (
    EmbeddingMatrix,
    doc_term_counts,
    fallback_embed,
    fallback_term_vectors,
    read_embeddings,
)
from .errors import PipelineError, TopicforgeError, ValidationError
from .reduction import ReducedEmbedding, ReducerParams, pca_reduce, umap_reduce

_REDUCERS = ("umap", "pca")
_CLUSTERERS = ("hdbscan", "kmeans")

T = TypeVar("T")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the pipeline, resolvable from file and flags.

    One global seed feeds the fallback embedder, the reducer, and k-means.
    External embeddings are opt-in via ``embeddings_path``; the fallback
    embedder must be requested explicitly so a missing export never
    silently degrades.
    """

    seed: int = 0
    # corpus preparation
    lowercase: bool = True
    strip_punctuation: bool = True
    remove_stopwords: bool = True
    stopwords_path: str | None = None
    min_doc_tokens: int = 5
    min_df: int = 1
    # embeddings
    embeddings_path: str | None = None
    fallback: bool = False
    embed_dim: int = 64
    # reduction
    reducer: str = "umap"
    n_neighbors: int = 15
    min_dist: float = 0.1
    out_dim: int = 5
    epochs: int = 200
    # clustering
    clusterer: str = "hdbscan"
    min_cluster_size: int = 10
    min_samples: int | None = None
    n_clusters: int = 10
    # representation
    nr_topics: int | None = None
    top_n: int = 10
    mmr_lambda: float | None = None

    def __post_init__(self):
        if self.reducer not in _REDUCERS:
            raise ValidationError(f"reducer must be one of {_REDUCERS}, got {self.reducer!r}")
        if self.clusterer not in _CLUSTERERS:
            raise ValidationError(
                f"clusterer must be one of {_CLUSTERERS}, got {self.clusterer!r}"
            )
        if self.embed_dim < 2:
            raise ValidationError("embed_dim must be >= 2")
        if self.min_doc_tokens < 0:
            raise ValidationError("min_doc_tokens must be >= 0")
        if self.min_df < 1:
            raise ValidationError("min_df must be >= 1")
        if self.out_dim < 1:
            raise ValidationError("out_dim must be >= 1")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.n_neighbors < 2:
            raise ValidationError("n_neighbors must be >= 2")
        if self.min_cluster_size < 2:
            raise ValidationError("min_cluster_size must be >= 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise ValidationError("min_samples must be >= 1")
        if self.n_clusters < 1:
            raise ValidationError("n_clusters must be >= 1")
        if self.min_dist < 0:
            raise ValidationError("min_dist must be >= 0")
        if self.top_n < 1:
            raise ValidationError("top_n must be >= 1")
        if self.mmr_lambda is not None and not 0.0 <= self.mmr_lambda <= 1.0:
            raise ValidationError("mmr_lambda must be in [0, 1]")
        if self.nr_topics is not None and self.nr_topics < 1:
            raise ValidationError("nr_topics must be >= 1")

    def preprocess_options(self) -> PreprocessOptions:
        stopwords = (
            load_stopwords(self.stopwords_path)
            if self.stopwords_path
            else PreprocessOptions().stopwords
        )
        return PreprocessOptions(
            lowercase=self.lowercase,
            strip_punctuation=self.strip_punctuation,
            remove_stopwords=self.remove_stopwords,
            stopwords=stopwords,
            min_doc_tokens=self.min_doc_tokens,
            min_df=self.min_df,
        )

    def resolved(self) -> dict:
        return dataclasses.asdict(self)


_BOOL_STRINGS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_config_file(path: str | Path) -> dict:
    """Flat key=value config, '#' comments, values typed by the config field.

    Unknown keys and untypeable values are validation errors; 'none' clears
    optional fields.
    """
    field_types = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    overrides: dict = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw_line in enumerate(f, start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip().strip("\"'")
            if key not in field_types:
                raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
            overrides[key] = _coerce(field_types[key], key, raw, f"{path}:{lineno}")
    return overrides


def _coerce(type_str: str, key: str, raw: str, where: str):
    optional = "None" in type_str
    if optional and raw.lower() in ("none", "null", ""):
        return None
    base = type_str.replace(" | None", "").strip()
    try:
        if base == "int":
            return int(raw)
        if base == "float":
            return float(raw)
        if base == "bool":
            if raw.lower() not in _BOOL_STRINGS:
                raise ValueError(raw)
            return _BOOL_STRINGS[raw.lower()]
        return raw
    except ValueError as e:
        raise ValidationError(f"{where}: cannot parse {raw!r} as {base} for {key}") from e


@dataclass(frozen=True)
class FitResult:
    model: TopicModel
    prepared: Corpus
    vocabulary: Vocabulary
    embedding: EmbeddingMatrix = field(repr=False)
    reduced: ReducedEmbedding = field(repr=False)
    clusters: ClusterResult = field(repr=False)
    config: PipelineConfig


def _stage(name: str, hint: str, fn: Callable[[], T]) -> T:
    try:
        return fn()
    except TopicforgeError as e:
        raise type(e)(f"{name}: {e}") from e
    except Exception as e:
        raise PipelineError(f"{name}: {e}; {hint}") from e


def _load_external(config: PipelineConfig, prepared: Corpus) -> EmbeddingMatrix:
    matrix = read_embeddings(config.embeddings_path)
    by_id = {doc_id: i for i, doc_id in enumerate(matrix.doc_ids)}
    missing = [d for d in prepared.ids() if d not in by_id]
    if missing:
        raise ValidationError(
            f"embeddings file lacks {len(missing)} document(s) (first: {missing[0]!r}); "
            "export embeddings for the full corpus"
        )
    rows = np.array([by_id[d] for d in prepared.ids()], dtype=np.int64)
    return EmbeddingMatrix(
        data=matrix.data[rows], doc_ids=tuple(prepared.ids()), provenance="external"
    )


def fit_pipeline(
    corpus: Corpus,
    config: PipelineConfig | None = None,
    embeddings: EmbeddingMatrix | None = None,
) -> FitResult:
    """Run corpus -> embeddings -> reduction -> clustering -> representation.

    ``embeddings`` short-circuits the embedding stage with a prebuilt
    matrix (rows must cover the prepared corpus). Returns the fitted model
    along with every intermediate stage output.
    """
    config = config or PipelineConfig()

    def prepare() -> Corpus:
        prepared = preprocess(corpus, config.preprocess_options())
        if prepared.n_docs == 0:
            raise ValidationError(
                "no documents survived preprocessing; lower min_doc_tokens or check the input"
            )
        return prepared

    prepared = _stage("corpus", "check the input file", prepare)
    vocab = _stage(
        "vocabulary",
        "lower min_df",
        lambda: build_vocabulary(prepared, min_df=config.min_df),
    )
    if vocab.size == 0:
        raise ValidationError("vocabulary: empty vocabulary after filtering; lower min_df")

    def embed() -> EmbeddingMatrix:
        if embeddings is not None:
            if embeddings.rows == prepared.n_docs and embeddings.doc_ids == tuple(prepared.ids()):
                return embeddings
            by_id = {doc_id: i for i, doc_id in enumerate(embeddings.doc_ids)}
            missing = [d for d in prepared.ids() if d not in by_id]
            if missing:
                raise ValidationError(
                    f"embedding matrix lacks document {missing[0]!r} "
                    f"(+{len(missing) - 1} more)"
                )
            rows = np.array([by_id[d] for d in prepared.ids()], dtype=np.int64)
            return EmbeddingMatrix(
                data=embeddings.data[rows],
                doc_ids=tuple(prepared.ids()),
                provenance=embeddings.provenance,
            )
        if config.embeddings_path is not None:
            return _load_external(config, prepared)
        if config.fallback:
            return fallback_embed(prepared, vocab, dim=config.embed_dim, seed=config.seed)
        raise ValidationError(
            "no embedding source: pass embeddings_path to use an exported file, "
            "or set fallback=true for the built-in embedder"
        )

    embedding = _stage("embeddings", "regenerate the embeddings file", embed)

    def reduce_stage() -> ReducedEmbedding:
        if config.reducer == "pca":
            return pca_reduce(embedding, out_dim=config.out_dim)
        params = ReducerParams(
            n_neighbors=config.n_neighbors,
            min_dist=config.min_dist,
            out_dim=config.out_dim,
            epochs=config.epochs,
            seed=config.seed,
        )
        return umap_reduce(embedding, params)

    reduced = _stage("reduction", "try reducer=pca or fewer neighbors", reduce_stage)

    def cluster_stage() -> ClusterResult:
        if config.clusterer == "kmeans":
            return kmeans_fit(reduced.data, n_clusters=config.n_clusters, seed=config.seed)
        result = hdbscan_fit(
            reduced.data,
            min_cluster_size=config.min_cluster_size,
            min_samples=config.min_samples,
        )
        if result.n_clusters == 0:
            raise PipelineError(
                "no dense clusters found; lower min_cluster_size or use clusterer=kmeans"
            )
        return result

    clusters = _stage("clustering", "lower min_cluster_size", cluster_stage)

    def represent() -> TopicModel:
        timestamps = None
        if all(d.timestamp is not None for d in prepared.documents):
            timestamps = np.array([d.timestamp for d in prepared.documents], dtype=np.int64)
        doc_term = doc_term_counts(prepared, vocab)
        meta = {
            "package_version": __version__,
            "corpus_fingerprint": corpus_fingerprint(prepared),
            "config": config.resolved(),
            "embedding_provenance": embedding.provenance,
            "reducer_method": reduced.method,
            "cluster_method": clusters.method,
        }
        model = build_topic_model(
            doc_ids=prepared.ids(),
            vocab=vocab,
            doc_term=doc_term,
            doc_topics=clusters.labels,
            probabilities=clusters.probabilities,
            timestamps=timestamps,
            meta=meta,
        )
        if config.nr_topics is not None:
            model = reduce_topics(model, config.nr_topics)
        return model

    model = _stage("representation", "inspect cluster sizes", represent)
    return FitResult(
        model=model,
        prepared=prepared,
        vocabulary=vocab,
        embedding=embedding,
        reduced=reduced,
        clusters=clusters,
        config=config,
    )


def _dump_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")


def topic_words_for_output(model: TopicModel, config: PipelineConfig) -> dict:
    """Per-topic word lists for reports, MMR-reranked when configured."""
    words = model.top_words(config.top_n)
    if config.mmr_lambda is None:
        return words
    vectors = fallback_term_vectors(model.vocabulary, config.embed_dim, config.seed)
    return {
        t: mmr_rerank(ranked, vectors, lam=config.mmr_lambda, n=config.top_n)
        for t, ranked in words.items()
    }


def write_topics_json(model: TopicModel, config: PipelineConfig, path: str | Path) -> None:
    words = topic_words_for_output(model, config)
    _dump_json(Path(path), topics_payload(model, top_n=config.top_n, words_override=words))


def write_dtm_json(
    reps: list[TimestepRepresentation],
    binning: TimeBinning,
    model: TopicModel,
    path: str | Path,
    top_n: int = 10,
    smoothed: bool = False,
) -> None:
    """Per-timestep topic summaries with bin metadata."""
    if smoothed:
        reps = smooth_representations(reps)
    payload = []
    for rep in reps:
        words = timestep_top_words(rep, model.vocabulary, n=top_n)
        payload.append(
            {
                "timestep": rep.timestep,
                "start": binning.bin_edges[rep.timestep],
                "end": binning.bin_edges[rep.timestep + 1],
                "doc_count": rep.doc_count,
                "smoothed": rep.normalized,
                "topics": [
                    {
                        "topic_id": int(t),
                        "top_words": [{"term": w, "weight": v} for w, v in words.get(t, [])],
                    }
                    for t in rep.topic_ids
                ],
            }
        )
    _dump_json(Path(path), payload)


def write_run_manifest(config: PipelineConfig, model: TopicModel, path: str | Path) -> None:
    """Resolved-config record for a run; deliberately time-free."""
    payload = {
        "package_version": __version__,
        "config": config.resolved(),
        "n_docs": model.n_docs,
        "n_topics": model.n_topics,
        "outliers": int((model.doc_topics == -1).sum()),
        "vocab_size": model.vocabulary.size,
        "corpus_fingerprint": model.meta.get("corpus_fingerprint"),
    }
    _dump_json(Path(path), payload)
