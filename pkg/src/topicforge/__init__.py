"""topicforge: cluster-then-represent topic modeling.

Documents are embedded (externally or via the built-in deterministic
fallback), reduced, density-clustered, and represented by class-based
TF-IDF over each cluster's concatenated text. Time-binned representations
and an evaluation harness round out the pipeline; everything is seeded and
byte-reproducible.
"""

__version__ = "0.1.0"

from .clustering import ClusterResult, hdbscan_fit, kmeans_fit, soft_memberships
from .corpus import (
    Corpus,
    Document,
    PreprocessOptions,
    TimeBinning,
    Vocabulary,
    bin_timestamps,
    build_vocabulary,
    load_jsonl,
    preprocess,
)
from .ctfidf import (
    ClassTermMatrix,
    TopicModel,
    TopicWordMatrix,
    aggregate_classes,
    classic_tfidf,
    ctfidf_transform,
    mmr_rerank,
    reduce_topics,
    top_n_words,
)
from .dynamic import TimestepRepresentation, smooth_representations, topics_over_time
from .embeddings import (
    EmbeddingMatrix,
    fallback_embed,
    read_embeddings,
    write_embeddings,
)
from .errors import ArchiveError, PipelineError, TopicforgeError, ValidationError
from .evaluation import EvalReport, npmi_coherence, run_benchmark, topic_diversity
from .persistence import load_model, save_model
from .pipeline import FitResult, PipelineConfig, fit_pipeline
from .reduction import ReducedEmbedding, ReducerParams, pca_reduce, umap_reduce

__all__ = [
    "ArchiveError",
    "ClassTermMatrix",
    "ClusterResult",
    "Corpus",
    "Document",
    "EmbeddingMatrix",
    "EvalReport",
    "FitResult",
    "PipelineConfig",
    "PipelineError",
    "PreprocessOptions",
    "ReducedEmbedding",
    "ReducerParams",
    "TimeBinning",
    "TimestepRepresentation",
    "TopicModel",
    "TopicWordMatrix",
    "TopicforgeError",
    "ValidationError",
    "Vocabulary",
    "aggregate_classes",
    "bin_timestamps",
    "build_vocabulary",
    "classic_tfidf",
    "ctfidf_transform",
    "fallback_embed",
    "fit_pipeline",
    "hdbscan_fit",
    "kmeans_fit",
    "load_jsonl",
    "load_model",
    "mmr_rerank",
    "npmi_coherence",
    "pca_reduce",
    "preprocess",
    "read_embeddings",
    "reduce_topics",
    "run_benchmark",
    "save_model",
    "smooth_representations",
    "soft_memberships",
    "top_n_words",
    "topic_diversity",
    "topics_over_time",
    "umap_reduce",
    "write_embeddings",
]
