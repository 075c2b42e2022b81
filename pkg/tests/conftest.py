"""Shared fixtures: small corpora and fitted models reused across modules."""

import json

import pytest

from topicforge.corpus import Corpus, Document, load_jsonl
from topicforge.datasets import synthetic_corpus
from topicforge.pipeline import PipelineConfig, fit_pipeline


def make_corpus(texts, timestamps=None, ids=None):
    docs = []
    for i, text in enumerate(texts):
        docs.append(
            Document(
                id=ids[i] if ids else f"d{i}",
                raw_text=text,
                timestamp=None if timestamps is None else timestamps[i],
            )
        )
    return Corpus(documents=tuple(docs))


def write_jsonl(path, corpus, extra=None):
    with open(path, "w", encoding="utf-8") as f:
        for i, d in enumerate(corpus.documents):
            row = {"id": d.id, "text": d.raw_text}
            if d.timestamp is not None:
                row["timestamp"] = d.timestamp
            if extra:
                row.update(extra[i])
            f.write(json.dumps(row) + "\n")
    return path


@pytest.fixture(scope="session")
def synthetic_300():
    return synthetic_corpus(n_docs=300, seed=7)


@pytest.fixture(scope="session")
def corpus_300(synthetic_300):
    return synthetic_300.corpus


@pytest.fixture(scope="session")
def corpus_300_jsonl(tmp_path_factory, synthetic_300):
    path = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    extra = [
        {"category": f"cat{c}"} for c in synthetic_300.categories
    ]
    write_jsonl(path, synthetic_300.corpus, extra=extra)
    return path


@pytest.fixture(scope="session")
def fitted_300(corpus_300):
    config = PipelineConfig(fallback=True)
    return fit_pipeline(corpus_300, config)


@pytest.fixture(scope="session")
def corpus_300_loaded(corpus_300_jsonl):
    return load_jsonl(corpus_300_jsonl)
