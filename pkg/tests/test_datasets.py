import numpy as np
import pytest

from topicforge.corpus import PreprocessOptions, default_stopwords, preprocess
from topicforge.datasets import synthetic_corpus
from topicforge.errors import ValidationError


def test_synthetic_deterministic():
    a = synthetic_corpus(n_docs=50, seed=4)
    b = synthetic_corpus(n_docs=50, seed=4)
    assert [d.raw_text for d in a.corpus.documents] == [
        d.raw_text for d in b.corpus.documents
    ]
    assert a.categories == b.categories
    c = synthetic_corpus(n_docs=50, seed=5)
    assert [d.raw_text for d in a.corpus.documents] != [
        d.raw_text for d in c.corpus.documents
    ]


def test_synthetic_shape_and_ids():
    syn = synthetic_corpus(n_docs=40, n_categories=4, seed=0)
    assert syn.corpus.n_docs == 40
    assert syn.corpus.ids()[0] == "doc-00000"
    assert syn.corpus.ids()[-1] == "doc-00039"
    assert len(syn.categories) == 40
    assert set(syn.categories) == set(range(4))
    assert len(syn.category_words) == 4


def test_synthetic_documents_have_timestamps():
    syn = synthetic_corpus(n_docs=30, seed=1)
    stamps = [d.timestamp for d in syn.corpus.documents]
    assert all(isinstance(t, int) for t in stamps)
    assert min(stamps) >= 1451606400  # 2016-01-01
    assert max(stamps) <= 1577836800  # 2020-01-01


def test_synthetic_vocabulary_avoids_stopwords():
    syn = synthetic_corpus(n_docs=20, seed=2)
    stopwords = default_stopwords()
    for words in syn.category_words:
        for w in words:
            assert w not in stopwords


def test_synthetic_category_words_dominate():
    syn = synthetic_corpus(n_docs=200, seed=3, category_token_share=0.7)
    prepared = preprocess(syn.corpus, PreprocessOptions(min_doc_tokens=0))
    cat_sets = [set(w) for w in syn.category_words]
    shares = []
    for doc, cat in zip(prepared.documents, syn.categories):
        own = sum(1 for t in doc.tokens if t in cat_sets[cat])
        shares.append(own / len(doc.tokens))
    assert 0.6 < float(np.mean(shares)) < 0.8


def test_synthetic_doc_lengths_within_bounds():
    syn = synthetic_corpus(n_docs=60, seed=6, doc_len=(10, 20))
    for doc in syn.corpus.documents:
        n_tokens = len(doc.raw_text.split())
        assert 10 <= n_tokens <= 20


def test_synthetic_validation():
    with pytest.raises(ValidationError):
        synthetic_corpus(n_docs=0)
    with pytest.raises(ValidationError):
        synthetic_corpus(n_docs=10, n_categories=0)
    with pytest.raises(ValidationError):
        synthetic_corpus(n_docs=10, doc_len=(20, 10))
