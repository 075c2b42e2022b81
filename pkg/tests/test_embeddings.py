import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topicforge.corpus import PreprocessOptions, build_vocabulary, preprocess
from topicforge.embeddings import (
    EmbeddingMatrix,
    FORMAT_VERSION,
    MAGIC,
    doc_term_counts,
    fallback_embed,
    fallback_term_vectors,
    read_embeddings,
    write_embeddings,
)
from topicforge.errors import ValidationError

from conftest import make_corpus


def prepared(texts):
    corpus = preprocess(
        make_corpus(texts), PreprocessOptions(remove_stopwords=False, min_doc_tokens=0)
    )
    return corpus, build_vocabulary(corpus)


def toy_matrix(rows=3, dim=4, ids=None):
    rng = np.random.default_rng(0)
    data = rng.normal(size=(rows, dim)).astype(np.float32)
    ids = ids or tuple(f"d{i}" for i in range(rows))
    return EmbeddingMatrix(data=data, doc_ids=ids, provenance="external")


def test_embedding_matrix_validation():
    with pytest.raises(ValidationError):
        EmbeddingMatrix(data=np.zeros(3, dtype=np.float32), doc_ids=("a",), provenance="external")
    with pytest.raises(ValidationError):
        EmbeddingMatrix(data=np.zeros((2, 3), dtype=np.float32), doc_ids=("a",), provenance="external")


def test_write_read_roundtrip(tmp_path):
    m = toy_matrix()
    path = tmp_path / "e.bin"
    write_embeddings(m, path)
    back = read_embeddings(path)
    assert np.array_equal(back.data, m.data)
    assert back.doc_ids == m.doc_ids
    assert back.provenance == "external"
    assert back.data.dtype == np.float32


def test_read_validates_against_corpus(tmp_path):
    m = toy_matrix(ids=("a", "b", "c"))
    path = tmp_path / "e.bin"
    write_embeddings(m, path)
    corpus = make_corpus(["x", "y", "z"], ids=["a", "b", "c"])
    assert read_embeddings(path, corpus).rows == 3

    wrong_order = make_corpus(["x", "y", "z"], ids=["a", "c", "b"])
    with pytest.raises(ValidationError, match="id mismatch at row 1"):
        read_embeddings(path, wrong_order)

    short = make_corpus(["x", "y"], ids=["a", "b"])
    with pytest.raises(ValidationError, match="row count"):
        read_embeddings(path, short)


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "e.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ValidationError, match="magic"):
        read_embeddings(path)


def test_read_rejects_bad_version(tmp_path):
    m = toy_matrix()
    path = tmp_path / "e.bin"
    write_embeddings(m, path)
    raw = bytearray(path.read_bytes())
    raw[4] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(ValidationError, match="version"):
        read_embeddings(path)


def test_read_rejects_truncation(tmp_path):
    m = toy_matrix()
    path = tmp_path / "e.bin"
    write_embeddings(m, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-5])
    with pytest.raises(ValidationError, match="truncated"):
        read_embeddings(path)


def test_read_rejects_trailing_bytes(tmp_path):
    m = toy_matrix()
    path = tmp_path / "e.bin"
    write_embeddings(m, path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(ValidationError, match="trailing"):
        read_embeddings(path)


def test_read_rejects_non_finite(tmp_path):
    data = np.full((2, 2), np.nan, dtype=np.float32)
    m = EmbeddingMatrix(data=data, doc_ids=("a", "b"), provenance="external")
    path = tmp_path / "e.bin"
    write_embeddings(m, path)
    with pytest.raises(ValidationError, match="non-finite"):
        read_embeddings(path)


def test_format_layout_is_stable(tmp_path):
    m = toy_matrix(rows=1, dim=2, ids=("xy",))
    path = tmp_path / "e.bin"
    write_embeddings(m, path)
    raw = path.read_bytes()
    assert raw[:4] == MAGIC == b"TPFG"
    assert int.from_bytes(raw[4:8], "little") == FORMAT_VERSION == 1
    assert int.from_bytes(raw[8:16], "little") == 1  # rows, u64
    assert int.from_bytes(raw[16:20], "little") == 2  # dim, u32
    assert int.from_bytes(raw[20:22], "little") == 2  # id length, u16
    assert raw[22:24] == b"xy"
    assert len(raw) == 24 + 2 * 4


def test_doc_term_counts():
    corpus, vocab = prepared(["a b a", "b c"])
    counts = doc_term_counts(corpus, vocab)
    assert counts.shape == (2, 3)
    assert counts.dtype == np.int64
    assert counts.toarray().tolist() == [[2, 1, 0], [0, 1, 1]]
    assert counts.has_sorted_indices


def test_fallback_embed_deterministic_and_normalized():
    corpus, vocab = prepared(["alpha beta gamma", "delta alpha", "beta beta gamma"])
    a = fallback_embed(corpus, vocab, dim=16, seed=3)
    b = fallback_embed(corpus, vocab, dim=16, seed=3)
    assert np.array_equal(a.data, b.data)
    assert a.provenance == "fallback"
    assert a.data.dtype == np.float32
    norms = np.linalg.norm(a.data.astype(np.float64), axis=1)
    assert np.allclose(norms, 1.0, atol=1e-5)

    c = fallback_embed(corpus, vocab, dim=16, seed=4)
    assert not np.array_equal(a.data, c.data)


def test_fallback_embed_validation():
    corpus, vocab = prepared(["a b c"])
    with pytest.raises(ValidationError):
        fallback_embed(corpus, vocab, dim=1)
    empty_corpus, empty_vocab = prepared([])
    with pytest.raises(ValidationError):
        fallback_embed(empty_corpus, empty_vocab, dim=8)


def test_fallback_embed_zero_tfidf_rows_still_unit():
    # a term present in every document has idf ln(1) = 0, so this document's
    # tf-idf row is all zero and the embedder falls back to raw counts
    corpus, vocab = prepared(["common", "common rare", "common other"])
    m = fallback_embed(corpus, vocab, dim=8, seed=0)
    norms = np.linalg.norm(m.data.astype(np.float64), axis=1)
    assert np.all(np.isfinite(m.data))
    assert np.allclose(norms, 1.0, atol=1e-5)


def test_fallback_term_vectors_units():
    _, vocab = prepared(["alpha beta", "gamma beta"])
    vectors = fallback_term_vectors(vocab, dim=8, seed=0)
    assert set(vectors) <= set(vocab.terms)
    for vec in vectors.values():
        assert vec.shape == (8,)
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-9


@given(
    rows=st.integers(min_value=0, max_value=6),
    dim=st.integers(min_value=1, max_value=5),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
@settings(max_examples=40, deadline=None)
def test_tpfg_roundtrip_property(tmp_path_factory, rows, dim, seed):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(rows, dim)).astype(np.float32)
    ids = tuple(f"doc-{i}-é" for i in range(rows))
    m = EmbeddingMatrix(data=data, doc_ids=ids, provenance="external")
    path = tmp_path_factory.mktemp("tpfg") / "e.bin"
    write_embeddings(m, path)
    back = read_embeddings(path)
    assert back.doc_ids == ids
    assert np.array_equal(back.data, data)
