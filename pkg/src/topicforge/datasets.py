"""Seeded synthetic corpora for experiments and tests.

Documents are drawn from per-category word pools plus a shared pool, so
category structure is recoverable from co-occurrence alone. Words are
pronounceable syllable strings, which keeps them clear of the stopword
list and makes topic lists readable in demos. Everything is deterministic
for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document, default_stopwords
from .errors import ValidationError

_SYLLABLES = (
    "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du",
    "ka", "ke", "ki", "ko", "ku", "la", "le", "li", "lo", "lu",
    "ma", "me", "mi", "mo", "mu", "na", "ne", "ni", "no", "nu",
    "pa", "pe", "pi", "po", "pu", "ra", "re", "ri", "ro", "ru",
    "sa", "se", "si", "so", "su", "ta", "te", "ti", "to", "tu",
    "va", "ve", "vi", "vo", "vu", "za", "ze", "zi", "zo", "zu",
)

_EPOCH_2016 = 1451606400
_EPOCH_2020 = 1577836800


@dataclass(frozen=True)
class SyntheticCorpus:
    corpus: Corpus
    categories: tuple[int, ...]  # planted category per document
    category_words: tuple[tuple[str, ...], ...]


def _word_pool(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    stop = default_stopwords()
    words: list[str] = []
    while len(words) < count:
        n_syl = int(rng.integers(2, 5))
        word = "".join(_SYLLABLES[int(rng.integers(len(_SYLLABLES)))] for _ in range(n_syl))
        if word in taken or word in stop:
            continue
        taken.add(word)
        words.append(word)
    return words


def _zipf_weights(count: int) -> np.ndarray:
    w = 1.0 / np.arange(1, count + 1) ** 0.8
    return w / w.sum()


def synthetic_corpus(
    n_docs: int = 2000,
    n_categories: int = 5,
    seed: int = 0,
    words_per_category: int = 120,
    shared_words: int = 150,
    doc_len: tuple[int, int] = (30, 80),
    category_token_share: float = 0.7,
) -> SyntheticCorpus:
    """Generate a labelled corpus with planted category vocabulary.

    Each document mixes Zipf-weighted draws from its category's pool with
    draws from the shared pool. Timestamps follow per-category time
    preferences across 2016-2019, so dynamic representations have visible
    movement. Raw text carries light casing and punctuation to exercise
    normalization.
    """
    if n_docs < 1 or n_categories < 1:
        raise ValidationError("need at least one document and one category")
    if doc_len[0] < 1 or doc_len[1] < doc_len[0]:
        raise ValidationError("doc_len must be a (min, max) pair with 1 <= min <= max")
    if not 0.0 <= category_token_share <= 1.0:
        raise ValidationError("category_token_share must be in [0, 1]")

    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    pools = [_word_pool(rng, words_per_category, taken) for _ in range(n_categories)]
    shared = _word_pool(rng, shared_words, taken)
    cat_weights = _zipf_weights(words_per_category)
    shared_weights = _zipf_weights(shared_words)

    span = _EPOCH_2020 - _EPOCH_2016
    centers = [_EPOCH_2016 + span * (c + 0.5) / n_categories for c in range(n_categories)]

    docs: list[Document] = []
    categories: list[int] = []
    for i in range(n_docs):
        cat = int(rng.integers(n_categories))
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        from_cat = rng.random(length) < category_token_share
        cat_draws = iter(rng.choice(words_per_category, size=length, p=cat_weights))
        shared_draws = iter(rng.choice(shared_words, size=length, p=shared_weights))
        tokens = [
            pools[cat][int(next(cat_draws))] if pick else shared[int(next(shared_draws))]
            for pick in from_cat
        ]
        ts = int(np.clip(rng.normal(centers[cat], span / 6), _EPOCH_2016, _EPOCH_2020 - 1))
        text = " ".join(tokens).capitalize() + "."
        docs.append(Document(id=f"doc-{i:05d}", raw_text=text, timestamp=ts))
        categories.append(cat)

    return SyntheticCorpus(
        corpus=Corpus(documents=tuple(docs)),
        categories=tuple(categories),
        category_words=tuple(tuple(p) for p in pools),
    )
