import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topicforge.corpus import PreprocessOptions, preprocess
from topicforge.errors import ValidationError
from topicforge.evaluation import (
    EvalCell,
    EvalReport,
    npmi_coherence,
    run_benchmark,
    topic_diversity,
)
from topicforge.pipeline import PipelineConfig

from conftest import make_corpus


def reference(texts):
    return preprocess(
        make_corpus(texts), PreprocessOptions(remove_stopwords=False, min_doc_tokens=0)
    )


def test_npmi_hand_value():
    # whole-document windows {a,b},{a,b},{a},{b}:
    # P(a)=P(b)=3/4, P(a,b)=1/2 -> ln(0.5/0.5625)/(-ln 0.5)
    ref = reference(["a b", "a b", "a", "b"])
    score = npmi_coherence([["a", "b"]], ref, window=10)
    assert score == pytest.approx(-0.16993, abs=1e-5)
    assert score == pytest.approx(np.log(0.5 / 0.5625) / (-np.log(0.5)), abs=1e-9)


def test_npmi_perfect_association():
    ref = reference(["a b", "a b", "c", "c"])
    assert npmi_coherence([["a", "b"]], ref, window=10) == pytest.approx(1.0, abs=1e-9)


def test_npmi_never_cooccurring():
    ref = reference(["a", "b", "a", "b"])
    assert npmi_coherence([["a", "b"]], ref, window=10) == pytest.approx(-1.0, abs=1e-9)


def test_npmi_self_pair_is_one():
    ref = reference(["a b", "c d"])
    assert npmi_coherence([["a", "a"]], ref, window=10) == pytest.approx(1.0, abs=1e-9)


def test_npmi_sliding_windows_change_the_answer():
    # with 2-token windows "a" and "b" never share a window; with a window
    # spanning the whole document they always do
    ref = reference(["a x x x b", "y y"])
    narrow = npmi_coherence([["a", "b"]], ref, window=2)
    wide = npmi_coherence([["a", "b"]], ref, window=5)
    assert narrow == pytest.approx(-1.0, abs=1e-9)
    assert wide == pytest.approx(1.0, abs=1e-9)


def test_npmi_window_count_for_long_documents():
    # L=5, window=2 -> 4 windows; "a" occupies windows 0..1 via position 1
    ref = reference(["x a x x x"])
    # P(a) = 2/4; the self pair is 1 regardless, so probe via independence
    # of two words placed to overlap in exactly one window
    ref2 = reference(["a b x x x", "x x x x x"])
    score = npmi_coherence([["a", "b"]], ref2, window=2)
    # windows doc1: [a b],[b x],[x x],[x x]; doc2: 4 windows
    # P(a)=1/8, P(b)=2/8, P(ab)=1/8
    expected = np.log((1 / 8) / ((1 / 8) * (2 / 8))) / (-np.log(1 / 8))
    assert score == pytest.approx(expected, abs=1e-9)


def test_npmi_monte_carlo_independence():
    rng = np.random.default_rng(0)
    texts = []
    for _ in range(10_000):
        tokens = []
        if rng.random() < 0.3:
            tokens.append("alpha")
        if rng.random() < 0.3:
            tokens.append("beta")
        tokens.append("filler")
        texts.append(" ".join(tokens))
    ref = reference(texts)
    score = npmi_coherence([["alpha", "beta"]], ref, window=10)
    assert abs(score) < 0.05


def test_npmi_oov_word_scores_floor_and_warns():
    ref = reference(["a b", "a b"])
    with pytest.warns(UserWarning, match="absent from the reference corpus"):
        score = npmi_coherence([["a", "zzz"]], ref, window=10)
    assert score == pytest.approx(-1.0, abs=1e-9)


def test_npmi_short_topics_skipped():
    ref = reference(["a b", "a b", "a", "b"])
    with_single = npmi_coherence([["a"], ["a", "b"]], ref, window=10)
    alone = npmi_coherence([["a", "b"]], ref, window=10)
    assert with_single == pytest.approx(alone, abs=1e-12)


def test_npmi_validation():
    ref = reference(["a b"])
    with pytest.raises(ValidationError):
        npmi_coherence([], ref)
    with pytest.raises(ValidationError):
        npmi_coherence([["a"]], ref)  # no scorable pairs anywhere
    with pytest.raises(ValidationError):
        npmi_coherence([["a", "b"]], ref, window=0)


def test_npmi_symmetry():
    ref = reference(["a b c", "b c", "a c", "a"])
    ab = npmi_coherence([["a", "b"]], ref, window=10)
    ba = npmi_coherence([["b", "a"]], ref, window=10)
    assert ab == pytest.approx(ba, abs=1e-12)


def test_npmi_top_n_truncates():
    ref = reference(["a b", "a b", "a c", "b c"])
    full = npmi_coherence([["a", "b", "c"]], ref, top_n=2, window=10)
    pair = npmi_coherence([["a", "b"]], ref, window=10)
    assert full == pytest.approx(pair, abs=1e-12)


def test_topic_diversity_disjoint():
    topics = [[f"w{i}" for i in range(25)], [f"v{i}" for i in range(25)]]
    assert topic_diversity(topics) == pytest.approx(1.0)


def test_topic_diversity_identical():
    words = [f"w{i}" for i in range(25)]
    assert topic_diversity([words, list(words)]) == pytest.approx(0.5)


def test_topic_diversity_seven_fifteenths():
    shared = ["a", "b", "c", "d"]
    topics = [shared + ["x1"], shared + ["x2"], shared + ["x3"]]
    td = topic_diversity(topics, top_n=5)
    assert td == pytest.approx(7 / 15, abs=1e-12)
    assert td == pytest.approx(0.46667, abs=1e-5)


def test_topic_diversity_denominator_uses_actual_lengths():
    topics = [["a", "b"], ["c"]]
    assert topic_diversity(topics, top_n=25) == pytest.approx(1.0)
    topics = [["a", "b"], ["a"]]
    assert topic_diversity(topics, top_n=25) == pytest.approx(2 / 3)


def test_topic_diversity_truncates_to_top_n():
    topics = [["a", "b", "zzz"], ["c", "d", "zzz"]]
    assert topic_diversity(topics, top_n=2) == pytest.approx(1.0)


def test_topic_diversity_validation():
    with pytest.raises(ValidationError):
        topic_diversity([])


@given(
    lists=st.lists(
        st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=6, unique=True),
        min_size=1,
        max_size=5,
    ),
    seed=st.integers(min_value=0, max_value=1000),
)
@settings(max_examples=50, deadline=None)
def test_topic_diversity_order_invariance(lists, seed):
    rng = np.random.default_rng(seed)
    base = topic_diversity(lists, top_n=25)
    shuffled_topics = [list(t) for t in lists]
    rng.shuffle(shuffled_topics)
    for t in shuffled_topics:
        rng.shuffle(t)
    assert topic_diversity(shuffled_topics, top_n=25) == pytest.approx(base, abs=1e-12)
    assert 0.0 <= base <= 1.0


def make_report():
    cells = [
        EvalCell("c", 10, 0, 0.2, 0.9, 1.0),
        EvalCell("c", 10, 1, 0.4, 0.7, 2.0),
        EvalCell("c", 20, 0, float("nan"), float("nan"), 0.0, failed=True, note="boom"),
    ]
    return EvalReport(cells=cells)


def test_report_means_exclude_failures():
    report = make_report()
    assert report.tc_mean == pytest.approx(0.3, abs=1e-12)
    assert report.td_mean == pytest.approx(0.8, abs=1e-12)
    assert report.wall_mean == pytest.approx(1.5, abs=1e-12)
    per = report.per_topic_count()
    assert per[10][0] == pytest.approx(0.3, abs=1e-12)
    assert np.isnan(per[20][0])  # all cells failed: visible as nan, not hidden


def test_report_csv_layout():
    csv = make_report().to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "config,topic_count,run,tc,td,wall_seconds"
    assert lines[1].startswith("c,10,0,0.2,0.9,")
    assert ",nan,nan," in lines[3]
    assert len(lines) == 4


def test_report_table_mentions_failures():
    table = make_report().table()
    assert "FAILED: boom" in table
    assert "10" in table


def bench_corpus():
    from topicforge.datasets import synthetic_corpus

    return synthetic_corpus(n_docs=150, seed=3).corpus


def test_run_benchmark_protocol_shape():
    config = PipelineConfig(
        fallback=True, clusterer="kmeans", n_clusters=6, reducer="pca", out_dim=4
    )
    report = run_benchmark(
        bench_corpus(), config, topic_counts=(2, 3), runs=2, label="toy"
    )
    assert len(report.cells) == 4
    # each run sweeps every topic count in order
    assert [(c.run, c.topic_count) for c in report.cells] == [
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
    ]
    assert all(c.config == "toy" for c in report.cells)
    assert all(not c.failed for c in report.cells)
    tc_values = [c.tc for c in report.cells]
    assert report.tc_mean == pytest.approx(np.mean(tc_values), abs=1e-12)
    assert all(c.wall_seconds > 0 for c in report.cells)


def test_run_benchmark_single_cell():
    config = PipelineConfig(
        fallback=True, clusterer="kmeans", n_clusters=4, reducer="pca", out_dim=4
    )
    report = run_benchmark(bench_corpus(), config, topic_counts=(3,), runs=1)
    assert len(report.cells) == 1
    assert report.tc_mean == pytest.approx(report.cells[0].tc)
    assert report.td_mean == pytest.approx(report.cells[0].td)


def test_run_benchmark_unreachable_topic_count_fails_cell():
    config = PipelineConfig(
        fallback=True, clusterer="kmeans", n_clusters=3, reducer="pca", out_dim=4
    )
    report = run_benchmark(bench_corpus(), config, topic_counts=(2, 8), runs=1)
    by_count = {c.topic_count: c for c in report.cells}
    assert not by_count[2].failed
    assert by_count[8].failed
    assert by_count[8].note
    # failed cell is excluded from every aggregate
    assert report.tc_mean == pytest.approx(by_count[2].tc)


def test_run_benchmark_deterministic_modulo_wall():
    config = PipelineConfig(
        fallback=True, clusterer="kmeans", n_clusters=5, reducer="pca", out_dim=4
    )
    corpus = bench_corpus()
    a = run_benchmark(corpus, config, topic_counts=(3,), runs=2, seeds=(1, 2))
    b = run_benchmark(corpus, config, topic_counts=(3,), runs=2, seeds=(1, 2))
    for ca, cb in zip(a.cells, b.cells):
        assert ca.tc == cb.tc
        assert ca.td == cb.td
        assert ca.run == cb.run


def test_run_benchmark_seed_count_mismatch():
    config = PipelineConfig(fallback=True)
    with pytest.raises(ValidationError):
        run_benchmark(bench_corpus(), config, topic_counts=(2,), runs=2, seeds=(1,))


def test_run_benchmark_dynamic_variant():
    config = PipelineConfig(
        fallback=True, clusterer="kmeans", n_clusters=4, reducer="pca", out_dim=4
    )
    report = run_benchmark(
        bench_corpus(),
        config,
        topic_counts=(3, 4),
        runs=1,
        label="dyn",
        dynamic_bins=3,
    )
    # one fit at the largest topic count, one cell per timestep
    assert len(report.cells) == 3
    assert [c.config for c in report.cells] == [
        "dyn-dynamic-t0",
        "dyn-dynamic-t1",
        "dyn-dynamic-t2",
    ]
    assert all(c.topic_count == 4 for c in report.cells)
    walls = {c.wall_seconds for c in report.cells}
    assert len(walls) == 1  # the fit wall time is repeated per timestep
