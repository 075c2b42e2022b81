"""Topic quality metrics and the sweep protocol.

Coherence is NPMI over boolean sliding-window co-occurrence in a reference
corpus; diversity is the fraction of unique words across topic lists. The
benchmark fits the full pipeline per (topic count, run) cell, reduces to
the target count, and records both metrics plus the fit wall time.
"""

from __future__ import annotations

import dataclasses
import io
import time
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .corpus import Corpus, bin_timestamps
from .ctfidf import reduce_topics
from .dynamic import timestep_top_words, topics_over_time
from .errors import TopicforgeError, ValidationError
from .pipeline import FitResult, PipelineConfig, fit_pipeline

_EPS = 1e-12


def _merge_positions(positions: list[int], window: int, n_windows: int) -> list[tuple[int, int]]:
    """Inclusive window-index intervals covered by the given token positions."""
    intervals: list[tuple[int, int]] = []
    for p in positions:
        lo = max(0, p - window + 1)
        hi = min(p, n_windows - 1)
        if intervals and lo <= intervals[-1][1] + 1:
            intervals[-1] = (intervals[-1][0], max(intervals[-1][1], hi))
        else:
            intervals.append((lo, hi))
    return intervals


def _intersection_length(a: list[tuple[int, int]], b: list[tuple[int, int]]) -> int:
    total = 0
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo <= hi:
            total += hi - lo + 1
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return total


class _WindowIndex:
    """Sliding-window occurrence counts for a fixed word set.

    A document of L tokens contributes max(1, L - window + 1) windows; a
    word at position p occupies a contiguous interval of window indices, so
    per-word occurrence sets are stored as merged intervals per document.
    """

    def __init__(self, corpus: Corpus, words: frozenset[str], window: int):
        if window < 1:
            raise ValidationError("window must be >= 1")
        self.window = window
        self.total_windows = 0
        self.doc_intervals: dict[str, dict[int, list[tuple[int, int]]]] = {w: {} for w in words}
        self.counts: dict[str, int] = {w: 0 for w in words}
        for doc_idx, doc in enumerate(corpus.documents):
            length = len(doc.tokens)
            if length == 0:
                continue
            n_windows = max(1, length - window + 1)
            self.total_windows += n_windows
            positions: dict[str, list[int]] = {}
            for p, tok in enumerate(doc.tokens):
                if tok in self.doc_intervals:
                    positions.setdefault(tok, []).append(p)
            for word, pos in positions.items():
                intervals = _merge_positions(pos, window, n_windows)
                self.doc_intervals[word][doc_idx] = intervals
                self.counts[word] += sum(hi - lo + 1 for lo, hi in intervals)

    def cooccurrences(self, a: str, b: str) -> int:
        da, db = self.doc_intervals[a], self.doc_intervals[b]
        if len(db) < len(da):
            da, db = db, da
        return sum(
            _intersection_length(intervals, db[doc]) for doc, intervals in da.items() if doc in db
        )


def npmi_coherence(
    topics: Sequence[Sequence[str]],
    reference: Corpus,
    top_n: int = 10,
    window: int = 10,
) -> float:
    """Mean NPMI over unordered word pairs per topic, then over topics.

    NPMI(a, b) = ln(P(ab) / (P(a)P(b)) + eps) / (-ln(P(ab) + eps)) with
    eps = 1e-12, probabilities from boolean sliding windows of ``window``
    tokens (whole-document windows for shorter documents). Words absent
    from the reference corpus floor their pairs at -1 with a warning.
    Topics with fewer than two words contribute no pairs and are skipped.
    """
    if not topics:
        raise ValidationError("no topics to score")
    truncated = [list(t)[:top_n] for t in topics]
    vocabulary = frozenset(w for t in truncated for w in t)
    index = _WindowIndex(reference, vocabulary, window)
    if index.total_windows == 0:
        raise ValidationError("reference corpus has no tokens")

    oov = sorted(w for w in vocabulary if index.counts[w] == 0)
    if oov:
        warnings.warn(
            f"{len(oov)} topic word(s) absent from the reference corpus "
            f"(first: {oov[0]!r}); their pairs score -1",
            stacklevel=2,
        )
    oov_set = set(oov)

    total = float(index.total_windows)
    topic_scores: list[float] = []
    for topic in truncated:
        pair_scores: list[float] = []
        for a, b in combinations(topic, 2):
            if a in oov_set or b in oov_set:
                pair_scores.append(-1.0)
                continue
            p_a = index.counts[a] / total
            p_b = index.counts[b] / total
            p_ab = index.cooccurrences(a, b) / total
            pmi = np.log(p_ab / (p_a * p_b) + _EPS)
            denom = -np.log(p_ab + _EPS)
            pair_scores.append(float(pmi / denom))
        if pair_scores:
            topic_scores.append(float(np.mean(pair_scores)))
    if not topic_scores:
        raise ValidationError("no topic provided at least one word pair")
    return float(np.mean(topic_scores))


def topic_diversity(topics: Sequence[Sequence[str]], top_n: int = 25) -> float:
    """Unique words across all topics' top lists over total list length."""
    if not topics:
        raise ValidationError("no topics to score")
    truncated = [list(t)[:top_n] for t in topics]
    total = sum(len(t) for t in truncated)
    if total == 0:
        raise ValidationError("all topic word lists are empty")
    unique = len({w for t in truncated for w in t})
    return unique / total


@dataclass(frozen=True)
class EvalCell:
    config: str
    topic_count: int
    run: int
    tc: float
    td: float
    wall_seconds: float
    failed: bool = False
    note: str = ""


@dataclass(frozen=True)
class EvalReport:
    """Benchmark cells plus aggregate means.

    Failed cells are excluded from every mean. Reports from identical
    seeds and inputs agree on everything except wall_seconds, which is
    honest measured time.
    """

    cells: tuple[EvalCell, ...]

    def _ok(self) -> list[EvalCell]:
        return [c for c in self.cells if not c.failed]

    @property
    def tc_mean(self) -> float:
        ok = self._ok()
        if not ok:
            return float("nan")
        return float(np.mean([c.tc for c in ok]))

    @property
    def td_mean(self) -> float:
        ok = self._ok()
        if not ok:
            return float("nan")
        return float(np.mean([c.td for c in ok]))

    @property
    def wall_mean(self) -> float:
        ok = self._ok()
        if not ok:
            return float("nan")
        return float(np.mean([c.wall_seconds for c in ok]))

    def per_topic_count(self) -> dict[int, tuple[float, float]]:
        """Mean (tc, td) per topic count over non-failed cells."""
        out: dict[int, tuple[float, float]] = {}
        for count in sorted({c.topic_count for c in self.cells}):
            ok = [c for c in self._ok() if c.topic_count == count]
            if ok:
                out[count] = (
                    float(np.mean([c.tc for c in ok])),
                    float(np.mean([c.td for c in ok])),
                )
            else:
                out[count] = (float("nan"), float("nan"))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("config,topic_count,run,tc,td,wall_seconds\n")
        for c in self.cells:
            tc = "nan" if c.failed else repr(c.tc)
            td = "nan" if c.failed else repr(c.td)
            buf.write(f"{c.config},{c.topic_count},{c.run},{tc},{td},{c.wall_seconds!r}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_csv())

    def table(self) -> str:
        lines = [
            f"{'config':<20} {'topics':>6} {'run':>3} {'tc':>9} {'td':>7} {'wall(s)':>8}  ",
        ]
        for c in self.cells:
            mark = f"FAILED: {c.note}" if c.failed else ""
            tc = "  -" if c.failed else f"{c.tc:9.4f}"
            td = "  -" if c.failed else f"{c.td:7.4f}"
            lines.append(
                f"{c.config:<20} {c.topic_count:>6} {c.run:>3} {tc:>9} {td:>7} "
                f"{c.wall_seconds:8.2f}  {mark}"
            )
        lines.append(
            f"{'mean':<20} {'':>6} {'':>3} {self.tc_mean:9.4f} {self.td_mean:7.4f} "
            f"{self.wall_mean:8.2f}"
        )
        return "\n".join(lines)


def _word_lists(words: dict[int, list[tuple[str, float]]]) -> list[list[str]]:
    return [[w for w, _ in ranked] for _, ranked in sorted(words.items())]


def _fit_timed(corpus: Corpus, config: PipelineConfig) -> tuple[FitResult, float]:
    start = time.perf_counter()
    result = fit_pipeline(corpus, config)
    return result, time.perf_counter() - start


def run_benchmark(
    corpus: Corpus,
    config: PipelineConfig,
    topic_counts: Sequence[int] = (10, 20, 30, 40, 50),
    runs: int = 3,
    seeds: Sequence[int] | None = None,
    window: int = 10,
    label: str = "default",
    dynamic_bins: int | None = None,
) -> EvalReport:
    """The sweep protocol: one full fit per (topic count, run) cell.

    Each cell fits the pipeline with that run's seed, reduces the model to
    the cell's topic count, and scores coherence (top 10 words) and
    diversity (top 25). A model that comes out of the fit with fewer
    topics than the target cannot be reduced up; the cell is recorded as
    failed and excluded from means.

    With ``dynamic_bins``, the protocol switches to the dynamic variant:
    one fit per run at the largest topic count, then per-timestep
    coherence and diversity cells (each run's fit wall time is repeated on
    its timestep cells).
    """
    if runs < 1:
        raise ValidationError("runs must be >= 1")
    if not topic_counts:
        raise ValidationError("topic_counts must not be empty")
    seeds = list(range(runs)) if seeds is None else list(seeds)
    if len(seeds) != runs:
        raise ValidationError(f"need exactly {runs} seeds, got {len(seeds)}")

    cells: list[EvalCell] = []
    if dynamic_bins is not None:
        target = max(topic_counts)
        for run, seed in enumerate(seeds):
            cfg = dataclasses.replace(config, seed=seed)
            try:
                result, wall = _fit_timed(corpus, cfg)
                model = result.model
                if model.n_topics < target:
                    raise TopicforgeError(
                        f"fit produced {model.n_topics} topics, below target {target}"
                    )
                model = reduce_topics(model, target)
                binning = bin_timestamps(result.prepared, dynamic_bins)
                reps = topics_over_time(model, result.prepared, binning)
            except TopicforgeError as e:
                cells.append(
                    EvalCell(
                        config=f"{label}-dynamic",
                        topic_count=target,
                        run=run,
                        tc=float("nan"),
                        td=float("nan"),
                        wall_seconds=0.0,
                        failed=True,
                        note=str(e),
                    )
                )
                continue
            for rep in reps:
                words = timestep_top_words(rep, model.vocabulary, n=25)
                lists = [w for w in _word_lists(words) if w]
                step_config = f"{label}-dynamic-t{rep.timestep}"
                if not lists:
                    cells.append(
                        EvalCell(step_config, target, run, float("nan"), float("nan"),
                                 wall, failed=True, note="no topic words in this bin")
                    )
                    continue
                tc = npmi_coherence([t[:10] for t in lists], result.prepared, top_n=10, window=window)
                td = topic_diversity(lists, top_n=25)
                cells.append(EvalCell(step_config, target, run, tc, td, wall))
        return EvalReport(cells=tuple(cells))

    for run, seed in enumerate(seeds):
        cfg = dataclasses.replace(config, seed=seed)
        for count in topic_counts:
            try:
                result, wall = _fit_timed(corpus, cfg)
                model = result.model
                if model.n_topics < count:
                    raise TopicforgeError(
                        f"fit produced {model.n_topics} topics, below target {count}"
                    )
                model = reduce_topics(model, count)
                words = model.top_words(25)
                lists = _word_lists(words)
                tc = npmi_coherence([t[:10] for t in lists], result.prepared, top_n=10, window=window)
                td = topic_diversity(lists, top_n=25)
                cells.append(EvalCell(label, count, run, tc, td, wall))
            except TopicforgeError as e:
                cells.append(
                    EvalCell(
                        config=label,
                        topic_count=count,
                        run=run,
                        tc=float("nan"),
                        td=float("nan"),
                        wall_seconds=0.0,
                        failed=True,
                        note=str(e),
                    )
                )
    return EvalReport(cells=tuple(cells))
