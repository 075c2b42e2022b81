"""Command-line interface.

Every pipeline stage is a subcommand; one global --seed and a flat
key=value config file (flags win over the file) make each run fully
resolved and reproducible. Exit codes: 0 success, 2 input validation,
3 pipeline failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .corpus import (
    bin_timestamps,
    group_by_field,
    load_jsonl,
    preprocess,
)
from .ctfidf import reduce_topics, topics_payload
from .dynamic import topics_over_time
from .embeddings import fallback_embed, write_embeddings
from .errors import PipelineError, ValidationError
from .evaluation import EvalCell, EvalReport, npmi_coherence, run_benchmark, topic_diversity
from .persistence import archive_preprocess_options, load_model, save_model
from .pipeline import (
    PipelineConfig,
    fit_pipeline,
    parse_config_file,
    topic_words_for_output,
    write_dtm_json,
    write_run_manifest,
    write_topics_json,
)

_CONFIG_FLAGS = (
    "seed",
    "min_doc_tokens",
    "min_df",
    "stopwords_path",
    "embeddings_path",
    "fallback",
    "embed_dim",
    "reducer",
    "n_neighbors",
    "min_dist",
    "out_dim",
    "epochs",
    "clusterer",
    "min_cluster_size",
    "min_samples",
    "n_clusters",
    "nr_topics",
    "top_n",
    "mmr_lambda",
)


def _int_or_none(value: str):
    return None if value.lower() in ("none", "null") else int(value)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("pipeline configuration")
    g.add_argument("--config", help="key=value config file; flags override it")
    g.add_argument("--seed", type=int, default=None, help="global seed for every stage")
    g.add_argument("--min-doc-tokens", type=int, default=None)
    g.add_argument("--min-df", type=int, default=None)
    g.add_argument("--stopwords", dest="stopwords_path", default=None,
                   help="stopword file, one term per line")
    g.add_argument("--embeddings", dest="embeddings_path", default=None,
                   help="exported embedding file")
    g.add_argument("--fallback", action="store_true", default=None,
                   help="use the built-in deterministic embedder")
    g.add_argument("--embed-dim", type=int, default=None)
    g.add_argument("--reducer", choices=("umap", "pca"), default=None)
    g.add_argument("--n-neighbors", type=int, default=None)
    g.add_argument("--min-dist", type=float, default=None)
    g.add_argument("--out-dim", type=int, default=None)
    g.add_argument("--epochs", type=int, default=None)
    g.add_argument("--clusterer", choices=("hdbscan", "kmeans"), default=None)
    g.add_argument("--min-cluster-size", type=int, default=None)
    g.add_argument("--min-samples", type=_int_or_none, default=None)
    g.add_argument("--n-clusters", type=int, default=None)
    g.add_argument("--nr-topics", type=_int_or_none, default=None,
                   help="reduce to this many topics after fitting (or 'none')")
    g.add_argument("--top-n", type=int, default=None)
    g.add_argument("--mmr-lambda", type=float, default=None,
                   help="rerank top words with MMR at this lambda")


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    overrides: dict = {}
    if getattr(args, "config", None):
        overrides.update(parse_config_file(args.config))
    for name in _CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return PipelineConfig(**overrides)


def _emit(args: argparse.Namespace, text: str) -> None:
    if not getattr(args, "quiet", False):
        print(text)


def _emit_config(args: argparse.Namespace, config: PipelineConfig) -> None:
    _emit(args, "resolved config: " + json.dumps(config.resolved(), sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicforge",
        description="Cluster-then-represent topic modeling over document embeddings.",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="run the full pipeline and write artifacts")
    p_fit.add_argument("--corpus", required=True, help="JSONL corpus")
    p_fit.add_argument("--out-dir", default="run", help="artifact directory")
    p_fit.add_argument("--dtm", action="store_true", help="also write dtm.json")
    p_fit.add_argument("--bins", type=int, default=10, help="time bins for --dtm")
    p_fit.add_argument("--evolve", action="store_true", help="smooth dynamic representations")
    _add_config_flags(p_fit)

    p_topics = sub.add_parser("topics", help="print topics from a model archive")
    p_topics.add_argument("--archive", required=True)
    p_topics.add_argument("--corpus", required=True)
    p_topics.add_argument("--top-n", type=int, default=10)
    p_topics.add_argument("--mmr-lambda", type=float, default=None)
    p_topics.add_argument("--out", help="write JSON here instead of stdout")

    p_reduce = sub.add_parser("reduce", help="merge topics down to a target count")
    p_reduce.add_argument("--archive", required=True)
    p_reduce.add_argument("--corpus", required=True)
    p_reduce.add_argument("--nr-topics", type=int, required=True)
    p_reduce.add_argument("--out-dir", required=True, help="directory for the reduced archive")
    p_reduce.add_argument("--top-n", type=int, default=10)

    p_dtm = sub.add_parser("dtm", help="per-timestep topic representations")
    p_dtm.add_argument("--archive", required=True)
    p_dtm.add_argument("--corpus", required=True)
    p_dtm.add_argument("--bins", type=int, default=10)
    p_dtm.add_argument("--evolve", action="store_true", help="smooth across adjacent bins")
    p_dtm.add_argument("--group-by", help="group by this JSONL field instead of time bins")
    p_dtm.add_argument("--top-n", type=int, default=10)
    p_dtm.add_argument("--out", required=True, help="output JSON path")

    p_eval = sub.add_parser("eval", help="score a fitted model")
    p_eval.add_argument("--archive", required=True)
    p_eval.add_argument("--corpus", required=True)
    p_eval.add_argument("--window", type=int, default=10)
    p_eval.add_argument("--report", help="write a one-row CSV here")

    p_bench = sub.add_parser("bench", help="topic-count sweep with timing")
    p_bench.add_argument("--corpus", required=True)
    p_bench.add_argument("--topic-counts", default="10,20,30,40,50",
                         help="comma-separated targets")
    p_bench.add_argument("--runs", type=int, default=3)
    p_bench.add_argument("--seeds", default=None, help="comma-separated, one per run")
    p_bench.add_argument("--window", type=int, default=10)
    p_bench.add_argument("--label", default="default")
    p_bench.add_argument("--dynamic-bins", type=int, default=None,
                         help="evaluate per-timestep at the largest topic count")
    p_bench.add_argument("--report", help="write the CSV report here")
    _add_config_flags(p_bench)

    p_model = sub.add_parser("model", help="save or validate model archives")
    model_sub = p_model.add_subparsers(dest="model_command", required=True)
    p_save = model_sub.add_parser("save", help="fit and write only the archive")
    p_save.add_argument("--corpus", required=True)
    p_save.add_argument("--archive", required=True, help="archive directory to write")
    _add_config_flags(p_save)
    p_load = model_sub.add_parser("load", help="validate an archive against a corpus")
    p_load.add_argument("--corpus", required=True)
    p_load.add_argument("--archive", required=True)
    p_load.add_argument("--force", action="store_true",
                        help="skip the corpus fingerprint check")

    p_embed = sub.add_parser("embed-fallback", help="write fallback embeddings to a file")
    p_embed.add_argument("--corpus", required=True)
    p_embed.add_argument("--out", required=True)
    p_embed.add_argument("--dim", type=int, default=64)
    p_embed.add_argument("--seed", type=int, default=0)
    p_embed.add_argument("--min-doc-tokens", type=int, default=5)
    p_embed.add_argument("--min-df", type=int, default=1)

    return parser


def _prepared_for_archive(archive: str, corpus_path: str):
    corpus = load_jsonl(corpus_path)
    opts = archive_preprocess_options(archive)
    return corpus, preprocess(corpus, opts)


def _cmd_fit(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    _emit_config(args, config)
    corpus = load_jsonl(args.corpus)
    result = fit_pipeline(corpus, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    write_topics_json(result.model, config, out / "topics.json")
    save_model(result.model, out / "model", opts=config.preprocess_options())
    write_run_manifest(config, result.model, out / "run_manifest.json")
    if args.dtm:
        binning = bin_timestamps(result.prepared, args.bins)
        reps = topics_over_time(result.model, result.prepared, binning)
        write_dtm_json(reps, binning, result.model, out / "dtm.json",
                       top_n=config.top_n, smoothed=args.evolve)
    sizes = result.model.topic_sizes()
    _emit(
        args,
        f"fit: {result.model.n_topics} topics over {result.model.n_docs} documents "
        f"({sizes.get(-1, 0)} outliers); artifacts in {out}",
    )
    return 0


def _cmd_topics(args: argparse.Namespace) -> int:
    corpus = load_jsonl(args.corpus)
    model = load_model(args.archive, corpus)
    config = PipelineConfig(top_n=args.top_n, mmr_lambda=args.mmr_lambda, fallback=True)
    words = topic_words_for_output(model, config)
    payload = topics_payload(model, top_n=args.top_n, words_override=words)
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _emit(args, f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_reduce(args: argparse.Namespace) -> int:
    corpus = load_jsonl(args.corpus)
    model = load_model(args.archive, corpus)
    reduced = reduce_topics(model, args.nr_topics)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = archive_preprocess_options(args.archive)
    save_model(reduced, out / "model", opts=opts)
    config = PipelineConfig(top_n=args.top_n)
    write_topics_json(reduced, config, out / "topics.json")
    _emit(args, f"reduced to {reduced.n_topics} topics; artifacts in {out}")
    return 0


def _cmd_dtm(args: argparse.Namespace) -> int:
    corpus, prepared = _prepared_for_archive(args.archive, args.corpus)
    model = load_model(args.archive, corpus)
    if args.group_by:
        values = _field_values(args.corpus, args.group_by, prepared.ids())
        binning, labels = group_by_field(values)
        _emit(args, f"grouping by {args.group_by}: {len(labels)} categories")
    else:
        binning = bin_timestamps(prepared, args.bins)
    reps = topics_over_time(model, prepared, binning)
    write_dtm_json(reps, binning, model, args.out, top_n=args.top_n, smoothed=args.evolve)
    _emit(args, f"wrote {args.out} ({binning.num_bins} timesteps)")
    return 0


def _field_values(corpus_path: str, field: str, ids: list[str]) -> list[str]:
    by_id: dict[str, str] = {}
    with open(corpus_path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            if field in obj:
                by_id[str(obj["id"])] = str(obj[field])
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise ValidationError(
            f"field {field!r} missing for {len(missing)} document(s) (first: {missing[0]!r})"
        )
    return [by_id[i] for i in ids]


def _cmd_eval(args: argparse.Namespace) -> int:
    corpus, prepared = _prepared_for_archive(args.archive, args.corpus)
    model = load_model(args.archive, corpus)
    start = time.perf_counter()
    words = model.top_words(25)
    lists = [[w for w, _ in ranked] for _, ranked in sorted(words.items())]
    tc = npmi_coherence([t[:10] for t in lists], prepared, top_n=10, window=args.window)
    td = topic_diversity(lists, top_n=25)
    wall = time.perf_counter() - start
    _emit(args, f"tc={tc:.5f} td={td:.5f} topics={model.n_topics} (scored in {wall:.2f}s)")
    if args.report:
        report = EvalReport(
            cells=(EvalCell("eval", model.n_topics, 0, tc, td, wall),)
        )
        report.write_csv(args.report)
        _emit(args, f"wrote {args.report}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    _emit_config(args, config)
    corpus = load_jsonl(args.corpus)
    topic_counts = [int(x) for x in args.topic_counts.split(",") if x.strip()]
    seeds = [int(x) for x in args.seeds.split(",")] if args.seeds else None
    report = run_benchmark(
        corpus,
        config,
        topic_counts=topic_counts,
        runs=args.runs,
        seeds=seeds,
        window=args.window,
        label=args.label,
        dynamic_bins=args.dynamic_bins,
    )
    _emit(args, report.table())
    if args.report:
        report.write_csv(args.report)
        _emit(args, f"wrote {args.report}")
    return 0


def _cmd_model(args: argparse.Namespace) -> int:
    if args.model_command == "save":
        config = _resolve_config(args)
        _emit_config(args, config)
        corpus = load_jsonl(args.corpus)
        result = fit_pipeline(corpus, config)
        save_model(result.model, args.archive, opts=config.preprocess_options())
        _emit(args, f"saved {result.model.n_topics}-topic model to {args.archive}")
        return 0
    corpus = load_jsonl(args.corpus)
    model = load_model(args.archive, corpus, force=args.force)
    sizes = model.topic_sizes()
    _emit(
        args,
        f"archive ok: {model.n_topics} topics, {model.n_docs} documents, "
        f"{sizes.get(-1, 0)} outliers, vocabulary {model.vocabulary.size}",
    )
    return 0


def _cmd_embed_fallback(args: argparse.Namespace) -> int:
    from .corpus import PreprocessOptions, build_vocabulary

    corpus = load_jsonl(args.corpus)
    opts = PreprocessOptions(min_doc_tokens=args.min_doc_tokens, min_df=args.min_df)
    prepared = preprocess(corpus, opts)
    vocab = build_vocabulary(prepared, min_df=args.min_df)
    matrix = fallback_embed(prepared, vocab, dim=args.dim, seed=args.seed)
    write_embeddings(matrix, args.out)
    _emit(args, f"wrote {matrix.rows} x {matrix.dim} embeddings to {args.out}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "topics": _cmd_topics,
    "reduce": _cmd_reduce,
    "dtm": _cmd_dtm,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "model": _cmd_model,
    "embed-fallback": _cmd_embed_fallback,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except PipelineError as e:
        print(f"pipeline error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
