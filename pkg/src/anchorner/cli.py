"""Command-line entry points for the corpus pipeline.

One config file drives a run; any flag given on the command line wins
over the file. Data goes to files or stdout, logs to stderr, and a rerun
with the same config and inputs reproduces identical bytes.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import corpus_io, pipeline
from .config import ConfigError, build_config, parse_config_file
from .evaluation import span_f1_files


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="pipeline config file (key = value lines)")
    parser.add_argument("--dump", dest="dump_path", help="MediaWiki XML dump path")
    parser.add_argument("--ontology", dest="ontology_path", help="entity<TAB>category mapping file")
    parser.add_argument("--vocabulary", dest="vocabulary_path", help="category vocabulary file (default: bundled)")
    parser.add_argument("--output-dir", dest="output_dir", help="stage output directory")
    parser.add_argument("--seed", type=int, help="run seed for all stochastic stages")
    parser.add_argument("--workers", type=int, help="parallel workers for the build stage")


_CONFIG_KEYS = (
    "dump_path", "ontology_path", "vocabulary_path", "output_dir",
    "seed", "workers",
)


def _resolve_config(args: argparse.Namespace):
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {
        key: getattr(args, key) for key in _CONFIG_KEYS if getattr(args, key, None) is not None
    }
    return build_config(file_values, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="anchorner",
        description="Build, filter, balance, and export a weakly-labeled NER corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="dump + ontology -> tagged corpus")
    _add_common(p_build)
    p_build.add_argument(
        "--dump-raw-sentences", metavar="PATH",
        help="also write pre-tagging sentence records as JSON lines (debug)",
    )

    p_filter = sub.add_parser("filter", help="apply the three filtering stages")
    _add_common(p_filter)
    p_filter.add_argument("--input", help="corpus to filter (default: <output-dir>/tagged.jsonl)")

    p_balance = sub.add_parser("balance", help="category-balanced resampling")
    _add_common(p_balance)
    p_balance.add_argument("--input", help="corpus to resample (default: <output-dir>/filtered.jsonl)")

    p_export = sub.add_parser("export", help="splits, merged variants, few-shot subsets")
    _add_common(p_export)
    p_export.add_argument("--input", help="corpus to export (default: <output-dir>/balanced.jsonl)")

    p_stats = sub.add_parser("stats", help="print per-category entity counts")
    p_stats.add_argument("input", help="corpus file (.conll or .jsonl)")

    p_fewshot = sub.add_parser("fewshot", help="seeded subset of a corpus")
    p_fewshot.add_argument("input", help="corpus file (.conll or .jsonl)")
    p_fewshot.add_argument("output", help="output CoNLL path")
    group = p_fewshot.add_mutually_exclusive_group(required=True)
    group.add_argument("--size", type=int, help="number of sentences")
    group.add_argument("--percent", type=float, help="percentage of sentences")
    p_fewshot.add_argument("--seed", type=int, default=0)

    p_eval = sub.add_parser("eval", help="span F1 of predictions against gold")
    p_eval.add_argument("gold", help="gold CoNLL file")
    p_eval.add_argument("pred", help="predicted CoNLL file")

    p_all = sub.add_parser("all", help="build -> filter -> balance -> export")
    _add_common(p_all)
    p_all.add_argument(
        "--stream", action="store_true",
        help="chain stages in memory instead of via intermediate files",
    )

    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(name)s %(message)s"
    )
    try:
        return _dispatch(args)
    except pipeline.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    command = args.command
    if command == "build":
        config = _resolve_config(args)
        pipeline.run_build(config, raw_sentence_dump=args.dump_raw_sentences)
    elif command == "filter":
        config = _resolve_config(args)
        pipeline.run_filter(config, input_path=args.input)
    elif command == "balance":
        config = _resolve_config(args)
        pipeline.run_balance(config, input_path=args.input)
    elif command == "export":
        config = _resolve_config(args)
        pipeline.run_export(config, input_path=args.input)
    elif command == "stats":
        corpus = pipeline.load_corpus(args.input)
        pipeline.write_stats(corpus, sys.stdout)
    elif command == "fewshot":
        corpus = pipeline.load_corpus(args.input)
        subset = corpus_io.make_fewshot_subset(
            corpus, size=args.size, percent=args.percent, seed=args.seed
        )
        corpus_io.emit_conll(subset, Path(args.output))
    elif command == "eval":
        for path in (args.gold, args.pred):
            if not Path(path).exists():
                raise pipeline.StageError("eval", f"file not found: {path}")
        report = span_f1_files(args.gold, args.pred)
        report.write_text(sys.stdout)
        print(report.summary_line())
    elif command == "all":
        config = _resolve_config(args)
        pipeline.run_all(config, stream=args.stream)
    return 0


if __name__ == "__main__":
    sys.exit(main())
