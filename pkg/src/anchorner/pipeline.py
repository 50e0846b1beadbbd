"""Stage orchestration: build, filter, balance, export.

Stages exchange corpora through files by default (CoNLL for interchange,
a JSONL sibling that preserves provenance), so each stage can be rerun
independently. ``run_all`` chains them; with ``stream=True`` the corpus
stays in memory and intermediate files are skipped. Output bytes are a
deterministic function of (inputs, config) for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import logging
import multiprocessing
from pathlib import Path
from typing import Iterable, Iterator

from . import balance as balance_mod
from . import corpus_io, filters
from .config import PipelineConfig
from .ontology import CategoryVocabulary, OntologyIndex, load_ontology
from .sentences import DEFAULT_ABBREVIATIONS, load_abbreviations, split_sentences
from .tagger import tag_sentence
from .types import Article, CategoryStats, TaggedSentence
from .wikitext import StripTally, extract_anchors
from .wikixml import IngestTally, stream_pages

log = logging.getLogger("anchorner")


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def _check_build_inputs(config: PipelineConfig) -> None:
    if not config.dump_path:
        raise StageError("build", "no dump_path configured")
    if not Path(config.dump_path).exists():
        raise StageError("build", f"dump not found: {config.dump_path}")
    if not config.ontology_path:
        raise StageError("build", "no ontology_path configured")
    if not Path(config.ontology_path).exists():
        raise StageError("build", f"ontology not found: {config.ontology_path}")


# -- page processing (worker-safe) -------------------------------------------

_worker_index: OntologyIndex | None = None
_worker_abbrevs: frozenset[str] = DEFAULT_ABBREVIATIONS


def _init_worker(ontology_path, vocabulary_path, mode, abbreviations_path) -> None:
    global _worker_index, _worker_abbrevs
    vocabulary = (
        CategoryVocabulary.from_file(vocabulary_path)
        if vocabulary_path
        else CategoryVocabulary.bundled()
    )
    _worker_index = load_ontology(ontology_path, vocabulary, mode)
    _worker_abbrevs = (
        load_abbreviations(abbreviations_path)
        if abbreviations_path
        else DEFAULT_ABBREVIATIONS
    )


def _process_page(payload: tuple[str, int, str]):
    """(title, page_id, wikitext) -> (tagged sentences, malformed, failed)."""
    title, page_id, wikitext = payload
    strip_tally = StripTally()
    try:
        plain, anchors = extract_anchors(wikitext, strip_tally)
        article = Article(title=title, article_id=page_id, plain_text=plain, anchors=anchors)
        raw_sentences = split_sentences(article, _worker_abbrevs)
        tagged = [tag_sentence(s, _worker_index) for s in raw_sentences]
    except Exception:
        return [], strip_tally.malformed, 1
    return tagged, strip_tally.malformed, 0


def _content_pages(source, tally: IngestTally, hasher) -> Iterator[tuple[str, int, str]]:
    for title, page_id, ns, redirect, wikitext in stream_pages(source, hasher):
        tally.pages_seen += 1
        if redirect:
            tally.redirects_skipped += 1
            continue
        if ns != 0:
            tally.namespace_skipped += 1
            continue
        yield title, page_id, wikitext


def _open_dump(path: str):
    # the XML reader wants plain bytes; decompress .bz2/.gz here
    if path.endswith(".bz2"):
        import bz2

        return bz2.open(path, "rb")
    if path.endswith(".gz"):
        import gzip

        return gzip.open(path, "rb")
    return open(path, "rb")


def build_corpus(
    config: PipelineConfig, tally: IngestTally | None = None
) -> Iterator[TaggedSentence]:
    """Stream the dump into tagged sentences, optionally in parallel."""
    if tally is None:
        tally = IngestTally()
    hasher = hashlib.sha256()
    dump = _open_dump(config.dump_path)
    try:
        yield from _tagged_sentences(config, tally, dump, hasher)
    finally:
        dump.close()
    tally.dump_sha256 = "sha256:" + hasher.hexdigest()


def _tagged_sentences(
    config: PipelineConfig, tally: IngestTally, dump, hasher
) -> Iterator[TaggedSentence]:
    pages = _content_pages(dump, tally, hasher)
    if config.workers <= 1:
        _init_worker(
            config.ontology_path, config.vocabulary_path,
            config.ontology_mode, config.abbreviations_path,
        )
        results = map(_process_page, pages)
        for sentences, malformed, failed in results:
            tally.markup_malformed += malformed
            tally.strip_failures += failed
            tally.articles_yielded += 0 if failed else 1
            yield from sentences
    else:
        with multiprocessing.Pool(
            processes=config.workers,
            initializer=_init_worker,
            initargs=(
                config.ontology_path, config.vocabulary_path,
                config.ontology_mode, config.abbreviations_path,
            ),
        ) as pool:
            for sentences, malformed, failed in pool.imap(
                _process_page, pages, chunksize=8
            ):
                tally.markup_malformed += malformed
                tally.strip_failures += failed
                tally.articles_yielded += 0 if failed else 1
                yield from sentences


# -- corpus materialization helpers -------------------------------------------


def load_corpus(path: str | Path) -> list[TaggedSentence]:
    path = Path(path)
    if path.suffix == ".jsonl":
        return list(corpus_io.load_jsonl(path))
    return list(corpus_io.load_conll(path))


def _write_corpus(
    corpus: list[TaggedSentence], out_dir: Path, stem: str
) -> tuple[Path, int]:
    conll_path = out_dir / f"{stem}.conll"
    corpus_io.emit_conll(corpus, conll_path)
    corpus_io.emit_jsonl(corpus, out_dir / f"{stem}.jsonl")
    return conll_path, conll_path.stat().st_size


def _write_stage_manifest(
    out_dir: Path,
    stage: str,
    corpus: list[TaggedSentence],
    byte_size: int,
    config: PipelineConfig,
    dump_checksum: str,
    tallies: dict[str, int],
) -> corpus_io.CorpusManifest:
    stats = filters.compute_stats(corpus)
    manifest = corpus_io.CorpusManifest.from_stats(
        stats,
        byte_size=byte_size,
        config_digest=config.digest(),
        dump_checksum=dump_checksum,
        tallies=tallies,
    )
    corpus_io.write_manifest(manifest, out_dir / f"{stage}.manifest")
    return manifest


def _upstream_checksum(out_dir: Path) -> str:
    manifest_path = out_dir / "build.manifest"
    if manifest_path.exists():
        return corpus_io.read_manifest(manifest_path).dump_checksum
    return ""


# -- stages -------------------------------------------------------------------


def run_build(
    config: PipelineConfig, raw_sentence_dump: str | None = None
) -> tuple[list[TaggedSentence], IngestTally]:
    _check_build_inputs(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tally = IngestTally()
    corpus = list(build_corpus(config, tally))
    if raw_sentence_dump:
        _dump_raw_sentences(config, raw_sentence_dump)
    _, byte_size = _write_corpus(corpus, out_dir, "tagged")
    with open(out_dir / "tagged.stats.tsv", "w", encoding="utf-8", newline="\n") as f:
        write_stats(corpus, f)
    _write_stage_manifest(
        out_dir, "build", corpus, byte_size, config,
        tally.dump_sha256, {k: v for k, v in tally.as_dict().items() if k != "dump_sha256"},
    )
    log.info(
        "build: %d pages -> %d sentences (%d redirects, %d non-article, %d strip failures)",
        tally.pages_seen, len(corpus), tally.redirects_skipped,
        tally.namespace_skipped, tally.strip_failures,
    )
    return corpus, tally


def _dump_raw_sentences(config: PipelineConfig, out_path: str) -> None:
    """Debug dump of pre-tagging sentence records, line-delimited JSON."""
    _init_worker(
        config.ontology_path, config.vocabulary_path,
        config.ontology_mode, config.abbreviations_path,
    )
    tally = IngestTally()
    with open(out_path, "w", encoding="utf-8", newline="\n") as f, _open_dump(
        config.dump_path
    ) as dump:
        for title, page_id, wikitext in _content_pages(dump, tally, None):
            try:
                plain, anchors = extract_anchors(wikitext)
                article = Article(title, page_id, plain, anchors)
            except Exception:
                continue
            for s in split_sentences(article, _worker_abbrevs):
                record = {
                    "article_id": s.article_id,
                    "sentence_index": s.sentence_index,
                    "tokens": [[t.text, t.start, t.end] for t in s.tokens],
                    "anchors": [[a.start, a.end, a.surface, a.target] for a in s.anchors],
                }
                f.write(json.dumps(record, ensure_ascii=False) + "\n")


def apply_filters(
    corpus: Iterable[TaggedSentence], config: PipelineConfig
) -> tuple[list[TaggedSentence], filters.FilterTally]:
    """Two-pass filtering: scarce + no-entity, then the probabilistic drop
    against top-k statistics computed on the pass-one survivors."""
    tally = filters.FilterTally()
    corpus = list(corpus)
    stats_raw = filters.compute_stats(corpus)
    scarce = filters.scarce_categories(stats_raw, config.filter.scarce_threshold)
    survivors = list(filters.filter_pass_one(corpus, scarce, config.filter, tally))
    stats_kept = filters.compute_stats(survivors)
    if not stats_kept.counts:
        return [], tally
    top_set = filters.top_frequent(stats_kept, config.filter.top_k)
    final = list(filters.filter_pass_two(survivors, top_set, config.filter, tally))
    return final, tally


def run_filter(
    config: PipelineConfig, corpus: list[TaggedSentence] | None = None,
    input_path: str | None = None, write: bool = True,
) -> list[TaggedSentence]:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if corpus is None:
        path = input_path or str(out_dir / "tagged.jsonl")
        if not Path(path).exists():
            raise StageError("filter", f"input corpus not found: {path}")
        corpus = load_corpus(path)
    filtered, tally = apply_filters(corpus, config)
    if write:
        _, byte_size = _write_corpus(filtered, out_dir, "filtered")
        _write_stage_manifest(
            out_dir, "filter", filtered, byte_size, config,
            _upstream_checksum(out_dir), tally.as_dict(),
        )
    log.info("filter: %d -> %d sentences (%s)", len(corpus), len(filtered), tally.as_dict())
    return filtered


def apply_balancing(
    corpus: list[TaggedSentence], config: PipelineConfig
) -> tuple[list[TaggedSentence], list[tuple[str, int, int]]]:
    stats_before = filters.compute_stats(corpus)
    if not any(n > 0 for n in stats_before.counts.values()):
        return [], []
    dist = balance_mod.sampling_distribution(stats_before, config.sampling.alpha)
    sentences, posting = balance_mod.build_category_posting(corpus)
    resampled = list(
        balance_mod.resample(posting, sentences, dist, config.sampling)
    )
    report = balance_mod.before_after_report(stats_before, resampled)
    return resampled, report


def run_balance(
    config: PipelineConfig, corpus: list[TaggedSentence] | None = None,
    input_path: str | None = None, write: bool = True,
) -> list[TaggedSentence]:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if corpus is None:
        path = input_path or str(out_dir / "filtered.jsonl")
        if not Path(path).exists():
            raise StageError("balance", f"input corpus not found: {path}")
        corpus = load_corpus(path)
    resampled, report = apply_balancing(corpus, config)
    if write:
        _, byte_size = _write_corpus(resampled, out_dir, "balanced")
        balance_mod.write_report(report, out_dir / "before_after.tsv")
        _write_stage_manifest(
            out_dir, "balance", resampled, byte_size, config,
            _upstream_checksum(out_dir), {},
        )
    log.info("balance: %d -> %d sentences", len(corpus), len(resampled))
    return resampled


def run_export(
    config: PipelineConfig, corpus: list[TaggedSentence] | None = None,
    input_path: str | None = None,
) -> dict[str, Path]:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if corpus is None:
        path = input_path or str(out_dir / "balanced.jsonl")
        if not Path(path).exists():
            raise StageError("export", f"input corpus not found: {path}")
        corpus = load_corpus(path)
    outputs: dict[str, Path] = {}
    train, val = corpus_io.split_train_val(
        corpus, ratio=config.export.split_ratio, seed=config.seed
    )
    for name, part in (("train", train), ("val", val)):
        path = out_dir / f"{name}.conll"
        corpus_io.emit_conll(part, path)
        corpus_io.emit_jsonl(part, out_dir / f"{name}.jsonl")
        outputs[name] = path
    for map_name in config.export.merge_maps:
        merge_map = _resolve_merge_map(map_name)
        merged = list(corpus_io.apply_merge_map(corpus, merge_map))
        path = out_dir / f"merged_{merge_map.name}.conll"
        corpus_io.emit_conll(merged, path)
        outputs[f"merged_{merge_map.name}"] = path
    for size in config.export.fewshot_sizes:
        subset = corpus_io.make_fewshot_subset(train, size=size, seed=config.seed)
        path = out_dir / f"fewshot_{size}.conll"
        corpus_io.emit_conll(subset, path)
        outputs[f"fewshot_{size}"] = path
    stats = filters.compute_stats(corpus)
    manifest = corpus_io.CorpusManifest.from_stats(
        stats,
        byte_size=sum(p.stat().st_size for p in outputs.values()),
        config_digest=config.digest(),
        dump_checksum=_upstream_checksum(out_dir),
    )
    corpus_io.write_manifest(manifest, out_dir / "export.manifest")
    log.info("export: wrote %s", ", ".join(sorted(str(p) for p in outputs.values())))
    return outputs


def _resolve_merge_map(name_or_path: str) -> corpus_io.MergeMap:
    if name_or_path in ("4types", "212types"):
        return corpus_io.MergeMap.bundled(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise StageError("export", f"merge map not found: {name_or_path}")
    return corpus_io.MergeMap.from_file(path)


def run_all(config: PipelineConfig, stream: bool = False) -> None:
    """build -> filter -> balance -> export; byte-identical to running the
    stages separately. ``stream`` keeps intermediates in memory."""
    if stream:
        _check_build_inputs(config)
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        tally = IngestTally()
        corpus = list(build_corpus(config, tally))
        filtered = run_filter(config, corpus=corpus, write=False)
        balanced = run_balance(config, corpus=filtered, write=True)
        run_export(config, corpus=balanced)
        return
    run_build(config)
    run_filter(config)
    run_balance(config)
    run_export(config)


def write_stats(corpus: Iterable[TaggedSentence], sink) -> CategoryStats:
    stats = filters.compute_stats(corpus)
    for category in sorted(stats.counts, key=lambda c: (-stats.counts[c], c)):
        sink.write(f"{category}\t{stats.counts[category]}\n")
    sink.write(f"# entities\t{stats.total_entities}\n")
    sink.write(f"# sentences\t{stats.total_sentences}\n")
    sink.write(f"# tokens\t{stats.total_tokens}\n")
    return stats
