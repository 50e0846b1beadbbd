"""Corpus serialization, splits, category merge maps, and the manifest.

CoNLL format: one ``token<SPACE>label`` per line, a blank line after each
sentence, UTF-8 with ``\\n`` newlines. The loader also accepts tabs and
multi-column input (token first, label last). A JSONL sibling format
carries provenance for programmatic consumers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .evaluation import repair_bio
from .tagger import is_valid_bio
from .types import ENTITY_LABEL, CategoryStats, TaggedSentence
from .ontology import CategoryVocabulary


class MergeMapError(ValueError):
    pass


class ConllFormatError(ValueError):
    pass


@dataclass
class LoadTally:
    repaired_sentences: int = 0


def emit_conll(corpus: Iterable[TaggedSentence], sink: str | Path | IO[str]) -> int:
    """Write the corpus; returns the number of sentences written."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as f:
            return emit_conll(corpus, f)
    count = 0
    for sentence in corpus:
        for token, label in zip(sentence.tokens, sentence.labels):
            sink.write(f"{token} {label}\n")
        sink.write("\n")
        count += 1
    return count


def load_conll(
    source: str | Path | IO[str], tally: LoadTally | None = None
) -> Iterator[TaggedSentence]:
    """Parse CoNLL-style input; invalid BIO is repaired and tallied."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            yield from load_conll(f, tally)
            return
    tokens: list[str] = []
    labels: list[str] = []
    index = 0

    def finish() -> TaggedSentence:
        nonlocal index
        fixed = repair_bio(labels)
        if tally is not None and fixed != labels:
            tally.repaired_sentences += 1
        sentence = TaggedSentence(tokens=list(tokens), labels=fixed, source=(-1, index))
        index += 1
        tokens.clear()
        labels.clear()
        return sentence

    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\n")
        if not line.strip():
            if tokens:
                yield finish()
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ConllFormatError(f"line {lineno}: expected token and label, got {line!r}")
        tokens.append(parts[0])
        labels.append(parts[-1])
    if tokens:
        yield finish()


def emit_jsonl(corpus: Iterable[TaggedSentence], sink: str | Path | IO[str]) -> int:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as f:
            return emit_jsonl(corpus, f)
    count = 0
    for sentence in corpus:
        record = {
            "tokens": sentence.tokens,
            "labels": sentence.labels,
            "source": list(sentence.source),
        }
        sink.write(json.dumps(record, ensure_ascii=False) + "\n")
        count += 1
    return count


def load_jsonl(source: str | Path | IO[str]) -> Iterator[TaggedSentence]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            yield from load_jsonl(f)
            return
    for line in source:
        if not line.strip():
            continue
        record = json.loads(line)
        yield TaggedSentence(
            tokens=record["tokens"],
            labels=record["labels"],
            source=tuple(record["source"]),
        )


def _seeded_rng(seed: int, stream: int) -> np.random.Generator:
    # accepts any int seed; streams keep split/subset draws decorrelated
    return np.random.Generator(
        np.random.Philox(key=(seed & (2**64 - 1)) ^ (stream << 64))
    )


def split_train_val(
    corpus: Iterable[TaggedSentence], ratio: float = 0.9, seed: int = 0
) -> tuple[list[TaggedSentence], list[TaggedSentence]]:
    """Disjoint, exhaustive sentence-level split; |train| = round(ratio*N)."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    sentences = list(corpus)
    n = len(sentences)
    n_train = int(np.floor(ratio * n + 0.5))
    rng = _seeded_rng(seed, 1)
    perm = rng.permutation(n)
    train_idx = np.sort(perm[:n_train])
    val_idx = np.sort(perm[n_train:])
    return [sentences[i] for i in train_idx], [sentences[i] for i in val_idx]


def make_fewshot_subset(
    corpus: Sequence[TaggedSentence],
    size: int | None = None,
    percent: float | None = None,
    seed: int = 0,
) -> list[TaggedSentence]:
    """Seeded uniform sample without replacement, in original order."""
    if (size is None) == (percent is None):
        raise ValueError("give exactly one of size or percent")
    n = len(corpus)
    if percent is not None:
        if not 0.0 < percent <= 100.0:
            raise ValueError("percent must be in (0, 100]")
        size = int(np.floor(percent / 100.0 * n + 0.5))
    assert size is not None
    if size > n:
        raise ValueError(f"requested {size} sentences from a corpus of {n}")
    rng = _seeded_rng(seed, 2)
    chosen = np.sort(rng.choice(n, size=size, replace=False))
    return [corpus[i] for i in chosen]


@dataclass
class MergeMap:
    """Category relabeling table; a total function over its vocabulary."""

    mapping: dict[str, str]
    name: str = "custom"

    @property
    def targets(self) -> set[str]:
        return set(self.mapping.values())

    def apply_category(self, category: str) -> str:
        try:
            return self.mapping[category]
        except KeyError:
            raise MergeMapError(f"category {category!r} not in merge map {self.name!r}") from None

    def validate_against(self, vocabulary: CategoryVocabulary) -> None:
        missing = [c for c in vocabulary if c not in self.mapping]
        if missing:
            raise MergeMapError(f"merge map {self.name!r} missing {len(missing)} categories: {missing[:5]}")
        if self.mapping.get(ENTITY_LABEL) != ENTITY_LABEL:
            raise MergeMapError(f"merge map {self.name!r} must map {ENTITY_LABEL} to itself")

    @classmethod
    def from_file(cls, path: str | Path, name: str | None = None) -> "MergeMap":
        mapping: dict[str, str] = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise MergeMapError(f"{path}:{lineno}: expected source<TAB>target")
                mapping[parts[0]] = parts[1]
        return cls(mapping=mapping, name=name or Path(path).stem)

    @classmethod
    def bundled(cls, name: str) -> "MergeMap":
        if name not in ("4types", "212types"):
            raise MergeMapError(f"no bundled merge map named {name!r}")
        text = resources.files("anchorner.data").joinpath(f"merge_{name}.tsv").read_text("utf-8")
        mapping = dict(line.split("\t") for line in text.splitlines() if line.strip())
        return cls(mapping=mapping, name=name)


def apply_merge_map(
    corpus: Iterable[TaggedSentence], merge_map: MergeMap
) -> Iterator[TaggedSentence]:
    """Relabel span categories; span boundaries and counts are unchanged."""
    for sentence in corpus:
        labels = [
            label if label == "O"
            else f"{label[0]}-{merge_map.apply_category(label[2:])}"
            for label in sentence.labels
        ]
        yield TaggedSentence(tokens=sentence.tokens, labels=labels, source=sentence.source)


@dataclass
class CorpusManifest:
    example_count: int = 0
    token_count: int = 0
    category_count: int = 0
    byte_size: int = 0
    pipeline_config_digest: str = ""
    dump_checksum: str = ""
    per_stage_drop_tallies: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_stats(
        cls,
        stats: CategoryStats,
        byte_size: int = 0,
        config_digest: str = "",
        dump_checksum: str = "",
        tallies: dict[str, int] | None = None,
    ) -> "CorpusManifest":
        return cls(
            example_count=stats.total_sentences,
            token_count=stats.total_tokens,
            category_count=sum(1 for n in stats.counts.values() if n > 0),
            byte_size=byte_size,
            pipeline_config_digest=config_digest,
            dump_checksum=dump_checksum,
            per_stage_drop_tallies=dict(tallies or {}),
        )


def write_manifest(manifest: CorpusManifest, sink: str | Path | IO[str]) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as f:
            write_manifest(manifest, f)
            return
    sink.write(f"example_count = {manifest.example_count}\n")
    sink.write(f"token_count = {manifest.token_count}\n")
    sink.write(f"category_count = {manifest.category_count}\n")
    sink.write(f"byte_size = {manifest.byte_size}\n")
    sink.write(f"pipeline_config_digest = {manifest.pipeline_config_digest}\n")
    sink.write(f"dump_checksum = {manifest.dump_checksum}\n")
    for stage in sorted(manifest.per_stage_drop_tallies):
        sink.write(f"drop_tally.{stage} = {manifest.per_stage_drop_tallies[stage]}\n")


def read_manifest(source: str | Path) -> CorpusManifest:
    manifest = CorpusManifest()
    with open(source, encoding="utf-8") as f:
        for line in f:
            if "=" not in line:
                continue
            key, value = (part.strip() for part in line.split("=", 1))
            if key.startswith("drop_tally."):
                manifest.per_stage_drop_tallies[key[len("drop_tally."):]] = int(value)
            elif key in ("example_count", "token_count", "category_count", "byte_size"):
                setattr(manifest, key, int(value))
            elif key in ("pipeline_config_digest", "dump_checksum"):
                setattr(manifest, key, value)
    return manifest


def scan_bio_validity(corpus: Iterable[TaggedSentence]) -> int:
    """Number of sentences with invalid BIO labels (0 for pipeline output)."""
    return sum(1 for sentence in corpus if not is_valid_bio(sentence.labels))
