"""Core record types shared across the pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

ENTITY_LABEL = "ENTITY"


class Token(NamedTuple):
    text: str
    start: int
    end: int


class Span(NamedTuple):
    """A labeled token range; ``end`` is exclusive."""

    start: int
    end: int
    category: str


@dataclass(frozen=True)
class AnchorSpan:
    """A hyperlinked span of plain text. Offsets index the surrounding text."""

    start: int
    end: int
    surface: str
    target: str


@dataclass
class Article:
    title: str
    article_id: int
    plain_text: str
    anchors: list[AnchorSpan]


@dataclass
class RawSentence:
    """One tokenized sentence; anchor offsets are relative to ``text``."""

    article_id: int
    sentence_index: int
    text: str
    tokens: list[Token]
    anchors: list[AnchorSpan]


@dataclass
class TaggedSentence:
    """The corpus atom: tokens plus BIO labels.

    ``source`` is ``(article_id, sentence_index)``; corpora loaded from
    formats that do not carry provenance use ``(-1, running_index)``.
    """

    tokens: list[str]
    labels: list[str]
    source: tuple[int, int] = (-1, -1)

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.labels):
            raise ValueError(
                f"{len(self.tokens)} tokens vs {len(self.labels)} labels"
            )

    @property
    def spans(self) -> list[Span]:
        from .tagger import spans_of

        return spans_of(self.labels)

    def categories(self) -> set[str]:
        return {s.category for s in self.spans}


@dataclass
class CategoryStats:
    """Per-category entity-span counts over a corpus."""

    counts: dict[str, int] = field(default_factory=dict)
    total_entities: int = 0
    total_sentences: int = 0
    total_tokens: int = 0

    def add(self, sentence: TaggedSentence) -> None:
        for span in sentence.spans:
            self.counts[span.category] = self.counts.get(span.category, 0) + 1
            self.total_entities += 1
        self.total_sentences += 1
        self.total_tokens += len(sentence.tokens)

    def merge(self, other: "CategoryStats") -> "CategoryStats":
        merged = CategoryStats(
            counts=dict(self.counts),
            total_entities=self.total_entities + other.total_entities,
            total_sentences=self.total_sentences + other.total_sentences,
            total_tokens=self.total_tokens + other.total_tokens,
        )
        for cat, n in other.counts.items():
            merged.counts[cat] = merged.counts.get(cat, 0) + n
        return merged
