"""Corpus filtering: scarce-category discard, no-entity removal, and the
probabilistic drop for frequent-category / ENTITY-heavy sentences.

The probabilistic stage keys its Bernoulli draw on (seed, article_id,
sentence_index), so the decision for a sentence is independent of
processing order and worker count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .rng import STREAM_FILTER, keyed_unit
from .types import ENTITY_LABEL, CategoryStats, TaggedSentence


@dataclass
class FilterConfig:
    scarce_threshold: int = 10
    top_k: int = 20
    drop_prob_3: float = 0.3
    drop_prob_4: float = 0.5
    drop_prob_gt4: float = 0.7
    seed: int = 0
    relabel_scarce: bool = False  # relabel scarce spans to ENTITY instead of dropping

    def __post_init__(self) -> None:
        if self.scarce_threshold < 1:
            raise ValueError("scarce_threshold must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        for p in (self.drop_prob_3, self.drop_prob_4, self.drop_prob_gt4):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"drop probability {p} outside [0, 1]")


@dataclass
class FilterTally:
    scarce_dropped: int = 0
    scarce_relabeled: int = 0
    no_entity_dropped: int = 0
    probabilistic_dropped: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "scarce_dropped": self.scarce_dropped,
            "scarce_relabeled": self.scarce_relabeled,
            "no_entity_dropped": self.no_entity_dropped,
            "probabilistic_dropped": self.probabilistic_dropped,
        }


def compute_stats(corpus: Iterable[TaggedSentence]) -> CategoryStats:
    stats = CategoryStats()
    for sentence in corpus:
        stats.add(sentence)
    return stats


def scarce_categories(stats: CategoryStats, threshold: int) -> set[str]:
    """Categories with fewer than ``threshold`` entities; ENTITY is exempt."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    return {
        cat
        for cat, count in stats.counts.items()
        if count < threshold and cat != ENTITY_LABEL
    }


def apply_scarce_discard(
    sentence: TaggedSentence, scarce: set[str], relabel: bool = False
) -> TaggedSentence | None:
    """Drop (or relabel to ENTITY) sentences touching scarce categories."""
    touched = {s.category for s in sentence.spans} & scarce
    if not touched:
        return sentence
    if not relabel:
        return None
    labels = [
        label if label == "O" or label[2:] not in scarce
        else f"{label[0]}-{ENTITY_LABEL}"
        for label in sentence.labels
    ]
    return TaggedSentence(tokens=sentence.tokens, labels=labels, source=sentence.source)


def filter_no_entity(sentence: TaggedSentence) -> bool:
    """Keep only sentences with at least one concrete-category span."""
    return any(s.category != ENTITY_LABEL for s in sentence.spans)


def top_frequent(stats: CategoryStats, k: int) -> set[str]:
    """The k highest-count categories (ENTITY eligible), ties by name."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(stats.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {cat for cat, _ in ranked[:k]}


def drop_probability(
    sentence: TaggedSentence, top_set: set[str], config: FilterConfig
) -> float:
    spans = sentence.spans
    if not all(s.category in top_set for s in spans):
        return 0.0
    num = sum(1 for s in spans if s.category == ENTITY_LABEL)
    if num == 3:
        return config.drop_prob_3
    if num == 4:
        return config.drop_prob_4
    if num > 4:
        return config.drop_prob_gt4
    return 0.0


def probabilistic_filter(
    sentence: TaggedSentence,
    top_set: set[str],
    config: FilterConfig,
    sentence_key: tuple[int, int] | None = None,
) -> bool:
    """Keep decision for the frequent-category / ENTITY-heavy stage."""
    prob = drop_probability(sentence, top_set, config)
    if prob <= 0.0:
        return True
    article_id, sentence_index = sentence_key or sentence.source
    u = keyed_unit(config.seed, STREAM_FILTER, article_id, sentence_index)
    return u >= prob


def filter_pass_one(
    corpus: Iterable[TaggedSentence],
    scarce: set[str],
    config: FilterConfig,
    tally: FilterTally,
) -> Iterator[TaggedSentence]:
    """Scarce discard then no-entity removal, streaming."""
    for sentence in corpus:
        kept = apply_scarce_discard(sentence, scarce, config.relabel_scarce)
        if kept is None:
            tally.scarce_dropped += 1
            continue
        if kept is not sentence:
            tally.scarce_relabeled += 1
        if not filter_no_entity(kept):
            tally.no_entity_dropped += 1
            continue
        yield kept


def filter_pass_two(
    corpus: Iterable[TaggedSentence],
    top_set: set[str],
    config: FilterConfig,
    tally: FilterTally,
) -> Iterator[TaggedSentence]:
    for sentence in corpus:
        if probabilistic_filter(sentence, top_set, config):
            yield sentence
        else:
            tally.probabilistic_dropped += 1
