"""Category-balanced resampling.

Sentences are drawn with replacement in two stages: a category is drawn
with probability proportional to its entity count raised to ``alpha``,
then a sentence is drawn uniformly from that category's posting list.
With alpha below 1 this boosts rare categories relative to their natural
frequency. Category draws go through an alias table, so each draw is
O(1) and a full resampling pass is linear in the target size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import STREAM_CATEGORY, STREAM_WITHIN, keyed_unit
from .types import CategoryStats, TaggedSentence


@dataclass
class SamplingConfig:
    alpha: float = 0.7
    target_size: int | None = None  # None: same as input sentence count
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if self.target_size is not None and self.target_size < 0:
            raise ValueError("target_size must be >= 0")


@dataclass
class SamplingDistribution:
    categories: list[str]  # fixed order for reproducible draws
    probs: np.ndarray

    def prob_of(self, category: str) -> float:
        try:
            return float(self.probs[self.categories.index(category)])
        except ValueError:
            return 0.0


def sampling_distribution(stats: CategoryStats, alpha: float) -> SamplingDistribution:
    """Normalized count^alpha over categories with nonzero counts."""
    items = sorted((c, n) for c, n in stats.counts.items() if n > 0)
    if not items:
        raise ValueError("no category has a positive count")
    categories = [c for c, _ in items]
    counts = np.array([n for _, n in items], dtype=np.float64)
    weights = counts**alpha
    return SamplingDistribution(categories=categories, probs=weights / weights.sum())


def build_category_posting(
    corpus: Iterable[TaggedSentence],
) -> tuple[list[TaggedSentence], dict[str, list[int]]]:
    """Index sentences by the distinct categories they contain.

    Returns the materialized sentence list plus, per category, the indices
    of sentences containing it, ordered by (article_id, sentence_index).
    """
    sentences = sorted(corpus, key=lambda s: s.source)
    posting: dict[str, list[int]] = {}
    for idx, sentence in enumerate(sentences):
        for category in sorted(sentence.categories()):
            posting.setdefault(category, []).append(idx)
    return sentences, posting


def build_alias_table(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Walker/Vose alias table for O(1) categorical draws."""
    k = len(probs)
    accept = np.zeros(k, dtype=np.float64)
    alias = np.zeros(k, dtype=np.int64)
    scaled = probs * k
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    scaled = scaled.copy()
    while small and large:
        s = small.pop()
        l = large.pop()
        accept[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] - (1.0 - scaled[s])
        (small if scaled[l] < 1.0 else large).append(l)
    for i in large + small:
        accept[i] = 1.0
    return accept, alias


def _draw_categories(
    dist: SamplingDistribution, n: int, seed: int
) -> np.ndarray:
    accept, alias = build_alias_table(dist.probs)
    idx = np.arange(n, dtype=np.uint64)
    u = np.asarray(keyed_unit(seed, STREAM_CATEGORY, idx))
    k = len(dist.probs)
    scaled = u * k
    cell = np.minimum(scaled.astype(np.int64), k - 1)
    coin = scaled - cell
    return np.where(coin < accept[cell], cell, alias[cell])


def resample(
    posting: dict[str, list[int]],
    sentences: Sequence[TaggedSentence],
    dist: SamplingDistribution,
    config: SamplingConfig,
) -> Iterator[TaggedSentence]:
    """Yield ``target_size`` draws (with multiplicity) in draw order."""
    for category in dist.categories:
        if dist.prob_of(category) > 0 and not posting.get(category):
            raise ValueError(f"category {category!r} has no posting list")
    n = config.target_size if config.target_size is not None else len(sentences)
    if n == 0:
        return
    cat_idx = _draw_categories(dist, n, config.seed)
    sizes = np.array([len(posting[c]) for c in dist.categories], dtype=np.int64)
    u = np.asarray(keyed_unit(config.seed, STREAM_WITHIN, np.arange(n, dtype=np.uint64)))
    within = np.minimum((u * sizes[cat_idx]).astype(np.int64), sizes[cat_idx] - 1)
    for c, w in zip(cat_idx, within):
        yield sentences[posting[dist.categories[c]][w]]


def before_after_report(
    stats_before: CategoryStats, resampled: Iterable[TaggedSentence]
) -> list[tuple[str, int, int]]:
    """Per-category entity counts before and after resampling."""
    after = CategoryStats()
    for sentence in resampled:
        after.add(sentence)
    categories = set(stats_before.counts) | set(after.counts)
    rows = [
        (cat, stats_before.counts.get(cat, 0), after.counts.get(cat, 0))
        for cat in categories
    ]
    rows.sort(key=lambda row: (-row[1], row[0]))
    return rows


def write_report(rows: list[tuple[str, int, int]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for category, before, after in rows:
            f.write(f"{category}\t{before}\t{after}\n")
