"""Shared builders for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from anchorner.tagger import encode_spans
from anchorner.types import Span, TaggedSentence

DATA = Path(__file__).parent / "data"

MINI_DUMP = DATA / "mini_dump.xml"
MINI_ONTOLOGY = DATA / "mini_ontology.tsv"
GOLDEN_TAGGED = DATA / "golden_tagged.conll"


def sent(
    categories: list[tuple[int, int, str]],
    n_tokens: int = 12,
    source: tuple[int, int] = (-1, -1),
) -> TaggedSentence:
    """Sentence of filler tokens with spans at the given token ranges."""
    spans = [Span(s, e, c) for s, e, c in categories]
    return TaggedSentence(
        tokens=[f"w{i}" for i in range(n_tokens)],
        labels=encode_spans(n_tokens, spans),
        source=source,
    )


def random_tagged_sentence(
    rng: random.Random,
    categories: list[str],
    max_tokens: int = 12,
    source: tuple[int, int] = (-1, -1),
) -> TaggedSentence:
    n = rng.randint(1, max_tokens)
    spans = []
    pos = 0
    while pos < n:
        if rng.random() < 0.4:
            length = rng.randint(1, min(3, n - pos))
            spans.append(Span(pos, pos + length, rng.choice(categories)))
            pos += length
        else:
            pos += 1
    return TaggedSentence(
        tokens=[f"t{i}" for i in range(n)],
        labels=encode_spans(n, spans),
        source=source,
    )


def random_corpus(
    rng: random.Random,
    n_sentences: int,
    categories: list[str] | None = None,
) -> list[TaggedSentence]:
    categories = categories or ["PER", "LOC", "ORG", "ENTITY"]
    return [
        random_tagged_sentence(rng, categories, source=(0, i))
        for i in range(n_sentences)
    ]


# Hand-tallied 20-sentence fixture corpus for stats/posting tests.
# Span categories per sentence (count them by eye):
#   city x6, river x4, poet x3, award x2, ENTITY x7  -> 22 entities
FIXTURE_SPEC: list[list[str]] = [
    ["city"],
    ["city", "ENTITY"],
    ["river"],
    ["poet", "city"],
    ["ENTITY"],
    ["award", "river"],
    ["city"],
    ["ENTITY", "ENTITY"],
    ["poet"],
    ["river"],
    ["city"],
    ["award"],
    ["ENTITY"],
    ["poet", "river"],
    ["city"],
    ["ENTITY"],
    [],
    ["ENTITY"],
    [],
    [],
]

FIXTURE_COUNTS = {"city": 6, "river": 4, "poet": 3, "award": 2, "ENTITY": 7}


def fixture_corpus() -> list[TaggedSentence]:
    corpus = []
    for i, cats in enumerate(FIXTURE_SPEC):
        spans = [(2 * j, 2 * j + 1, cat) for j, cat in enumerate(cats)]
        corpus.append(sent(spans, n_tokens=max(8, 2 * len(cats) + 2), source=(7, i)))
    return corpus
