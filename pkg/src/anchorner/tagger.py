"""Anchor-driven BIO labeling.

Only anchored tokens are entity candidates: an anchor whose target is in
the ontology gets that category, any other anchor gets the ``ENTITY``
sentinel, everything else is ``O``.
"""

from __future__ import annotations

from .ontology import OntologyIndex
from .types import ENTITY_LABEL, RawSentence, Span, TaggedSentence


class InvalidBioError(ValueError):
    """A label sequence violates the BIO scheme."""


def tag_sentence(sentence: RawSentence, index: OntologyIndex) -> TaggedSentence:
    """Label a tokenized sentence from its anchors and the ontology."""
    starts = {tok.start: i for i, tok in enumerate(sentence.tokens)}
    ends = {tok.end: i for i, tok in enumerate(sentence.tokens)}
    labels = ["O"] * len(sentence.tokens)
    for anchor in sentence.anchors:
        ts = starts.get(anchor.start)
        te = ends.get(anchor.end)
        if ts is None or te is None:
            raise ValueError(
                f"anchor {anchor!r} not aligned to token boundaries in "
                f"sentence {sentence.article_id}:{sentence.sentence_index}"
            )
        category = index.lookup(anchor.target) or ENTITY_LABEL
        labels[ts] = f"B-{category}"
        for i in range(ts + 1, te + 1):
            labels[i] = f"I-{category}"
    return TaggedSentence(
        tokens=[tok.text for tok in sentence.tokens],
        labels=labels,
        source=(sentence.article_id, sentence.sentence_index),
    )


def spans_of(labels: list[str]) -> list[Span]:
    """Decode a valid BIO sequence into (start, end, category) spans."""
    spans: list[Span] = []
    start = None
    category = None
    for i, label in enumerate(labels):
        if label == "O":
            if start is not None:
                spans.append(Span(start, i, category))
                start = None
            continue
        if len(label) < 3 or label[1] != "-" or label[0] not in "BI":
            raise InvalidBioError(f"unknown label {label!r} at position {i}")
        kind, cat = label[0], label[2:]
        if kind == "B":
            if start is not None:
                spans.append(Span(start, i, category))
            start, category = i, cat
        else:
            if start is None or cat != category:
                raise InvalidBioError(
                    f"I-{cat} at position {i} does not continue a span"
                )
    if start is not None:
        spans.append(Span(start, len(labels), category))
    return spans


def encode_spans(n_tokens: int, spans: list[Span]) -> list[str]:
    """Inverse of ``spans_of`` for non-overlapping, in-range spans."""
    labels = ["O"] * n_tokens
    for span in sorted(spans):
        if not (0 <= span.start < span.end <= n_tokens):
            raise ValueError(f"span {span} out of range for {n_tokens} tokens")
        if labels[span.start] != "O":
            raise ValueError(f"span {span} overlaps a previous span")
        labels[span.start] = f"B-{span.category}"
        for i in range(span.start + 1, span.end):
            if labels[i] != "O":
                raise ValueError(f"span {span} overlaps a previous span")
            labels[i] = f"I-{span.category}"
    return labels


def is_valid_bio(labels: list[str]) -> bool:
    try:
        spans_of(labels)
    except InvalidBioError:
        return False
    return True
