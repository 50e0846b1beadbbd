"""Span-level precision/recall/F1 for BIO predictions.

A predicted span is a true positive only on an exact (start, end,
category) match with a gold span. Headline scores are micro-averaged;
empty prediction or gold sets score 0 rather than NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

from .tagger import InvalidBioError, spans_of
from .types import TaggedSentence


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    per_category: dict[str, tuple[float, float, float, int]]
    confusion_pairs: dict[tuple[str, str], int] = field(default_factory=dict)

    def summary_line(self) -> str:
        return (
            f"precision={self.precision:.6f} recall={self.recall:.6f} "
            f"f1={self.f1:.6f}"
        )

    def write_text(self, sink: IO[str]) -> None:
        sink.write(f"precision: {self.precision:.4f}\n")
        sink.write(f"recall:    {self.recall:.4f}\n")
        sink.write(f"f1:        {self.f1:.4f}\n")
        if self.per_category:
            sink.write("\nper-category (precision recall f1 support):\n")
            for cat in sorted(self.per_category):
                p, r, f1, support = self.per_category[cat]
                sink.write(f"  {cat}: {p:.4f} {r:.4f} {f1:.4f} {support}\n")
        if self.confusion_pairs:
            sink.write("\nexact-boundary category confusions (gold -> predicted):\n")
            for (gold_cat, pred_cat), n in sorted(self.confusion_pairs.items()):
                sink.write(f"  {gold_cat} -> {pred_cat}: {n}\n")


def repair_bio(labels: Sequence[str]) -> list[str]:
    """Make a label sequence valid: dangling I- becomes B-; idempotent."""
    fixed: list[str] = []
    prev_cat: str | None = None
    for label in labels:
        if label == "O":
            fixed.append(label)
            prev_cat = None
            continue
        if len(label) < 3 or label[1] != "-" or label[0] not in "BI":
            raise InvalidBioError(f"unknown label {label!r}")
        kind, cat = label[0], label[2:]
        if kind == "I" and cat != prev_cat:
            fixed.append(f"B-{cat}")
        else:
            fixed.append(label)
        prev_cat = cat
    return fixed


def _prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def span_f1(
    gold: Sequence[TaggedSentence], pred: Sequence[Sequence[str]]
) -> EvalReport:
    """Micro-averaged span F1 of predictions against gold sentences."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences vs {len(pred)} predictions")
    tp = 0
    n_pred = 0
    n_gold = 0
    cat_tp: dict[str, int] = {}
    cat_pred: dict[str, int] = {}
    cat_gold: dict[str, int] = {}
    confusion: dict[tuple[str, str], int] = {}
    for i, (gold_sentence, pred_labels) in enumerate(zip(gold, pred)):
        if len(pred_labels) != len(gold_sentence.tokens):
            raise ValueError(
                f"sentence {i}: {len(pred_labels)} predicted labels for "
                f"{len(gold_sentence.tokens)} tokens"
            )
        gold_spans = set(gold_sentence.spans)
        pred_spans = set(spans_of(repair_bio(pred_labels)))
        matches = gold_spans & pred_spans
        tp += len(matches)
        n_pred += len(pred_spans)
        n_gold += len(gold_spans)
        for span in gold_spans:
            cat_gold[span.category] = cat_gold.get(span.category, 0) + 1
        for span in pred_spans:
            cat_pred[span.category] = cat_pred.get(span.category, 0) + 1
        for span in matches:
            cat_tp[span.category] = cat_tp.get(span.category, 0) + 1
        gold_by_range = {(s.start, s.end): s.category for s in gold_spans}
        for span in pred_spans - matches:
            gold_cat = gold_by_range.get((span.start, span.end))
            if gold_cat is not None and gold_cat != span.category:
                pair = (gold_cat, span.category)
                confusion[pair] = confusion.get(pair, 0) + 1
    precision, recall, f1 = _prf(tp, n_pred, n_gold)
    per_category = {}
    for cat in sorted(set(cat_gold) | set(cat_pred)):
        p, r, f = _prf(cat_tp.get(cat, 0), cat_pred.get(cat, 0), cat_gold.get(cat, 0))
        per_category[cat] = (p, r, f, cat_gold.get(cat, 0))
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        per_category=per_category,
        confusion_pairs=confusion,
    )


def span_f1_files(gold_path, pred_path) -> EvalReport:
    from .corpus_io import load_conll

    gold = list(load_conll(gold_path))
    pred_sentences = list(load_conll(pred_path))
    return span_f1(gold, [s.labels for s in pred_sentences])
