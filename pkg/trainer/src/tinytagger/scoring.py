"""Span-level F1 scoring, interchangeable with the pipeline's `eval`.

The summary line uses the exact same machine-readable format as the
corpus pipeline prints, so results from either side can be compared
directly.
"""

from __future__ import annotations

from dataclasses import dataclass


def fix_bio(labels: list[str]) -> tuple[list[str], int]:
    """Repair dangling I- labels; returns (valid labels, repair count)."""
    fixed = []
    repairs = 0
    prev = None
    for label in labels:
        if label.startswith("I-") and label[2:] != prev:
            fixed.append("B-" + label[2:])
            repairs += 1
        else:
            fixed.append(label)
        prev = label[2:] if label != "O" else None
    return fixed, repairs


def decode_spans(labels: list[str]) -> set[tuple[int, int, str]]:
    spans = set()
    i = 0
    while i < len(labels):
        if labels[i].startswith("B-"):
            category = labels[i][2:]
            j = i + 1
            while j < len(labels) and labels[j] == f"I-{category}":
                j += 1
            spans.add((i, j, category))
            i = j
        else:
            i += 1
    return spans


@dataclass
class Scores:
    precision: float
    recall: float
    f1: float
    repairs: int = 0

    def summary_line(self) -> str:
        return (
            f"precision={self.precision:.6f} recall={self.recall:.6f} "
            f"f1={self.f1:.6f}"
        )


def span_scores(gold: list[list[str]], pred: list[list[str]]) -> Scores:
    if len(gold) != len(pred):
        raise ValueError("gold/pred sentence count mismatch")
    tp = n_gold = n_pred = 0
    repairs = 0
    for gold_labels, pred_labels in zip(gold, pred):
        if len(gold_labels) != len(pred_labels):
            raise ValueError("gold/pred token count mismatch")
        fixed, n_fixed = fix_bio(pred_labels)
        repairs += n_fixed
        gold_spans = decode_spans(gold_labels)
        pred_spans = decode_spans(fixed)
        tp += len(gold_spans & pred_spans)
        n_gold += len(gold_spans)
        n_pred += len(pred_spans)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Scores(precision=precision, recall=recall, f1=f1, repairs=repairs)
