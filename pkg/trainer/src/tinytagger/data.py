"""CoNLL reading, label vocabularies, and batch assembly.

The harness only ever exchanges data with the corpus pipeline through
its file formats: token-space-label lines with blank-line sentence
separators (tabs tolerated, label in the last column).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .bpe import SubwordVocab

IGNORE_INDEX = -100


@dataclass
class Sentence:
    tokens: list[str]
    labels: list[str]


def read_conll(path: str | Path) -> list[Sentence]:
    sentences: list[Sentence] = []
    tokens: list[str] = []
    labels: list[str] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                if tokens:
                    sentences.append(Sentence(list(tokens), list(labels)))
                    tokens.clear()
                    labels.clear()
                continue
            parts = line.split()
            tokens.append(parts[0])
            labels.append(parts[-1])
    if tokens:
        sentences.append(Sentence(tokens, labels))
    return sentences


def write_conll(sentences: list[Sentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in sentences:
            for token, label in zip(s.tokens, s.labels):
                f.write(f"{token} {label}\n")
            f.write("\n")


def label_vocabulary(sentences: list[Sentence]) -> list[str]:
    """BIO label list: O first, then sorted B-/I- pairs found in the data."""
    categories = sorted(
        {lab[2:] for s in sentences for lab in s.labels if lab != "O"}
    )
    vocab = ["O"]
    for cat in categories:
        vocab.extend((f"B-{cat}", f"I-{cat}"))
    return vocab


@dataclass
class Batch:
    ids: torch.Tensor          # (B, L) subword ids
    mask: torch.Tensor         # (B, L) True at real positions
    targets: torch.Tensor      # (B, L) label ids, IGNORE_INDEX off first-subwords
    first_positions: list[list[int]]  # per sentence, first-subword index per token


def encode_batch(
    sentences: list[Sentence],
    subwords: SubwordVocab,
    label_ids: dict[str, int],
    max_len: int,
) -> Batch:
    encoded = [subwords.encode_sentence(s.tokens, max_len) for s in sentences]
    width = max(1, max(len(ids) for ids, _ in encoded))
    ids = torch.zeros((len(sentences), width), dtype=torch.long)
    mask = torch.zeros((len(sentences), width), dtype=torch.bool)
    targets = torch.full((len(sentences), width), IGNORE_INDEX, dtype=torch.long)
    firsts: list[list[int]] = []
    for row, (sentence, (piece_ids, first_positions)) in enumerate(zip(sentences, encoded)):
        ids[row, : len(piece_ids)] = torch.tensor(piece_ids, dtype=torch.long)
        mask[row, : len(piece_ids)] = True
        for token_idx, pos in enumerate(first_positions):
            if 0 <= pos < width:
                label = sentence.labels[token_idx]
                targets[row, pos] = label_ids.get(label, label_ids["O"])
        firsts.append(first_positions)
    return Batch(ids=ids, mask=mask, targets=targets, first_positions=firsts)


def batches(
    sentences: list[Sentence],
    subwords: SubwordVocab,
    label_ids: dict[str, int],
    batch_size: int,
    max_len: int,
    rng: np.random.Generator | None = None,
):
    order = np.arange(len(sentences))
    if rng is not None:
        order = rng.permutation(len(sentences))
    for start in range(0, len(sentences), batch_size):
        chunk = [sentences[i] for i in order[start : start + batch_size]]
        yield encode_batch(chunk, subwords, label_ids, max_len)
