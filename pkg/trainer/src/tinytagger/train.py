"""Pre-training, head-swap fine-tuning, and the few-shot sweep.

Pre-training teaches the encoder to detect and categorize the weakly
labeled entities of the generated corpus; fine-tuning replaces the head
with one sized to a target label set and continues on target data.
Everything is CPU-scale: a two-layer encoder stands in for a large
pre-trained backbone so the mechanism, not the absolute scores, is
what gets exercised.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .bpe import SubwordVocab
from .data import (
    IGNORE_INDEX,
    Sentence,
    batches,
    encode_batch,
    label_vocabulary,
    read_conll,
)
from .model import ModelDims, Tagger
from .scoring import Scores, fix_bio, span_scores


@dataclass
class TrainConfig:
    learning_rate: float = 5e-5
    pretrain_batch: int = 64   # scaled-down stand-in for a huge pre-training batch
    finetune_batch: int = 32
    pretrain_epochs: int = 4
    finetune_epochs: int = 30
    dims: ModelDims = field(default_factory=ModelDims)
    seeds: tuple[int, ...] = (11, 22, 33, 44, 55)
    mode: str = "target-only"  # or "source-and-target"
    bpe_merges: int = 400
    val_ratio: float = 0.1

    def __post_init__(self) -> None:
        if self.mode not in ("target-only", "source-and-target"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.seeds) != 5:
            raise ValueError("five seeds are required for averaged reporting")

    def digest(self) -> str:
        payload = json.dumps(
            {k: str(v) for k, v in sorted(vars(self).items())}, sort_keys=True
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class Checkpoint:
    encoder_state: dict
    head_state: dict
    label_vocab: list[str]
    subwords_state: dict
    dims: ModelDims
    config_digest: str

    def save(self, path: str | Path) -> None:
        torch.save(
            {
                "encoder_state": self.encoder_state,
                "head_state": self.head_state,
                "label_vocab": self.label_vocab,
                "subwords_state": self.subwords_state,
                "dims": vars(self.dims),
                "config_digest": self.config_digest,
            },
            path,
        )

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        blob = torch.load(path, map_location="cpu", weights_only=False)
        return cls(
            encoder_state=blob["encoder_state"],
            head_state=blob["head_state"],
            label_vocab=blob["label_vocab"],
            subwords_state=blob["subwords_state"],
            dims=ModelDims(**blob["dims"]),
            config_digest=blob["config_digest"],
        )


def _seed_everything(seed: int) -> np.random.Generator:
    seed = seed & (2**64 - 1)
    torch.manual_seed(seed)
    return np.random.default_rng(seed)


def _train_epoch(model, optimizer, loss_fn, sentences, subwords, label_ids, config, rng):
    model.train()
    total = 0.0
    count = 0
    for batch in batches(
        sentences, subwords, label_ids, config.pretrain_batch, config.dims.max_len, rng
    ):
        optimizer.zero_grad()
        logits = model(batch.ids, batch.mask)
        loss = loss_fn(logits.flatten(0, 1), batch.targets.flatten())
        loss.backward()
        optimizer.step()
        total += float(loss.detach())
        count += 1
    return total / max(count, 1)


@torch.no_grad()
def _validation_loss(model, loss_fn, sentences, subwords, label_ids, config) -> float:
    model.eval()
    total = 0.0
    count = 0
    for batch in batches(
        sentences, subwords, label_ids, config.pretrain_batch, config.dims.max_len
    ):
        logits = model(batch.ids, batch.mask)
        total += float(loss_fn(logits.flatten(0, 1), batch.targets.flatten()))
        count += 1
    return total / max(count, 1)


@torch.no_grad()
def predict_labels(
    model: Tagger,
    sentences: list[Sentence],
    subwords: SubwordVocab,
    label_vocab: list[str],
    max_len: int,
    batch_size: int = 64,
) -> tuple[list[list[str]], int]:
    """Per-token labels via the first-subword rule; returns repair tally."""
    model.eval()
    label_ids = {lab: i for i, lab in enumerate(label_vocab)}
    out: list[list[str]] = []
    repairs = 0
    for start in range(0, len(sentences), batch_size):
        chunk = sentences[start : start + batch_size]
        batch = encode_batch(chunk, subwords, label_ids, max_len)
        logits = model(batch.ids, batch.mask)
        best = logits.argmax(dim=-1)
        for row, sentence in enumerate(chunk):
            labels = []
            for pos in batch.first_positions[row]:
                if pos < 0 or pos >= best.shape[1]:
                    labels.append("O")  # truncated tail tokens
                else:
                    labels.append(label_vocab[int(best[row, pos])])
            fixed, n_fixed = fix_bio(labels)
            repairs += n_fixed
            out.append(fixed)
    return out, repairs


def _split_train_val(sentences, val_ratio, rng):
    order = rng.permutation(len(sentences))
    n_val = max(1, int(round(val_ratio * len(sentences)))) if len(sentences) > 1 else 0
    val_idx = set(order[:n_val].tolist())
    train = [s for i, s in enumerate(sentences) if i not in val_idx]
    val = [s for i, s in enumerate(sentences) if i in val_idx]
    return train, val


def pretrain(
    corpus_path: str | Path, config: TrainConfig, seed: int = 0
) -> tuple[Checkpoint, dict]:
    """Train a tagger from scratch on the generated corpus.

    The corpus splits 90:10; the checkpoint with the best validation
    loss is kept.
    """
    sentences = read_conll(corpus_path)
    if not sentences:
        raise ValueError(f"empty corpus: {corpus_path}")
    label_vocab = label_vocabulary(sentences)
    label_ids = {lab: i for i, lab in enumerate(label_vocab)}
    rng = _seed_everything(seed)
    subwords = SubwordVocab.train(
        (tok for s in sentences for tok in s.tokens), config.bpe_merges
    )
    train, val = _split_train_val(sentences, config.val_ratio, rng)
    model = Tagger(subwords.size, config.dims, len(label_vocab))
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)

    initial_val = _validation_loss(model, loss_fn, val, subwords, label_ids, config)
    best_val = float("inf")
    best_state = None
    history = []
    for epoch in range(config.pretrain_epochs):
        train_loss = _train_epoch(
            model, optimizer, loss_fn, train, subwords, label_ids, config, rng
        )
        val_loss = _validation_loss(model, loss_fn, val, subwords, label_ids, config)
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss})
        if val_loss < best_val:
            best_val = val_loss
            best_state = copy.deepcopy(model.state_dict())
    if best_state is not None:
        model.load_state_dict(best_state)
    checkpoint = Checkpoint(
        encoder_state=copy.deepcopy(model.encoder.state_dict()),
        head_state=copy.deepcopy(model.head.state_dict()),
        label_vocab=label_vocab,
        subwords_state=subwords.state(),
        dims=config.dims,
        config_digest=config.digest(),
    )
    val_f1 = 0.0
    if val:
        pred, _ = predict_labels(
            model, val, subwords, label_vocab, config.dims.max_len
        )
        val_f1 = span_scores([s.labels for s in val], pred).f1
    report = {
        "initial_val_loss": initial_val,
        "best_val_loss": best_val,
        "val_f1": val_f1,
        "history": history,
    }
    return checkpoint, report


def _model_from_checkpoint(
    checkpoint: Checkpoint, n_labels: int, subwords: SubwordVocab
) -> Tagger:
    """Encoder from the checkpoint, freshly initialized head."""
    model = Tagger(subwords.size, checkpoint.dims, len(checkpoint.label_vocab))
    model.encoder.load_state_dict(checkpoint.encoder_state)
    model.swap_head(n_labels)
    return model


def finetune(
    checkpoint: Checkpoint | None,
    train_sentences: list[Sentence],
    test_sentences: list[Sentence] | None,
    config: TrainConfig,
    seed: int,
    subwords: SubwordVocab,
    dims: ModelDims | None = None,
) -> tuple[Tagger, Scores | None, list[str]]:
    """Fine-tune on target data; ``checkpoint=None`` trains from scratch.

    The head is always new and sized 2*|target categories|+1; with a
    checkpoint the encoder starts from the pre-trained weights. Passing
    ``test_sentences=None`` skips scoring.
    """
    rng = _seed_everything(seed)
    label_vocab = label_vocabulary(train_sentences + (test_sentences or []))
    label_ids = {lab: i for i, lab in enumerate(label_vocab)}
    if checkpoint is not None:
        model = _model_from_checkpoint(checkpoint, len(label_vocab), subwords)
    else:
        model = Tagger(subwords.size, dims or config.dims, len(label_vocab))
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)
    for _ in range(config.finetune_epochs):
        for batch in batches(
            train_sentences, subwords, label_ids,
            config.finetune_batch, model.encoder.dims.max_len, rng,
        ):
            optimizer.zero_grad()
            logits = model(batch.ids, batch.mask)
            loss = loss_fn(logits.flatten(0, 1), batch.targets.flatten())
            loss.backward()
            optimizer.step()
    if test_sentences is None:
        return model, None, label_vocab
    pred, _repairs = predict_labels(
        model, test_sentences, subwords, label_vocab, model.encoder.dims.max_len
    )
    scores = span_scores([s.labels for s in test_sentences], pred)
    return model, scores, label_vocab


def run_source_target(
    checkpoint: Checkpoint | None,
    source_sentences: list[Sentence],
    target_train: list[Sentence],
    target_test: list[Sentence],
    config: TrainConfig,
    seed: int,
    subwords: SubwordVocab,
) -> Scores:
    """Train on the source domain first, then fine-tune on the target."""
    source_model, _, _ = finetune(
        checkpoint, source_sentences, None, config, seed, subwords
    )
    bridge = Checkpoint(
        encoder_state=copy.deepcopy(source_model.encoder.state_dict()),
        head_state=copy.deepcopy(source_model.head.state_dict()),
        label_vocab=checkpoint.label_vocab if checkpoint else ["O"],
        subwords_state=subwords.state(),
        dims=source_model.encoder.dims,
        config_digest=config.digest(),
    )
    _, scores, _ = finetune(bridge, target_train, target_test, config, seed, subwords)
    return scores


def fewshot_sweep(
    checkpoint: Checkpoint,
    subsets: dict[int, dict[int, list[Sentence]]],
    test_sentences: list[Sentence],
    config: TrainConfig,
    subwords: SubwordVocab,
) -> list[tuple[int, float]]:
    """Mean F1 over the five seeds for each subset size.

    ``subsets[size][seed]`` holds the training sentences for that cell;
    sizes must come in ascending order.
    """
    sizes = sorted(subsets)
    rows = []
    for size in sizes:
        f1s = []
        for seed in config.seeds:
            _, scores, _ = finetune(
                checkpoint, subsets[size][seed], test_sentences, config, seed, subwords
            )
            f1s.append(scores.f1)
        rows.append((size, sum(f1s) / len(f1s)))
    return rows


@torch.no_grad()
def export_entity_embeddings(
    checkpoint: Checkpoint,
    sentences: list[Sentence],
    out_path: str | Path,
) -> int:
    """First-subword encoder states of each gold entity, line-delimited.

    Each line is ``category<TAB>v1 v2 ... vH``; returns the line count.
    """
    subwords = SubwordVocab.from_state(checkpoint.subwords_state)
    model = Tagger(subwords.size, checkpoint.dims, len(checkpoint.label_vocab))
    model.encoder.load_state_dict(checkpoint.encoder_state)
    model.head.load_state_dict(checkpoint.head_state)
    model.eval()
    label_ids = {lab: i for i, lab in enumerate(checkpoint.label_vocab)}
    written = 0
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        for start in range(0, len(sentences), 64):
            chunk = sentences[start : start + 64]
            batch = encode_batch(chunk, subwords, label_ids, checkpoint.dims.max_len)
            states = model.encoder(batch.ids, batch.mask)
            for row, sentence in enumerate(chunk):
                for token_idx, label in enumerate(sentence.labels):
                    if not label.startswith("B-"):
                        continue
                    pos = batch.first_positions[row][token_idx]
                    if pos < 0 or pos >= states.shape[1]:
                        continue
                    vector = states[row, pos].numpy()
                    values = " ".join(f"{v:.5f}" for v in vector)
                    f.write(f"{label[2:]}\t{values}\n")
                    written += 1
    return written
