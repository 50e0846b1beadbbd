import numpy as np
import pytest
import torch
from torch import nn

import tinytagger as tt
from tinytagger.bpe import SubwordVocab
from tinytagger.data import IGNORE_INDEX, Sentence, encode_batch
from tinytagger.model import ModelDims, Tagger, encoder_fingerprint
from tinytagger.train import (
    Checkpoint,
    TrainConfig,
    export_entity_embeddings,
    finetune,
    fewshot_sweep,
    pretrain,
    run_source_target,
)


TINY = [
    Sentence(["City", "Koba1", "is", "old"], ["B-location", "I-location", "O", "O"]),
    Sentence(["Person", "Mane2", "writes"], ["B-person", "I-person", "O"]),
]


def _tiny_config(**overrides):
    base = dict(
        learning_rate=1e-3,
        pretrain_epochs=50,
        finetune_epochs=40,
        pretrain_batch=4,
        finetune_batch=4,
        dims=ModelDims(layers=2, hidden=32, heads=4, max_len=24),
        bpe_merges=40,
    )
    base.update(overrides)
    return TrainConfig(**base)


def test_gradient_sanity_loss_decreases_monotonically():
    # single repeated batch, lr 5e-5, dropout off: 10 strictly decreasing steps
    torch.manual_seed(0)
    subwords = SubwordVocab.train((t for s in TINY for t in s.tokens), 40)
    labels = tt.label_vocabulary(TINY)
    label_ids = {lab: i for i, lab in enumerate(labels)}
    dims = ModelDims(layers=2, hidden=32, heads=4, max_len=24, dropout=0.0)
    model = Tagger(subwords.size, dims, len(labels))
    optimizer = torch.optim.Adam(model.parameters(), lr=5e-5)
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)
    batch = encode_batch(TINY, subwords, label_ids, dims.max_len)
    losses = []
    for _ in range(10):
        optimizer.zero_grad()
        loss = loss_fn(model(batch.ids, batch.mask).flatten(0, 1), batch.targets.flatten())
        losses.append(float(loss.detach()))
        loss.backward()
        optimizer.step()
    assert all(a > b for a, b in zip(losses, losses[1:])), losses


def test_pretrain_overfits_two_sentences(tmp_path):
    corpus = tmp_path / "two.conll"
    tt.write_conll(TINY, corpus)
    config = _tiny_config(val_ratio=0.5)
    _, report = pretrain(corpus, config, seed=3)
    assert report["history"][-1]["train_loss"] < report["initial_val_loss"]


def test_pretrain_deterministic_across_runs(tmp_path):
    corpus = tmp_path / "two.conll"
    tt.write_conll(TINY * 5, corpus)
    config = _tiny_config(pretrain_epochs=3, val_ratio=0.2)
    _, r1 = pretrain(corpus, config, seed=9)
    _, r2 = pretrain(corpus, config, seed=9)
    assert r1["history"] == r2["history"]
    assert r1["best_val_loss"] == r2["best_val_loss"]


def test_pretrain_on_fixture_corpus_validates(pretrained):
    checkpoint, report = pretrained
    assert report["best_val_loss"] < report["initial_val_loss"]
    assert report["val_f1"] > 0.0
    assert len(checkpoint.label_vocab) % 2 == 1  # O plus B/I pairs


def test_checkpoint_roundtrip(tmp_path, pretrained):
    checkpoint, _ = pretrained
    path = tmp_path / "ckpt.pt"
    checkpoint.save(path)
    loaded = Checkpoint.load(path)
    assert loaded.label_vocab == checkpoint.label_vocab
    assert loaded.dims == checkpoint.dims
    for key, tensor in checkpoint.encoder_state.items():
        assert torch.equal(loaded.encoder_state[key], tensor)


def test_finetune_head_shape_and_encoder_init(pretrained, train_config):
    checkpoint, _ = pretrained
    subwords = SubwordVocab.from_state(checkpoint.subwords_state)
    config = _tiny_config(finetune_epochs=1, dims=checkpoint.dims)
    model, scores, label_vocab = finetune(
        checkpoint, TINY, TINY, config, seed=11, subwords=subwords
    )
    assert model.head.out_features == len(label_vocab) == 2 * 2 + 1
    assert scores is not None
    # encoder started from the checkpoint: same fingerprint before any step
    fresh = Tagger(subwords.size, checkpoint.dims, 3)
    fresh.encoder.load_state_dict(checkpoint.encoder_state)
    assert encoder_fingerprint(fresh) == _fingerprint_of_state(checkpoint)


def _fingerprint_of_state(checkpoint):
    probe = Tagger(
        SubwordVocab.from_state(checkpoint.subwords_state).size,
        checkpoint.dims,
        len(checkpoint.label_vocab),
    )
    probe.encoder.load_state_dict(checkpoint.encoder_state)
    return encoder_fingerprint(probe)


def test_finetune_overfit_sanity_small():
    subwords = SubwordVocab.train((t for s in TINY for t in s.tokens), 40)
    config = _tiny_config()
    _, scores, _ = finetune(None, TINY, TINY, config, seed=1, subwords=subwords)
    assert scores.f1 == 1.0


def test_predictions_are_valid_bio(pretrained, corpus_files, train_config):
    from tinytagger.train import predict_labels
    from tinytagger.scoring import fix_bio

    checkpoint, _ = pretrained
    subwords = SubwordVocab.from_state(checkpoint.subwords_state)
    _, _, test_path = corpus_files
    test = tt.read_conll(test_path)[:50]
    model = Tagger(subwords.size, checkpoint.dims, len(checkpoint.label_vocab))
    model.encoder.load_state_dict(checkpoint.encoder_state)
    model.head.load_state_dict(checkpoint.head_state)
    pred, _repairs = predict_labels(
        model, test, subwords, checkpoint.label_vocab, checkpoint.dims.max_len
    )
    for sentence, labels in zip(test, pred):
        assert len(labels) == len(sentence.tokens)  # one label per token
        assert fix_bio(labels)[1] == 0  # already repaired inside


def test_first_subword_rule_masks_continuations(pretrained):
    # loss targets exist only at first-subword positions, and predictions
    # come back one per original token regardless of subword count
    checkpoint, _ = pretrained
    subwords = SubwordVocab.from_state(checkpoint.subwords_state)
    label_ids = {lab: i for i, lab in enumerate(checkpoint.label_vocab)}
    multi = [Sentence(["extraordinarily", "unbelievable"], ["B-person", "O"])]
    batch = encode_batch(multi, subwords, label_ids, checkpoint.dims.max_len)
    n_targets = int((batch.targets != IGNORE_INDEX).sum())
    assert n_targets == len(multi[0].tokens)


def test_source_equals_target_degenerate(pretrained, train_config):
    checkpoint, _ = pretrained
    subwords = SubwordVocab.from_state(checkpoint.subwords_state)
    config = _tiny_config(finetune_epochs=30, dims=checkpoint.dims)
    scores = run_source_target(
        checkpoint, TINY, TINY, TINY, config, seed=7, subwords=subwords
    )
    assert scores.f1 >= 0.9  # behaves like longer single-stage tuning


def test_source_then_target_beats_target_only(pretrained, corpus_files, train_config):
    # directional, paired over the 5 seeds, from-scratch models so the
    # source stage is the only difference
    checkpoint, _ = pretrained
    subwords = SubwordVocab.from_state(checkpoint.subwords_state)
    _, pool_path, test_path = corpus_files
    pool = tt.read_conll(pool_path)
    source = pool[100:300]
    target_train = pool[:30]
    test = tt.read_conll(test_path)[:120]
    config = _tiny_config(
        finetune_epochs=12, finetune_batch=16, dims=checkpoint.dims, bpe_merges=300
    )
    two_stage = []
    target_only = []
    for seed in config.seeds:
        scores = run_source_target(
            None, source, target_train, test, config, seed, subwords
        )
        two_stage.append(scores.f1)
        _, direct, _ = finetune(None, target_train, test, config, seed, subwords)
        target_only.append(direct.f1)
    assert sum(two_stage) / 5 >= sum(target_only) / 5, (two_stage, target_only)


def test_fewshot_sweep_table(pretrained, corpus_files, train_config):
    checkpoint, _ = pretrained
    subwords = SubwordVocab.from_state(checkpoint.subwords_state)
    _, pool_path, test_path = corpus_files
    pool = tt.read_conll(pool_path)
    test = tt.read_conll(test_path)[:60]
    config = _tiny_config(finetune_epochs=3, dims=checkpoint.dims)
    rng = np.random.default_rng(0)
    subsets = {
        size: {
            seed: [pool[i] for i in rng.choice(len(pool), size, replace=False)]
            for seed in config.seeds
        }
        for size in (5, 10, 15)
    }
    rows = fewshot_sweep(checkpoint, subsets, test, config, subwords)
    assert [size for size, _ in rows] == [5, 10, 15]
    assert all(0.0 <= f1 <= 1.0 for _, f1 in rows)
    # same subsets and seeds -> identical table
    again = fewshot_sweep(
        checkpoint, {5: subsets[5]}, test, config, subwords
    )
    assert again[0] == rows[0]


def test_export_embeddings(tmp_path, pretrained, corpus_files):
    checkpoint, _ = pretrained
    _, _, test_path = corpus_files
    test = tt.read_conll(test_path)[:20]
    out = tmp_path / "vectors.tsv"
    n = export_entity_embeddings(checkpoint, test, out)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == n > 0
    category, _, vector = lines[0].partition("\t")
    assert category and len(vector.split()) == checkpoint.dims.hidden


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(seeds=(1, 2, 3))
    with pytest.raises(ValueError):
        TrainConfig(mode="bogus")
