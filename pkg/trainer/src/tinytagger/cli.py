"""Command-line entry points mirroring the training operations.

Reads CoNLL files produced by the corpus pipeline; prints evaluation
summaries in the pipeline's machine-readable format.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bpe import SubwordVocab
from .data import read_conll
from .model import ModelDims
from .train import (
    Checkpoint,
    TrainConfig,
    export_entity_embeddings,
    finetune,
    fewshot_sweep,
    pretrain,
    run_source_target,
)


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--learning-rate", type=float, default=None)
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--batch", type=int, default=None)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--hidden", type=int, default=128)
    parser.add_argument("--heads", type=int, default=4)
    parser.add_argument("--max-len", type=int, default=64)
    parser.add_argument("--seed", type=int, default=11)


def _config(args: argparse.Namespace) -> TrainConfig:
    config = TrainConfig(
        dims=ModelDims(
            layers=args.layers, hidden=args.hidden,
            heads=args.heads, max_len=args.max_len,
        )
    )
    if args.learning_rate is not None:
        config.learning_rate = args.learning_rate
    if args.epochs is not None:
        config.pretrain_epochs = args.epochs
        config.finetune_epochs = args.epochs
    if args.batch is not None:
        config.pretrain_batch = args.batch
        config.finetune_batch = args.batch
    return config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tinytagger",
        description="Toy-scale tagging pre-training and head-swap fine-tuning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pre = sub.add_parser("pretrain", help="train a tagger on a generated corpus")
    p_pre.add_argument("corpus", help="CoNLL corpus from the pipeline")
    p_pre.add_argument("checkpoint", help="output checkpoint path")
    _add_train_flags(p_pre)

    p_ft = sub.add_parser("finetune", help="head-swap fine-tune on a target dataset")
    p_ft.add_argument("train", help="target-domain training CoNLL")
    p_ft.add_argument("test", help="target-domain test CoNLL")
    p_ft.add_argument("--checkpoint", help="pre-trained checkpoint (omit: from scratch)")
    p_ft.add_argument("--save", help="write the fine-tuned checkpoint here")
    _add_train_flags(p_ft)

    p_st = sub.add_parser("source-target", help="train on source, then fine-tune on target")
    p_st.add_argument("source", help="source-domain training CoNLL")
    p_st.add_argument("train", help="target-domain training CoNLL")
    p_st.add_argument("test", help="target-domain test CoNLL")
    p_st.add_argument("--checkpoint", help="pre-trained checkpoint (omit: from scratch)")
    _add_train_flags(p_st)

    p_fs = sub.add_parser("fewshot-sweep", help="mean F1 per subset size over 5 seeds")
    p_fs.add_argument("checkpoint")
    p_fs.add_argument("test")
    p_fs.add_argument(
        "--subset", action="append", required=True, metavar="SIZE:SEED:PATH",
        help="training subset cell; repeat for each (size, seed)",
    )
    _add_train_flags(p_fs)

    p_emb = sub.add_parser("export-embeddings", help="entity vectors, line-delimited")
    p_emb.add_argument("checkpoint")
    p_emb.add_argument("corpus")
    p_emb.add_argument("output")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (OSError, ValueError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    command = args.command
    if command == "pretrain":
        config = _config(args)
        checkpoint, report = pretrain(args.corpus, config, seed=args.seed)
        checkpoint.save(args.checkpoint)
        print(json.dumps({"best_val_loss": report["best_val_loss"]}))
    elif command == "finetune":
        config = _config(args)
        checkpoint = Checkpoint.load(args.checkpoint) if args.checkpoint else None
        train_sentences = read_conll(args.train)
        test_sentences = read_conll(args.test)
        subwords = _subwords_for(checkpoint, train_sentences, test_sentences, config)
        model, scores, label_vocab = finetune(
            checkpoint, train_sentences, test_sentences, config, args.seed, subwords
        )
        if args.save:
            _save_model(model, label_vocab, subwords, config, args.save)
        print(scores.summary_line())
    elif command == "source-target":
        config = _config(args)
        checkpoint = Checkpoint.load(args.checkpoint) if args.checkpoint else None
        source = read_conll(args.source)
        train_sentences = read_conll(args.train)
        test_sentences = read_conll(args.test)
        subwords = _subwords_for(
            checkpoint, source + train_sentences, test_sentences, config
        )
        scores = run_source_target(
            checkpoint, source, train_sentences, test_sentences,
            config, args.seed, subwords,
        )
        print(scores.summary_line())
    elif command == "fewshot-sweep":
        config = _config(args)
        checkpoint = Checkpoint.load(args.checkpoint)
        subwords = SubwordVocab.from_state(checkpoint.subwords_state)
        test_sentences = read_conll(args.test)
        subsets: dict[int, dict[int, list]] = {}
        for cell in args.subset:
            size_str, seed_str, path = cell.split(":", 2)
            subsets.setdefault(int(size_str), {})[int(seed_str)] = read_conll(path)
        for size, cells in subsets.items():
            missing = set(config.seeds) - set(cells)
            if missing:
                raise ValueError(f"size {size}: missing subsets for seeds {sorted(missing)}")
        for size, mean_f1 in fewshot_sweep(
            checkpoint, subsets, test_sentences, config, subwords
        ):
            print(f"size={size} mean_f1={mean_f1:.6f}")
    elif command == "export-embeddings":
        checkpoint = Checkpoint.load(args.checkpoint)
        n = export_entity_embeddings(checkpoint, read_conll(args.corpus), args.output)
        print(f"wrote {n} vectors to {args.output}")
    return 0


def _subwords_for(checkpoint, train_sentences, test_sentences, config) -> SubwordVocab:
    if checkpoint is not None:
        return SubwordVocab.from_state(checkpoint.subwords_state)
    tokens = (t for s in train_sentences + test_sentences for t in s.tokens)
    return SubwordVocab.train(tokens, config.bpe_merges)


def _save_model(model, label_vocab, subwords, config, path) -> None:
    import copy

    Checkpoint(
        encoder_state=copy.deepcopy(model.encoder.state_dict()),
        head_state=copy.deepcopy(model.head.state_dict()),
        label_vocab=label_vocab,
        subwords_state=subwords.state(),
        dims=model.encoder.dims,
        config_digest=config.digest(),
    ).save(path)


if __name__ == "__main__":
    sys.exit(main())
