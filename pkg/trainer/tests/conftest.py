"""Session fixtures: a weakly-labeled corpus built by the corpus
pipeline's CLI (the only interface this package consumes), plus a
coarse-labeled target domain derived from its merged export."""

from __future__ import annotations

import random
import subprocess
import sys

import pytest

import tinytagger as tt
from tinytagger.model import ModelDims
from tinytagger.train import TrainConfig, pretrain

# compact synthetic world: entity names carry a category-specific stem,
# so weak labels are learnable at toy scale
_CATEGORIES = [
    ("city", 220), ("person", 200), ("company", 160), ("river", 90),
    ("album", 70), ("award", 40), ("poet", 25), ("museum", 15), ("volcano", 8),
]
_SYLLABLES = ["ba", "ce", "di", "fo", "gu", "ha", "ji", "ko", "lu", "ma", "ne", "or"]
_FILLER = (
    "meanwhile the record shows that during the long season many visitors "
    "arrived and several reports were written about the region"
).split()


def _pseudo(rng):
    return "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 4))).capitalize()


def _write_world(xml_path, ontology_path, target_bytes, seed=424242):
    rng = random.Random(seed)
    indexed = [
        (f"{cat.capitalize()} {_pseudo(rng)}{i}", cat)
        for cat, n in _CATEGORIES
        for i in range(n)
    ]
    unindexed = [f"Obscure {_pseudo(rng)}{i}" for i in range(300)]
    with open(ontology_path, "w", encoding="utf-8") as f:
        for name, cat in indexed:
            f.write(f"{name}\t{cat}\n")
    with open(xml_path, "w", encoding="utf-8") as f:
        f.write('<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/">\n')
        written = 0
        page_id = 0
        while written < target_bytes:
            page_id += 1
            sentences = []
            for _ in range(rng.randint(8, 24)):
                parts = ["The story of"]
                for k in range(rng.randint(1, 4)):
                    name = (
                        rng.choice(indexed)[0]
                        if rng.random() < 0.6
                        else rng.choice(unindexed)
                    )
                    parts.append(f"[[{name}]]")
                    if rng.random() < 0.5:
                        parts.append(rng.choice(["and", "near", "with"]))
                parts.extend(rng.sample(_FILLER, rng.randint(2, 5)))
                sentences.append(" ".join(parts) + ".")
            body = " ".join(sentences)
            page = (
                f"  <page><title>Page {page_id}</title><ns>0</ns><id>{page_id}</id>"
                f'<revision><id>1{page_id}</id><text xml:space="preserve">{body}</text>'
                "</revision></page>\n"
            )
            f.write(page)
            written += len(page)
        f.write("</mediawiki>\n")


def run_pipeline_cli(*argv) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "anchorner.cli", *map(str, argv)],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def corpus_files(tmp_path_factory):
    """Pipeline outputs: (pretraining corpus, target pool, target test)."""
    root = tmp_path_factory.mktemp("world")
    xml = root / "dump.xml"
    ontology = root / "ontology.tsv"
    _write_world(xml, ontology, target_bytes=400_000)
    out = root / "out"
    result = run_pipeline_cli(
        "all", "--dump", xml, "--ontology", ontology, "--output-dir", out, "--seed", 5
    )
    assert result.returncode == 0, result.stderr

    # target domain: the coarse-merged corpus, deduplicated, split test/pool
    merged = tt.read_conll(out / "merged_4types.conll")
    seen = set()
    unique = []
    for s in merged:
        key = tuple(s.tokens)
        if key not in seen:
            seen.add(key)
            unique.append(s)
    test, pool = unique[:250], unique[250:]
    pool_path = root / "target_pool.conll"
    test_path = root / "target_test.conll"
    tt.write_conll(pool, pool_path)
    tt.write_conll(test, test_path)
    return out / "balanced.conll", pool_path, test_path


@pytest.fixture(scope="session")
def train_config():
    # lr above the 5e-5 default so toy-scale runs converge in seconds
    return TrainConfig(
        learning_rate=1e-3,
        pretrain_epochs=3,
        finetune_epochs=25,
        dims=ModelDims(layers=2, hidden=128, heads=4, max_len=48),
        bpe_merges=300,
    )


@pytest.fixture(scope="session")
def pretrained(corpus_files, train_config):
    corpus_path, _, _ = corpus_files
    checkpoint, report = pretrain(corpus_path, train_config, seed=1)
    return checkpoint, report
