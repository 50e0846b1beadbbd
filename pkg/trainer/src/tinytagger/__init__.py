"""tinytagger: a CPU-scale harness for tagging-head pre-training.

Pre-trains a small transformer tagger on a weakly-labeled corpus, then
swaps the tagging head and fine-tunes on a target label set, so the
value of corpus-based pre-training can be measured directionally.
"""

from .bpe import SubwordVocab
from .data import Sentence, label_vocabulary, read_conll, write_conll
from .model import Encoder, ModelDims, Tagger, encoder_fingerprint
from .scoring import Scores, decode_spans, fix_bio, span_scores
from .train import (
    Checkpoint,
    TrainConfig,
    export_entity_embeddings,
    fewshot_sweep,
    finetune,
    pretrain,
    run_source_target,
)

__version__ = "0.1.0"
