"""anchorner: weakly-labeled NER corpora from Wikipedia dumps.

Anchored spans become entity mentions, an entity-type mapping assigns
categories (with an ENTITY fallback), and filtering plus count^alpha
resampling shape the result into a trainable, category-balanced corpus.
"""

from .types import (
    ENTITY_LABEL,
    AnchorSpan,
    Article,
    CategoryStats,
    RawSentence,
    Span,
    TaggedSentence,
    Token,
)
from .ontology import CategoryVocabulary, OntologyIndex, load_ontology, normalize_title
from .tagger import encode_spans, spans_of, tag_sentence
from .wikitext import extract_anchors
from .wikixml import stream_articles
from .sentences import split_sentences, tokenize
from .evaluation import EvalReport, repair_bio, span_f1

__version__ = "0.1.0"

__all__ = [
    "ENTITY_LABEL",
    "AnchorSpan",
    "Article",
    "CategoryStats",
    "CategoryVocabulary",
    "EvalReport",
    "OntologyIndex",
    "RawSentence",
    "Span",
    "TaggedSentence",
    "Token",
    "encode_spans",
    "extract_anchors",
    "load_ontology",
    "normalize_title",
    "repair_bio",
    "span_f1",
    "spans_of",
    "split_sentences",
    "stream_articles",
    "tag_sentence",
    "tokenize",
]
