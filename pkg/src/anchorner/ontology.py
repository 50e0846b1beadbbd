"""Entity-name to category index with a fixed category vocabulary.

The mapping source is line-delimited ``entity_name<TAB>category`` (UTF-8),
the shape produced by flattening a DBpedia instance-types distribution.
Titles are canonicalized aggressively (percent-decoding, underscore and
whitespace normalization, full case-folding) so that anchor targets with
cosmetic variation still resolve. Wiki redirects are NOT resolved: an
anchor pointing at a redirect page misses unless the mapping file already
contains the redirect title (substitute a redirect-expanded mapping to
change that).
"""

from __future__ import annotations

import urllib.parse
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

from .types import ENTITY_LABEL

__all__ = [
    "CategoryVocabulary",
    "OntologyIndex",
    "load_ontology",
    "normalize_title",
    "InvalidTitleError",
    "UnknownCategoryError",
    "VocabularyError",
]


class InvalidTitleError(ValueError):
    """Raised when a title normalizes to the empty string."""


class UnknownCategoryError(ValueError):
    """Raised in strict mode for categories outside the vocabulary."""


class VocabularyError(ValueError):
    """Raised when a category vocabulary violates its invariants."""


def normalize_title(raw: str) -> str:
    """Canonical lookup key: decoded, single-spaced, case-folded."""
    s = urllib.parse.unquote(raw)
    s = s.replace("_", " ")
    s = " ".join(s.split())
    s = s.casefold()
    if not s:
        raise InvalidTitleError(f"title {raw!r} is empty after normalization")
    return s


@dataclass(frozen=True)
class CategoryVocabulary:
    names: tuple[str, ...]
    _index: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise VocabularyError("duplicate category names")
        if self.names.count(ENTITY_LABEL) != 1:
            raise VocabularyError(f"vocabulary must contain {ENTITY_LABEL} exactly once")
        bad = [n for n in self.names if n != ENTITY_LABEL and n != n.lower()]
        if bad:
            raise VocabularyError(f"non-lowercase category names: {bad}")
        object.__setattr__(self, "_index", frozenset(self.names))

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    @classmethod
    def from_file(cls, path: str | Path) -> "CategoryVocabulary":
        with open(path, encoding="utf-8") as f:
            names = tuple(line.strip() for line in f if line.strip())
        return cls(names)

    @classmethod
    def bundled(cls) -> "CategoryVocabulary":
        text = resources.files("anchorner.data").joinpath("categories.txt").read_text("utf-8")
        return cls(tuple(line for line in text.splitlines() if line.strip()))


@dataclass
class OntologyIndex:
    """Immutable after load; safe for concurrent readers."""

    entries: dict[str, str]
    vocabulary: CategoryVocabulary
    collision_tally: int = 0
    remapped_tally: int = 0

    @property
    def entry_count(self) -> int:
        return len(self.entries)

    def lookup(self, target: str) -> str | None:
        try:
            key = normalize_title(target)
        except InvalidTitleError:
            return None
        return self.entries.get(key)


def _iter_records(
    source: str | Path | IO[str] | Iterable[tuple[str, str]]
) -> Iterator[tuple[str, str]]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            yield from _iter_lines(f)
    elif hasattr(source, "read"):
        yield from _iter_lines(source)
    else:
        yield from source


def _iter_lines(lines: Iterable[str]) -> Iterator[tuple[str, str]]:
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected entity<TAB>category, got {line!r}")
        yield parts[0], parts[1]


def load_ontology(
    mapping_source: str | Path | IO[str] | Iterable[tuple[str, str]],
    vocabulary: CategoryVocabulary | None = None,
    mode: str = "strict",
) -> OntologyIndex:
    """Load (entity, category) records into an index.

    Duplicate entities resolve first-wins and are tallied. In strict mode
    a category outside the vocabulary (or an explicit ``ENTITY`` row,
    which is reserved for unindexed anchors) aborts the load; in lenient
    mode it is remapped to ``ENTITY`` and tallied.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    if vocabulary is None:
        vocabulary = CategoryVocabulary.bundled()
    entries: dict[str, str] = {}
    collisions = 0
    remapped = 0
    for name, category in _iter_records(mapping_source):
        if category not in vocabulary or category == ENTITY_LABEL:
            if mode == "strict":
                raise UnknownCategoryError(
                    f"category {category!r} not allowed in strict mode"
                )
            category = ENTITY_LABEL
            remapped += 1
        key = normalize_title(name)
        if key in entries:
            collisions += 1
            continue
        entries[key] = category
    return OntologyIndex(
        entries=entries,
        vocabulary=vocabulary,
        collision_tally=collisions,
        remapped_tally=remapped,
    )
