"""Small byte-pair subword vocabulary learned from a corpus.

Words split into characters with an end-of-word marker on the last one;
the most frequent adjacent pair merges, repeatedly, until the merge
budget is spent. Encoding applies the learned merges in order, so a
token always maps to one or more subword ids, the first of which is the
token's prediction position.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

PAD = "[PAD]"
UNK = "[UNK]"
_EOW = "▁"  # marks a word-final symbol


def _word_symbols(word: str) -> tuple[str, ...]:
    chars = list(word)
    chars[-1] = chars[-1] + _EOW
    return tuple(chars)


def _pair_counts(vocab: dict[tuple[str, ...], int]) -> Counter:
    pairs: Counter = Counter()
    for symbols, freq in vocab.items():
        for a, b in zip(symbols, symbols[1:]):
            pairs[(a, b)] += freq
    return pairs


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    merged = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            merged.append(symbols[i] + symbols[i + 1])
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return tuple(merged)


@dataclass
class SubwordVocab:
    merges: list[tuple[str, str]]
    id_of: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.id_of)

    @classmethod
    def train(cls, tokens: Iterable[str], n_merges: int = 400) -> "SubwordVocab":
        word_freq = Counter(tokens)
        vocab = {_word_symbols(w): f for w, f in word_freq.items() if w}
        merges: list[tuple[str, str]] = []
        for _ in range(n_merges):
            pairs = _pair_counts(vocab)
            if not pairs:
                break
            # deterministic: frequency, then lexicographic
            pair = max(pairs, key=lambda p: (pairs[p], p))
            if pairs[pair] < 2:
                break
            merges.append(pair)
            vocab = {_merge_word(s, pair): f for s, f in vocab.items()}
        # vocabulary = base characters plus every merge product, so any
        # segmentation of a word over seen characters stays in-vocabulary
        symbols = {PAD: 0, UNK: 1}
        for word in sorted(word_freq):
            for sym in _word_symbols(word):
                if sym not in symbols:
                    symbols[sym] = len(symbols)
        for a, b in merges:
            if a + b not in symbols:
                symbols[a + b] = len(symbols)
        return cls(merges=merges, id_of=symbols)

    @staticmethod
    def _segment(word: str, merges: list[tuple[str, str]]) -> tuple[str, ...]:
        symbols = _word_symbols(word)
        for pair in merges:
            if len(symbols) == 1:
                break
            symbols = _merge_word(symbols, pair)
        return symbols

    def encode_token(self, token: str) -> list[int]:
        if not token:
            return [self.id_of[UNK]]
        return [
            self.id_of.get(sym, self.id_of[UNK])
            for sym in self._segment(token, self.merges)
        ]

    def encode_sentence(
        self, tokens: list[str], max_len: int
    ) -> tuple[list[int], list[int]]:
        """Subword ids plus, per original token, its first-subword position.

        Tokens whose first subword would fall beyond ``max_len`` get
        position -1 (they cannot be predicted).
        """
        ids: list[int] = []
        firsts: list[int] = []
        for token in tokens:
            pieces = self.encode_token(token)
            firsts.append(len(ids) if len(ids) < max_len else -1)
            ids.extend(pieces)
        return ids[:max_len], firsts

    def state(self) -> dict:
        return {"merges": self.merges, "id_of": self.id_of}

    @classmethod
    def from_state(cls, state: dict) -> "SubwordVocab":
        merges = [tuple(m) for m in state["merges"]]
        return cls(merges=merges, id_of=dict(state["id_of"]))
