"""Rule-based sentence segmentation and tokenization.

A boundary is a ``.``, ``!`` or ``?`` followed by whitespace and an
uppercase letter or digit, suppressed inside anchors and after known
abbreviations. Newlines in the plain text (paragraph joins) are hard
boundaries. Anchors are never split across sentences.
"""

from __future__ import annotations

import string
from pathlib import Path

from .types import AnchorSpan, Article, RawSentence, Token

DEFAULT_ABBREVIATIONS = frozenset(
    {
        "Mr.", "Mrs.", "Dr.", "St.", "U.S.", "e.g.", "i.e.", "etc.",
        "vs.", "Jr.", "Sr.", "Prof.",
    }
)

_TERMINALS = frozenset(".!?")
_PUNCT = frozenset(string.punctuation) | frozenset("«»“”‘’„‚…–—·¡¿")


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """One abbreviation per line, '#' comments allowed."""
    abbrevs = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                abbrevs.add(line)
    return frozenset(abbrevs)


def tokenize(text: str) -> list[Token]:
    """Whitespace split, then detach leading/trailing punctuation.

    A final period stays attached when the token already contains an
    internal one ("U.S." survives; "end." does not).
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        j = i
        while j < n and not text[j].isspace():
            j += 1
        lo, hi = i, j
        while lo < hi and text[lo] in _PUNCT:
            tokens.append(Token(text[lo], lo, lo + 1))
            lo += 1
        trailing: list[Token] = []
        while hi > lo and text[hi - 1] in _PUNCT:
            if text[hi - 1] == "." and "." in text[lo : hi - 1]:
                break
            trailing.append(Token(text[hi - 1], hi - 1, hi))
            hi -= 1
        if hi > lo:
            tokens.append(Token(text[lo:hi], lo, hi))
        tokens.extend(reversed(trailing))
        i = j
    return tokens


def _word_before(text: str, dot_pos: int) -> str:
    start = dot_pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start : dot_pos + 1]
    return word.lstrip("".join(c for c in word if c in _PUNCT and c != "."))


def _boundaries(
    text: str, anchors: list[AnchorSpan], abbreviations: frozenset[str]
) -> list[int]:
    """Positions where a new sentence starts (first char of the sentence)."""
    starts = []
    anchor_idx = 0
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            k = i + 1
            while k < n and text[k].isspace():
                k += 1
            if k < n:
                starts.append(k)
            i = k if k > i else i + 1
            continue
        if ch in _TERMINALS:
            while anchor_idx < len(anchors) and anchors[anchor_idx].end <= i:
                anchor_idx += 1
            inside = (
                anchor_idx < len(anchors)
                and anchors[anchor_idx].start <= i < anchors[anchor_idx].end
            )
            if not inside:
                j = i + 1
                if j < n and text[j].isspace() and text[j] != "\n":
                    k = j
                    while k < n and text[k].isspace() and text[k] != "\n":
                        k += 1
                    nxt = text[k] if k < n else ""
                    if nxt and (nxt.isupper() or nxt.isdigit()):
                        suppressed = (
                            ch == "."
                            and _word_before(text, i) in abbreviations
                        )
                        if not suppressed:
                            starts.append(k)
        i += 1
    return starts


def split_sentences(
    article: Article, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[RawSentence]:
    """Segment an article into tokenized sentences with aligned anchors."""
    text = article.plain_text
    if not text.strip():
        return []
    starts = [0] + _boundaries(text, article.anchors, abbreviations)
    ranges = []
    for idx, s in enumerate(starts):
        e = starts[idx + 1] if idx + 1 < len(starts) else len(text)
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            ranges.append((s, e))

    sentences: list[RawSentence] = []
    for sent_idx, (s, e) in enumerate(ranges):
        sent_text = text[s:e]
        tokens = tokenize(sent_text)
        local = [
            AnchorSpan(a.start - s, a.end - s, a.surface, a.target)
            for a in article.anchors
            if a.start >= s and a.end <= e
        ]
        aligned = _align_anchors(sent_text, tokens, local)
        sentences.append(
            RawSentence(
                article_id=article.article_id,
                sentence_index=sent_idx,
                text=sent_text,
                tokens=tokens,
                anchors=aligned,
            )
        )
    return sentences


def _align_anchors(
    text: str, tokens: list[Token], anchors: list[AnchorSpan]
) -> list[AnchorSpan]:
    """Snap anchor edges outward to token boundaries.

    BIO labels are token-granular, so a boundary falling mid-token expands
    the anchor to cover the whole token. If expansion makes two anchors
    collide, the later one is dropped.
    """
    if not tokens:
        return []
    aligned: list[AnchorSpan] = []
    last_end = 0
    for a in anchors:
        start, end = a.start, a.end
        for tok in tokens:
            if tok.start <= start < tok.end:
                start = tok.start
            if tok.start < end <= tok.end:
                end = tok.end
            if tok.start >= end:
                break
        if start < last_end:
            continue
        aligned.append(AnchorSpan(start, end, text[start:end], a.target))
        last_end = end
    return aligned
