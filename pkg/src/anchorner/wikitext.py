"""Wikitext markup stripping and anchor extraction.

Converts raw page markup into plain text plus the hyperlink spans found
in it. Full wikitext fidelity (template expansion, parser functions,
rendered HTML) is out of scope; the goal is clean prose with accurate
anchor offsets.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass

from .types import AnchorSpan

# section titles whose content is link lists rather than prose
DEFAULT_SKIP_SECTIONS = frozenset({"references", "external links", "see also"})

# link targets in these namespaces are media/bookkeeping, not entities
DROP_NAMESPACES = frozenset({"file", "image", "media", "category"})

_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_REF_RE = re.compile(
    r"<ref\b[^<>]*/\s*>|<ref\b[^<>]*>.*?</ref\s*>", re.DOTALL | re.IGNORECASE
)
_OPAQUE_TAG_RE = re.compile(
    r"<(math|gallery|timeline|score|syntaxhighlight|source|imagemap|hiero|chem)\b[^<>]*>"
    r".*?</\1\s*>",
    re.DOTALL | re.IGNORECASE,
)
_MAGIC_WORD_RE = re.compile(r"__[A-Z]+__")
_HTML_TAG_RE = re.compile(r"</?[A-Za-z][^<>]*>")
_HEADING_RE = re.compile(r"^(={2,6})\s*(.*?)\s*=*\s*$")
_LIST_MARKER_RE = re.compile(r"^[*#;:]+\s*")
_EXTERNAL_LINK_RE = re.compile(r"\[(?:https?|ftp)://[^\s\]]*(?:\s+([^\]]*))?\]")
_BARE_URL_RE = re.compile(r"(?:https?|ftp)://[^\s<>\[\]]+")
_QUOTES_RE = re.compile(r"'{2,}")
_HRULE_RE = re.compile(r"^-{4,}\s*$")


@dataclass
class StripTally:
    """Counts of markup defects encountered while stripping."""

    malformed: int = 0

    def merge(self, other: "StripTally") -> None:
        self.malformed += other.malformed


def _strip_templates(text: str, tally: StripTally) -> str:
    """Remove {{...}} constructs, honoring nesting.

    An opener with no matching close is stripped to the end of its line.
    """
    out: list[str] = []
    pos = 0
    n = len(text)
    while True:
        start = text.find("{{", pos)
        if start < 0:
            out.append(text[pos:])
            break
        out.append(text[pos:start])
        depth = 1
        i = start + 2
        while i < n and depth > 0:
            if text.startswith("{{", i):
                depth += 1
                i += 2
            elif text.startswith("}}", i):
                depth -= 1
                i += 2
            else:
                i += 1
        if depth > 0:
            tally.malformed += 1
            eol = text.find("\n", start)
            pos = n if eol < 0 else eol
        else:
            pos = i
    return "".join(out)


def _strip_tables(text: str, tally: StripTally) -> str:
    """Remove {| ... |} table constructs, honoring nesting."""
    out: list[str] = []
    pos = 0
    n = len(text)
    while True:
        start = text.find("{|", pos)
        if start < 0:
            out.append(text[pos:])
            break
        out.append(text[pos:start])
        depth = 1
        i = start + 2
        while i < n and depth > 0:
            if text.startswith("{|", i):
                depth += 1
                i += 2
            elif text.startswith("|}", i):
                depth -= 1
                i += 2
            else:
                i += 1
        if depth > 0:
            # tables are block constructs; an unterminated one eats the rest
            tally.malformed += 1
            pos = n
        else:
            pos = i
    return "".join(out)


def _clean_lines(text: str, skip_sections: frozenset[str]) -> list[list[str]]:
    """Line-structure pass: headings, section skipping, list markers.

    Returns paragraphs as lists of cleaned lines. Consecutive prose lines
    form one paragraph; list items stay separate so they do not glue into
    fake sentences.
    """
    paragraphs: list[list[str]] = []
    current: list[str] = []
    skip_level = 0  # >0 while inside a skipped section

    def flush() -> None:
        if current:
            paragraphs.append(list(current))
            current.clear()

    for line in text.split("\n"):
        heading = _HEADING_RE.match(line)
        if heading:
            flush()
            level = len(heading.group(1))
            if skip_level and level <= skip_level:
                skip_level = 0
            title = heading.group(2).strip().lower()
            if title in skip_sections:
                skip_level = level
            continue
        if skip_level:
            continue
        if _HRULE_RE.match(line):
            flush()
            continue
        is_item = bool(_LIST_MARKER_RE.match(line))
        line = _LIST_MARKER_RE.sub("", line)
        line = _EXTERNAL_LINK_RE.sub(lambda m: m.group(1) or "", line)
        line = _BARE_URL_RE.sub("", line)
        line = _QUOTES_RE.sub("", line)
        line = html.unescape(line)
        line = " ".join(line.split())
        if not line:
            flush()
            continue
        if is_item:
            flush()
            paragraphs.append([line])
        else:
            current.append(line)
    flush()
    return paragraphs


_NESTED_LINK_RE = re.compile(r"\[\[([^\[\]|]*)(?:\|([^\[\]]*))?\]\]")


def _flatten_nested(surface: str) -> str:
    # nested links collapse to their visible text; outer link wins
    return _NESTED_LINK_RE.sub(lambda m: (m.group(2) or m.group(1)).strip(), surface)


def _clean_target(raw: str) -> str:
    target = raw.strip().lstrip(":").strip()
    frag = target.find("#")
    if frag >= 0:
        target = target[:frag].strip()
    return target


def _emit_plain(segment: str, out: list[str], tally: StripTally) -> None:
    if "]]" in segment:
        tally.malformed += segment.count("]]")
        segment = segment.replace("]]", "")
    out.append(segment)


def _extract_line_links(
    line: str, tally: StripTally
) -> tuple[str, list[AnchorSpan]]:
    """Resolve [[...]] constructs in one line; links never span lines."""
    out: list[str] = []
    anchors: list[AnchorSpan] = []
    length = 0

    def push(segment: str) -> None:
        nonlocal length
        if segment:
            out.append(segment)
            length += len(segment)

    pos = 0
    n = len(line)
    while True:
        start = line.find("[[", pos)
        if start < 0:
            seg: list[str] = []
            _emit_plain(line[pos:], seg, tally)
            push("".join(seg))
            break
        seg = []
        _emit_plain(line[pos:start], seg, tally)
        push("".join(seg))
        # find the matching ]], tolerating nesting in the label
        depth = 1
        i = start + 2
        while i < n and depth > 0:
            if line.startswith("[[", i):
                depth += 1
                i += 2
            elif line.startswith("]]", i):
                depth -= 1
                i += 2
            else:
                i += 1
        if depth > 0:
            tally.malformed += 1
            break  # unbalanced: greedy strip to end of line
        inner = line[start + 2 : i - 2]
        pipe = inner.find("|")
        if pipe >= 0:
            target_raw, surface_raw = inner[:pipe], inner[pipe + 1 :]
        else:
            target_raw = surface_raw = inner
        target = _clean_target(_flatten_nested(target_raw))
        surface = _flatten_nested(surface_raw).strip()
        if not surface:
            surface = target
        ns = target.split(":", 1)[0].strip().lower() if ":" in target else None
        if ns in DROP_NAMESPACES:
            pos = i
            continue
        if not target or not surface:
            push(surface)
            pos = i
            continue
        anchors.append(
            AnchorSpan(start=length, end=length + len(surface), surface=surface, target=target)
        )
        push(surface)
        pos = i
    return "".join(out), anchors


def _extract_paragraph_links(
    lines: list[str], tally: StripTally
) -> tuple[str, list[AnchorSpan]]:
    """Join a paragraph's lines with single spaces, collecting anchors."""
    pieces: list[str] = []
    anchors: list[AnchorSpan] = []
    offset = 0
    for line in lines:
        raw, lanchors = _extract_line_links(line, tally)
        ltext = raw.strip()
        if not ltext:
            continue
        lead = len(raw) - len(raw.lstrip())
        if pieces:
            offset += 1  # joining space
        anchors.extend(
            AnchorSpan(a.start - lead + offset, a.end - lead + offset, a.surface, a.target)
            for a in lanchors
        )
        pieces.append(ltext)
        offset += len(ltext)
    return " ".join(pieces), anchors


def extract_anchors(
    wikitext: str,
    tally: StripTally | None = None,
    skip_sections: frozenset[str] = DEFAULT_SKIP_SECTIONS,
) -> tuple[str, list[AnchorSpan]]:
    """Strip markup from ``wikitext``; return plain text and its anchors.

    ``[[T]]`` links to T with surface T; ``[[T|S]]`` links to T with
    surface S. Templates, references, tables, media/category links, and
    residual markup are removed. Anchor offsets index the returned text;
    anchors come back sorted and non-overlapping.
    """
    if tally is None:
        tally = StripTally()
    text = _COMMENT_RE.sub("", wikitext)
    text = _REF_RE.sub("", text)
    text = _OPAQUE_TAG_RE.sub("", text)
    text = _MAGIC_WORD_RE.sub("", text)
    text = _strip_templates(text, tally)
    text = _strip_tables(text, tally)
    text = _HTML_TAG_RE.sub("", text)

    pieces: list[str] = []
    anchors: list[AnchorSpan] = []
    offset = 0
    for paragraph_lines in _clean_lines(text, skip_sections):
        ptext, panchors = _extract_paragraph_links(paragraph_lines, tally)
        if not ptext:
            continue
        if pieces:
            offset += 1  # the joining newline
        pieces.append(ptext)
        anchors.extend(
            AnchorSpan(a.start + offset, a.end + offset, a.surface, a.target)
            for a in panchors
        )
        offset += len(ptext)
    return "\n".join(pieces), anchors
