"""Streaming reader for MediaWiki "pages-articles" XML exports.

Feeds the dump through expat chunk by chunk, so memory stays bounded by
the largest single page rather than the dump size. The caller provides a
plain (already decompressed) byte stream or a path to one.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterator
from xml.parsers import expat

from .types import Article
from .wikitext import StripTally, extract_anchors

_CHUNK_SIZE = 1 << 16


class DumpParseError(Exception):
    """Malformed XML in the dump stream."""

    def __init__(self, message: str, byte_offset: int, line: int):
        super().__init__(f"{message} (byte offset {byte_offset}, line {line})")
        self.byte_offset = byte_offset
        self.line = line


@dataclass
class IngestTally:
    """Page-level accounting for one streaming pass."""

    pages_seen: int = 0
    articles_yielded: int = 0
    redirects_skipped: int = 0
    namespace_skipped: int = 0
    strip_failures: int = 0
    markup_malformed: int = 0
    dump_sha256: str = ""

    def as_dict(self) -> dict[str, int | str]:
        return {
            "pages_seen": self.pages_seen,
            "articles_yielded": self.articles_yielded,
            "redirects_skipped": self.redirects_skipped,
            "namespace_skipped": self.namespace_skipped,
            "strip_failures": self.strip_failures,
            "markup_malformed": self.markup_malformed,
            "dump_sha256": self.dump_sha256,
        }


@dataclass
class _Page:
    title: str = ""
    page_id: int | None = None
    ns: int = 0
    redirect: bool = False
    text_parts: list[str] = field(default_factory=list)


class _PageCollector:
    """Expat handler that accumulates completed <page> records."""

    def __init__(self) -> None:
        self.stack: list[str] = []
        self.page: _Page | None = None
        self.capture: list[str] | None = None
        self.done: list[tuple[str, int, int, bool, str]] = []

    def start(self, name: str, attrs: dict[str, str]) -> None:
        self.stack.append(name)
        if name == "page":
            self.page = _Page()
        elif self.page is not None:
            if name == "redirect" and self.stack[-2] == "page":
                self.page.redirect = True
            elif name == "title" and self.stack[-2] == "page":
                self.capture = []
            elif name == "ns" and self.stack[-2] == "page":
                self.capture = []
            elif name == "id" and self.stack[-2] == "page" and self.page.page_id is None:
                self.capture = []
            elif name == "text" and self.stack[-2] == "revision":
                self.capture = self.page.text_parts

    def end(self, name: str) -> None:
        if self.capture is not None and self.page is not None:
            captured = "".join(self.capture)
            if name == "title" and self.stack[-2] == "page":
                self.page.title = captured
            elif name == "ns" and self.stack[-2] == "page":
                try:
                    self.page.ns = int(captured)
                except ValueError:
                    self.page.ns = -1
            elif name == "id" and self.stack[-2] == "page":
                self.page.page_id = int(captured)
            if self.capture is not self.page.text_parts or name == "text":
                self.capture = None
        self.stack.pop()
        if name == "page" and self.page is not None:
            p = self.page
            self.done.append(
                (p.title, p.page_id if p.page_id is not None else -1, p.ns,
                 p.redirect, "".join(p.text_parts))
            )
            self.page = None

    def chars(self, data: str) -> None:
        if self.capture is not None:
            self.capture.append(data)

    def drain(self) -> list[tuple[str, int, int, bool, str]]:
        out = self.done
        self.done = []
        return out


def stream_pages(
    source: str | Path | BinaryIO, hasher=None
) -> Iterator[tuple[str, int, int, bool, str]]:
    """Yield (title, page_id, ns, is_redirect, wikitext) per page."""
    close = False
    if isinstance(source, (str, Path)):
        stream: BinaryIO = open(source, "rb")
        close = True
    else:
        stream = source
    collector = _PageCollector()
    parser = expat.ParserCreate()
    parser.buffer_text = True
    parser.StartElementHandler = collector.start
    parser.EndElementHandler = collector.end
    parser.CharacterDataHandler = collector.chars
    try:
        while True:
            chunk = stream.read(_CHUNK_SIZE)
            if hasher is not None and chunk:
                hasher.update(chunk)
            try:
                parser.Parse(chunk, not chunk)
            except expat.ExpatError as exc:
                raise DumpParseError(
                    expat.errors.messages[exc.code],
                    byte_offset=parser.ErrorByteIndex,
                    line=parser.ErrorLineNumber,
                ) from exc
            yield from collector.drain()
            if not chunk:
                break
    finally:
        if close:
            stream.close()


def stream_articles(
    source: str | Path | BinaryIO, tally: IngestTally | None = None
) -> Iterator[Article]:
    """Yield one ``Article`` per namespace-0 content page.

    Redirects and non-article namespaces are skipped; a page whose markup
    fails to strip is skipped and tallied, never fatal. The dump's sha256
    is recorded on the tally for the manifest.
    """
    if tally is None:
        tally = IngestTally()
    hasher = hashlib.sha256()
    for title, page_id, ns, redirect, wikitext in stream_pages(source, hasher):
        tally.pages_seen += 1
        if redirect:
            tally.redirects_skipped += 1
            continue
        if ns != 0:
            tally.namespace_skipped += 1
            continue
        strip_tally = StripTally()
        try:
            plain, anchors = extract_anchors(wikitext, strip_tally)
        except Exception:
            tally.strip_failures += 1
            continue
        tally.markup_malformed += strip_tally.malformed
        tally.articles_yielded += 1
        yield Article(
            title=title, article_id=page_id, plain_text=plain, anchors=anchors
        )
    tally.dump_sha256 = "sha256:" + hasher.hexdigest()
