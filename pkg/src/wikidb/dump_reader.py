"""Pull pages out of a MediaWiki XML export one at a time.

The reader feeds fixed-size chunks to expat and hands out each page as
soon as its closing tag is seen, so memory is bounded by the largest
page rather than the dump.
"""
from __future__ import annotations

import bz2
import logging
import re
import sys
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator
from xml.parsers import expat

from .wikitext import NAMESPACES

log = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 20
_REDIRECT_START = re.compile(r"\s*#redirect", re.I)
KEPT_NAMESPACES = frozenset({0, 14})

# Only needed for old dumps that carry no <ns> element.
_NS_KEYS = {
    "Talk": 1, "User": 2, "User talk": 3, "Wikipedia": 4, "Wikipedia talk": 5,
    "File": 6, "Image": 6, "File talk": 7, "MediaWiki": 8, "MediaWiki talk": 9,
    "Template": 10, "Template talk": 11, "Help": 12, "Help talk": 13,
    "Category": 14, "Category talk": 15, "Portal": 100, "Portal talk": 101,
    "Draft": 118, "Draft talk": 119, "Module": 828, "Module talk": 829,
}


class DumpError(Exception):
    """The dump could not be read; ``offset`` is a byte position when known."""

    def __init__(self, message: str, offset: int | None = None, source: str | None = None):
        self.offset = offset
        self.source = source
        where = []
        if source:
            where.append(source)
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


@dataclass(frozen=True, slots=True)
class PageRecord:
    page_id: int
    namespace: int
    title: str
    wikitext: str
    is_redirect: bool
    # title from the <redirect title="..."/> element, when the dump has one
    redirect_title: str | None = None


def _namespace_from_title(title: str) -> int:
    if ":" in title:
        canon = NAMESPACES.get(title.split(":", 1)[0].strip().lower())
        if canon is not None:
            return _NS_KEYS.get(canon, 0)
    return 0


class _PageBuilder:
    """expat callbacks that assemble PageRecords."""

    def __init__(self) -> None:
        self.stack: list[str] = []
        self.ready: deque[PageRecord] = deque()
        self.capture: list[str] | None = None
        self._reset()

    def _reset(self) -> None:
        self.fields: dict[str, str] = {}
        self.text: str = ""
        self.redirect_title: str | None = None
        self.has_redirect = False

    def start(self, name: str, attrs: dict[str, str]) -> None:
        name = name.rsplit(":", 1)[-1]
        parent = self.stack[-1] if self.stack else None
        self.stack.append(name)
        if name == "page":
            self._reset()
        elif parent == "page" and name in ("title", "ns", "id"):
            self.capture = []
        elif parent == "page" and name == "redirect":
            self.has_redirect = True
            self.redirect_title = attrs.get("title")
        elif parent == "revision" and name == "text":
            self.capture = []

    def end(self, name: str) -> None:
        name = name.rsplit(":", 1)[-1]
        self.stack.pop()
        parent = self.stack[-1] if self.stack else None
        if self.capture is not None:
            value = "".join(self.capture)
            self.capture = None
            if name == "text":
                self.text = value
            else:
                self.fields[name] = value
        if name == "page" and parent == "mediawiki":
            self.ready.append(self._finish())

    def data(self, chunk: str) -> None:
        if self.capture is not None:
            self.capture.append(chunk)

    def _finish(self) -> PageRecord:
        title = self.fields.get("title", "").strip()
        raw_id = self.fields.get("id", "").strip()
        if not title:
            raise ValueError("page without a title")
        try:
            page_id = int(raw_id)
        except ValueError:
            raise ValueError(f"page {title!r} has no usable <id>") from None
        if page_id <= 0:
            raise ValueError(f"page {title!r} has non-positive id {page_id}")
        ns_raw = self.fields.get("ns")
        namespace = int(ns_raw) if ns_raw not in (None, "") else _namespace_from_title(title)
        text = self.text
        is_redirect = self.has_redirect or _REDIRECT_START.match(text) is not None
        record = PageRecord(page_id, namespace, title, text, is_redirect, self.redirect_title)
        self._reset()
        return record


def _open_binary(path: str | Path) -> tuple[BinaryIO, str]:
    if str(path) == "-":
        return sys.stdin.buffer, "<stdin>"
    try:
        raw = open(path, "rb")
    except OSError as exc:
        raise DumpError(f"cannot read dump: {exc.strerror or exc}", source=str(path)) from exc
    head = raw.peek(6)[:6] if hasattr(raw, "peek") else b""
    if head.startswith(b"BZh"):
        return bz2.open(raw), str(path)  # type: ignore[return-value]
    if head.startswith(b"\x1f\x8b") or head.startswith(b"\xfd7zXZ") or head.startswith(b"\x28\xb5\x2f\xfd"):
        raw.close()
        raise DumpError("unsupported compression (decompress first or pipe to stdin)", source=str(path))
    return raw, str(path)


def iter_pages(stream: BinaryIO, source: str | None = None, chunk_size: int = CHUNK_SIZE) -> Iterator[PageRecord]:
    """Parse an already-open binary stream."""
    builder = _PageBuilder()
    parser = expat.ParserCreate()
    parser.buffer_text = True
    parser.buffer_size = 1 << 16
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.data
    while True:
        chunk = stream.read(chunk_size)
        final = not chunk
        try:
            parser.Parse(chunk, final)
        except expat.ExpatError as exc:
            raise DumpError(
                f"malformed XML: {expat.ErrorString(exc.code)} (line {exc.lineno}, column {exc.offset})",
                offset=parser.ErrorByteIndex,
                source=source,
            ) from None
        except ValueError as exc:
            raise DumpError(str(exc), offset=parser.CurrentByteIndex, source=source) from None
        while builder.ready:
            yield builder.ready.popleft()
        if final:
            return


def open_dump(path: str | Path) -> Iterator[PageRecord]:
    """Stream PageRecords from ``path`` (``-`` for stdin) in document order."""
    stream, source = _open_binary(path)
    return _closing(iter_pages(stream, source), stream)


def _closing(pages: Iterator[PageRecord], stream: BinaryIO) -> Iterator[PageRecord]:
    try:
        yield from pages
    except (OSError, EOFError) as exc:
        raise DumpError(f"read failed: {exc}") from exc
    finally:
        if stream is not sys.stdin.buffer:
            stream.close()


def filter_namespaces(
    pages: Iterable[PageRecord], dropped: Counter | None = None
) -> Iterator[PageRecord]:
    """Keep articles/redirects (ns 0) and categories (ns 14).

    Dropped records are tallied per namespace in ``dropped`` when given.
    """
    for page in pages:
        if page.namespace in KEPT_NAMESPACES:
            yield page
        elif dropped is not None:
            dropped[page.namespace] += 1
