"""Render wikitext to plain text while recording where links and sections land.

Rendering runs in two stages so a page is never copied wholesale:

1. block removal walks the source and yields ``(start, end)`` spans that
   survive after comments, ``<nowiki>``/``<ref>``-style elements,
   templates and tables are cut out;
2. the surviving text is cut into lines, each line is rendered inline
   (links, categories, headings, quotes, entities) and handed to a sink
   that tracks code-point offsets in the output.

All offsets refer to the rendered text.  The renderer never raises on bad
markup; it drops the offending delimiter and counts a warning.
"""
from __future__ import annotations

import html
import re
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterator


class InvalidTitle(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class RawLink:
    target_title: str
    anchor: str
    offset: int


@dataclass(frozen=True, slots=True)
class RawParagraph:
    start: int
    end: int
    level: int


@dataclass
class PageAnnotations:
    """Everything :func:`render_page` learns about a page except its text."""

    links: list[RawLink] = field(default_factory=list)
    categories: list[str] = field(default_factory=list)
    redirect_target: str | None = None
    headings: list[tuple[int, int]] = field(default_factory=list)
    paragraphs: list[RawParagraph] = field(default_factory=list)
    length: int = 0
    warnings: int = 0


@dataclass
class RenderedPage:
    text: str
    links: list[RawLink]
    categories: list[str]
    redirect_target: str | None
    paragraphs: list[RawParagraph]
    warnings: int = 0


# -- titles -----------------------------------------------------------------

NAMESPACES = {
    name.lower(): name
    for name in (
        "Talk", "User", "User talk", "Wikipedia", "Wikipedia talk", "Project",
        "File", "File talk", "Image", "Image talk", "MediaWiki", "MediaWiki talk",
        "Template", "Template talk", "Help", "Help talk", "Category",
        "Category talk", "Portal", "Portal talk", "Draft", "Draft talk",
        "Module", "Module talk", "TimedText", "TimedText talk", "Book",
        "Book talk", "Media", "Special", "WP",
    )
}
MEDIA_NAMESPACES = {"File", "Image", "Media"}
INTERWIKI_PREFIXES = {
    "w", "wikt", "wiktionary", "commons", "c", "meta", "m", "mw",
    "mediawikiwiki", "s", "wikisource", "q", "wikiquote", "n", "wikinews", "b",
    "wikibooks", "v", "wikiversity", "voy", "wikivoyage", "d", "wikidata",
    "species", "wikispecies", "foundation", "wmf", "phab", "gerrit", "doi",
    "google", "imdbname", "imdbtitle", "oldwikisource", "outreach", "incubator",
}
_LANG_RE = re.compile(r"[a-z]{2,3}(?:-[a-z]{2,8})*|simple")
_WS_RE = re.compile(r"\s+")
_BAD_TITLE_RE = re.compile(r"[\[\]{}|<>\x00-\x1f\x7f]")


def _ucfirst(s: str) -> str:
    if not s:
        return s
    up = s[0].upper()
    return (up if len(up) == 1 else s[0]) + s[1:]


def normalize_title(raw: str) -> str:
    """Canonical form used to join link targets and redirects to page names.

    >>> normalize_title("barack_obama")
    'Barack obama'
    >>> normalize_title("category: rock_music#History")
    'Category:Rock music'
    """
    t = html.unescape(raw)
    t = t.split("#", 1)[0]
    t = t.replace("_", " ")
    t = _WS_RE.sub(" ", t).strip()
    if ":" in t:
        prefix, rest = t.split(":", 1)
        canon = NAMESPACES.get(prefix.strip().lower())
        if canon is not None:
            rest = rest.strip()
            if not rest:
                raise InvalidTitle(raw)
            t = f"{canon}:{_ucfirst(rest)}"
    t = _ucfirst(t)
    if not t or _BAD_TITLE_RE.search(t):
        raise InvalidTitle(raw)
    return t


_DIRECTIVE_RE = re.compile(r"\s*#redirect\b\s*:?\s*", re.I)
_REDIRECT_RE = re.compile(r"\s*#redirect\b\s*:?\s*\[\[([^\[\]|\n]*)(?:\|[^\]\n]*)?\]\]", re.I)


def extract_redirect(wikitext: str) -> str | None:
    m = _REDIRECT_RE.match(wikitext)
    if m is None:
        return None
    try:
        return normalize_title(m.group(1))
    except InvalidTitle:
        return None


# -- paragraphs -------------------------------------------------------------

def _paragraphs_from_bounds(
    first_nonws: int, last_nonws: int, headings: list[tuple[int, int, int]]
) -> list[RawParagraph]:
    # headings: (start, fence width, last non-space offset before the heading)
    out: list[RawParagraph] = []
    if last_nonws < 0:
        return out
    if not headings:
        return [RawParagraph(first_nonws, last_nonws, 1)]
    if headings[0][2] >= first_nonws and headings[0][0] > first_nonws:
        out.append(RawParagraph(first_nonws, headings[0][2], 1))
    for i, (start, fence, _) in enumerate(headings):
        end = headings[i + 1][2] if i + 1 < len(headings) else last_nonws
        out.append(RawParagraph(start, end, max(fence - 1, 1)))
    return out


def segment_paragraphs(text: str, headings: list[tuple[int, int]]) -> list[RawParagraph]:
    """Cut rendered text into a disjoint run of paragraphs.

    ``headings`` holds ``(offset of the first title character, fence
    width)`` pairs in text order.  Paragraph intervals are inclusive and
    exclude surrounding whitespace.
    """
    stripped = text.lstrip()
    if not stripped:
        return []
    first = len(text) - len(stripped)
    last = len(text.rstrip()) - 1
    bounds = []
    for start, fence in headings:
        prev = len(text[:start].rstrip()) - 1
        bounds.append((start, fence, prev))
    return _paragraphs_from_bounds(first, last, bounds)


# -- stage 1: block removal -------------------------------------------------

STRIP_TAGS = {
    "b", "i", "u", "s", "del", "ins", "sup", "sub", "small", "big", "span",
    "div", "font", "center", "br", "hr", "p", "em", "strong", "code", "tt",
    "var", "abbr", "blockquote", "cite", "q", "dl", "dt", "dd", "ol", "ul",
    "li", "table", "tr", "td", "th", "caption", "tbody", "thead", "kbd",
    "samp", "mark", "bdi", "bdo", "wbr", "onlyinclude", "includeonly",
    "noinclude", "poem", "section", "pre", "h1", "h2", "h3", "h4", "h5", "h6",
    "strike", "rp", "rt", "ruby", "time", "data",
}
DROP_TAGS = {
    "nowiki", "ref", "references", "math", "gallery", "timeline",
    "syntaxhighlight", "source", "score", "templatedata", "imagemap", "chem",
    "ce", "hiero", "graph", "mapframe", "maplink", "inputbox", "categorytree",
    "templatestyles", "indicator",
}

_BLOCK_RE = re.compile(
    r"<!--|\{\{|\}\}|^[ \t]*\{\||<(/?)([A-Za-z][A-Za-z0-9]*)(?=[\s/>])[^<>]*?(/?)>",
    re.M,
)
_BRACE_RE = re.compile(r"\{\{|\}\}|<!--")
_TABLE_RE = re.compile(r"^[ \t]*(\{\||\|\})", re.M)
_CLOSE_TAG_CACHE: dict[str, re.Pattern[str]] = {}


def _close_tag(name: str) -> re.Pattern[str]:
    pat = _CLOSE_TAG_CACHE.get(name)
    if pat is None:
        pat = _CLOSE_TAG_CACHE[name] = re.compile(r"</\s*%s\s*>" % re.escape(name), re.I)
    return pat


def _match_template(src: str, i: int) -> int | None:
    depth = 0
    pos = i
    while True:
        m = _BRACE_RE.search(src, pos)
        if m is None:
            return None
        if m.group() == "<!--":
            end = src.find("-->", m.end())
            if end < 0:
                return None
            pos = end + 3
            continue
        depth += 1 if m.group() == "{{" else -1
        pos = m.end()
        if depth == 0:
            return pos


def _match_table(src: str, i: int) -> int | None:
    depth = 0
    pos = i
    while True:
        m = _TABLE_RE.search(src, pos)
        if m is None:
            return None
        depth += 1 if m.group(1) == "{|" else -1
        pos = m.end()
        if depth == 0:
            return pos


class _Warnings:
    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0


def _block_spans(src: str, warn: _Warnings) -> Iterator[tuple[int, int]]:
    keep = 0
    search = 0
    n = len(src)
    while search < n:
        m = _BLOCK_RE.search(src, search)
        if m is None:
            break
        tok = m.group()
        start = m.start()
        resume: int | None
        if tok == "<!--":
            end = src.find("-->", m.end())
            # an unterminated comment swallows the rest of the page
            resume = n if end < 0 else end + 3
            if end < 0:
                warn.count += 1
        elif tok == "{{":
            resume = _match_template(src, start)
            if resume is None:
                warn.count += 1
                resume = m.end()
        elif tok == "}}":
            warn.count += 1
            resume = m.end()
        elif tok.lstrip(" \t") == "{|":
            resume = _match_table(src, start)
            if resume is None:
                warn.count += 1
                resume = m.end()
            else:
                start = m.end() - 2
        else:
            closing, name, selfclosing = m.group(1), m.group(2).lower(), m.group(3)
            if name in DROP_TAGS:
                if closing or selfclosing:
                    resume = m.end()
                    if closing:
                        warn.count += 1
                else:
                    close = _close_tag(name).search(src, m.end())
                    if close is None:
                        warn.count += 1
                        resume = m.end()
                    else:
                        resume = close.end()
            elif name in STRIP_TAGS:
                resume = m.end()
            else:
                resume = None
        if resume is None:
            search = start + 1
            continue
        if start > keep:
            yield keep, start
        keep = search = resume
    if keep < n:
        yield keep, n


def _lines(src: str, spans: Iterator[tuple[int, int]]) -> Iterator[str]:
    partial: list[str] = []
    for start, end in spans:
        pos = start
        while True:
            nl = src.find("\n", pos, end)
            if nl < 0:
                if pos < end:
                    partial.append(src[pos:end])
                break
            piece = src[pos:nl]
            if partial:
                partial.append(piece)
                yield "".join(partial)
                partial = []
            else:
                yield piece
            pos = nl + 1
    yield "".join(partial)


# -- stage 2: inline rendering ----------------------------------------------

_INLINE_RE = re.compile(
    r"\[\[|\]\]|'{2,}|__[A-Z]+__"
    r"|&(?:#[0-9]+|#[xX][0-9a-fA-F]+|[A-Za-z][A-Za-z0-9]*);"
    r"|\[(?=(?:https?:|ftp:)?//|mailto:)"
)
_EXTLINK_RE = re.compile(
    r"\[((?:(?:https?:|ftp:)?//|mailto:)[^\s\[\]<>\"]+)(?:[ \t]+([^\]\n]*))?\]"
)
_TRAIL_RE = re.compile(r"[a-z]+")
_PAREN_RE = re.compile(r"\s*\([^()]*\)\s*$")
_LIST_RE = re.compile(r"[ \t]*(?:[*#:;]+[ \t]*)+|[ \t]*-{4,}[ \t]*")


@dataclass
class _Inline:
    text: str
    # [offset, anchor, target] triples; target None means display only
    links: list[list]
    categories: list[str]


def _render_inline(s: str, warn: _Warnings, links_ok: bool = True) -> _Inline:
    out: list[str] = []
    pos = 0  # length of output so far
    links: list[list] = []
    cats: list[str] = []
    i = 0
    n = len(s)

    def emit(piece: str) -> None:
        nonlocal pos
        if piece:
            out.append(piece)
            pos += len(piece)

    while i < n:
        m = _INLINE_RE.search(s, i)
        if m is None:
            emit(s[i:])
            break
        emit(s[i:m.start()])
        tok = m.group()
        i = m.end()
        if tok == "[[":
            i = _render_link(s, m.start(), warn, links_ok, emit, lambda: pos, links, cats)
        elif tok == "]]":
            warn.count += 1
        elif tok.startswith("'") or tok.startswith("__"):
            pass
        elif tok.startswith("&"):
            emit(html.unescape(tok))
        else:
            ext = _EXTLINK_RE.match(s, m.start())
            if ext is None:
                emit(tok)
            else:
                if ext.group(2):
                    emit(_render_inline(ext.group(2), warn, links_ok=False).text)
                i = ext.end()
    return _Inline("".join(out), links, cats)


def _link_kind(target: str) -> tuple[str, str]:
    """Classify a link target: ('link'|'category'|'media'|'lang'|'interwiki', target)."""
    colon = target.lstrip().startswith(":")
    body = target.lstrip()[1:] if colon else target
    if ":" in body:
        prefix = body.split(":", 1)[0].strip().replace("_", " ")
        canon = NAMESPACES.get(prefix.lower())
        if canon == "Category" and not colon:
            return "category", body
        if canon in MEDIA_NAMESPACES:
            return ("display" if colon else "media"), body
        if canon is None:
            if prefix.lower() in INTERWIKI_PREFIXES:
                return "display", body
            if _LANG_RE.fullmatch(prefix):
                return ("display" if colon else "lang"), body
    return "link", body


def _skip_balanced(s: str, i: int) -> int | None:
    depth = 0
    pos = i
    while True:
        o = s.find("[[", pos)
        c = s.find("]]", pos)
        if c < 0:
            return None
        if 0 <= o < c:
            depth += 1
            pos = o + 2
        else:
            depth -= 1
            pos = c + 2
            if depth == 0:
                return pos


def _render_link(s, start, warn, links_ok, emit, here, links, cats) -> int:
    close = s.find("]]", start + 2)
    nested = s.find("[[", start + 2)
    if close < 0:
        warn.count += 1
        return start + 2
    inner = s[start + 2:close]
    target_src, pipe, anchor_src = inner.partition("|")
    kind, body = _link_kind(target_src)
    if kind in ("media", "lang"):
        end = _skip_balanced(s, start) if 0 <= nested < close else close + 2
        if end is None:
            warn.count += 1
            return start + 2
        return end
    if 0 <= nested < close:
        warn.count += 1
        return start + 2
    end = close + 2
    if kind == "category":
        try:
            cats.append(normalize_title(body))
        except InvalidTitle:
            warn.count += 1
        return end
    if pipe and anchor_src.strip():
        shown = _render_inline(anchor_src, warn, links_ok=False).text
    elif pipe:
        # pipe trick: [[Rome (city)|]] shows "Rome"
        shown = body.split(":", 1)[1] if ":" in body and kind != "link" else body
        shown = _PAREN_RE.sub("", shown)
    else:
        shown = _render_inline(target_src.lstrip().lstrip(":"), warn, links_ok=False).text
    if shown.strip():
        trail = _TRAIL_RE.match(s, end)
        if trail is not None:
            shown += trail.group()
            end = trail.end()
    target = None
    if kind == "link" and links_ok:
        try:
            target = normalize_title(body)
        except InvalidTitle:
            if not body.strip().startswith("#"):
                warn.count += 1
    core = shown.strip()
    if target is not None and core:
        lead = len(shown) - len(shown.lstrip())
        links.append([here() + lead, core, target])
    emit(shown)
    return end


# -- lines, sanitising, sink -------------------------------------------------

_SUSPECT_RE = re.compile(
    r"\[\[|\]\]|\{\{|\}\}|''|<!--|</?[A-Za-z]|&#?[A-Za-z0-9]+;|__[A-Z]+__"
    r"|\[(?:(?:https?:|ftp:)?//|mailto:)|^\s*(?:[*#:;=]|-{4}|\{\|)"
)


def _heading(line: str) -> tuple[int, str] | None:
    t = line.strip()
    if len(t) < 3 or t[0] != "=" or t[-1] != "=":
        return None
    lead = len(t) - len(t.lstrip("="))
    trail = len(t) - len(t.rstrip("="))
    if lead + trail >= len(t):
        return None
    fence = min(lead, trail, 6)
    return fence, t[fence:len(t) - fence]


def _render_line(line: str, warn: _Warnings, first: bool) -> tuple[str, list[list], list[str], int | None]:
    if first:
        d = _DIRECTIVE_RE.match(line)
        if d is not None and line.startswith("[[", d.end()):
            close = line.find("]]", d.end())
            if close >= 0:
                line = line[close + 2:]
    h = _heading(line)
    if h is not None:
        fence, title = h
        r = _render_inline(title, warn)
        core = r.text.strip()
        if not core:
            warn.count += 1
            return "", [], r.categories, None
        shift = len(r.text) - len(r.text.lstrip())
        for link in r.links:
            link[0] -= shift
        return core, r.links, r.categories, fence
    lm = _LIST_RE.match(line)
    if lm is not None and lm.end() > 0:
        line = line[lm.end():]
    r = _render_inline(line, warn)
    return r.text, r.links, r.categories, None


def _rerender(line: str) -> str:
    scratch = _Warnings()
    pieces = [line[a:b] for a, b in _block_spans(line, scratch)]
    return _render_line("".join(pieces), scratch, first=False)[0]


def _stable(text: str) -> bool:
    # the sink may trim leading whitespace, so both forms must survive
    if _rerender(text) != text:
        return False
    core = text.lstrip()
    return core == text or _rerender(core) == core


def _delete_char(text: str, links: list[list], k: int) -> str:
    for link in links:
        off, anchor = link[0], link[1]
        if k < off:
            link[0] = off - 1
        elif k < off + len(anchor):
            link[1] = anchor[: k - off] + anchor[k - off + 1:]
    return text[:k] + text[k + 1:]


def _sanitize(text: str, links: list[list], warn: _Warnings) -> tuple[str, list[list]]:
    """Delete characters until re-rendering ``text`` leaves it unchanged."""
    if not _SUSPECT_RE.search(text) or _stable(text):
        return text, links
    warn.count += 1
    for _ in range(len(text) + 1):
        m = _SUSPECT_RE.search(text)
        if m is None:
            break
        k = m.start()
        while k < len(text) and text[k].isspace():
            k += 1
        text = _delete_char(text, links, k)
        if _stable(text):
            break
    else:  # pragma: no cover - every deletion removes a suspect character
        raise AssertionError("sanitiser did not converge")
    fixed = []
    for off, anchor, target in links:
        core = anchor.strip()
        if core:
            fixed.append([off + len(anchor) - len(anchor.lstrip()), core, target])
    return text, fixed


class _Sink:
    """Writes rendered lines, trimming outer whitespace and tracking offsets."""

    def __init__(self, write: Callable[[str], object]):
        self.write = write
        self.pos = 0
        self.pending = ""
        self.started = False
        self.lines = 0
        self.first_nonws = 0
        self.last_nonws = -1
        self.links: list[RawLink] = []
        self.headings: list[tuple[int, int, int]] = []

    def line(self, text: str, links: list[list], fence: int | None) -> None:
        if self.lines:
            self.pending += "\n"
        self.lines += 1
        core = text.rstrip()
        if not core:
            self.pending += text
            return
        drop = 0
        if not self.started:
            drop = len(core) - len(core.lstrip())
            core = core[drop:]
            self.pending = ""
            self.started = True
        if self.pending:
            self.write(self.pending)
            self.pos += len(self.pending)
        base = self.pos - drop
        if fence is not None:
            self.headings.append((self.pos, fence, self.last_nonws))
        for off, anchor, target in links:
            if target is not None:
                self.links.append(RawLink(sys.intern(target), anchor, base + off))
        self.write(core)
        self.pos += len(core)
        self.last_nonws = self.pos - 1
        self.pending = text[len(core) + drop:]


def render_page(wikitext: str, write: Callable[[str], object]) -> PageAnnotations:
    """Stream the rendered text of ``wikitext`` through ``write``.

    Used directly by the store builder so that large pages go to disk
    without a second in-memory copy.
    """
    warn = _Warnings()
    sink = _Sink(write)
    cats: list[str] = []
    redirect = extract_redirect(wikitext)
    if redirect is None and _DIRECTIVE_RE.match(wikitext):
        warn.count += 1
    for line in _lines(wikitext, _block_spans(wikitext, warn)):
        text, links, line_cats, fence = _render_line(line, warn, first=not sink.started)
        cats.extend(line_cats)
        if text:
            text, links = _sanitize(text, links, warn)
        sink.line(text, links, fence)
    seen: set[str] = set()
    unique_cats = [c for c in cats if not (c in seen or seen.add(c))]
    paragraphs = _paragraphs_from_bounds(0, sink.last_nonws, sink.headings)
    return PageAnnotations(
        links=sink.links,
        categories=unique_cats,
        redirect_target=redirect,
        headings=[(start, fence) for start, fence, _ in sink.headings],
        paragraphs=paragraphs,
        length=sink.pos,
        warnings=warn.count,
    )


def parse_page(wikitext: str) -> RenderedPage:
    pieces: list[str] = []
    ann = render_page(wikitext, pieces.append)
    return RenderedPage(
        text="".join(pieces),
        links=ann.links,
        categories=ann.categories,
        redirect_target=ann.redirect_target,
        paragraphs=ann.paragraphs,
        warnings=ann.warnings,
    )
