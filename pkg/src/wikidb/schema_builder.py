"""Two-pass assembly of the five Wiki-DB tables from a page stream.

Pass 1 renders every page to its text file and spools the title
references it finds (links, categories, redirect targets).  Pass 2, once
every title is known, resolves those references to page ids.  The spool
spills sorted runs to disk past a memory budget and pass 2 merges them.
"""
from __future__ import annotations

import heapq
import logging
import os
import pickle
import tempfile
from collections import Counter
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from .dump_reader import PageRecord
from .stemmer import StopWords, stem_phrase
from .wikitext import InvalidTitle, extract_redirect, normalize_title, render_page

log = logging.getLogger(__name__)

ENTITY, REDIRECT, CATEGORY = 1, 2, 3
DEFAULT_MEMORY_BUDGET = 1 << 30
STATS_FILE = "build_stats.txt"


class BuildError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class WikiPage:
    page_id: int
    page_name: str
    file_path: str
    page_type: int
    stemmed_name: str


@dataclass(frozen=True, slots=True)
class RedirectEntry:
    page_id: int
    redirected_page_title: str
    redirected_page_id: int | None


@dataclass(frozen=True, slots=True)
class CategoryAssignment:
    page_id: int
    category_page_id: int


@dataclass(frozen=True, slots=True)
class LinkEntry:
    page_id: int
    link_page_id: int
    pos_in_page: int
    link_description: str
    stemmed_link_description: str


@dataclass(frozen=True, slots=True)
class ParagraphEntry:
    page_id: int
    paragraph_id: int
    paragraph_start_pos: int
    paragraph_end_pos: int
    paragraph_level: int


# table name -> (row type, column names); column order follows the row type
TABLES: dict[str, tuple[type, tuple[str, ...]]] = {
    "tbl_Wiki_Page": (WikiPage, ("Page_id", "Page_name", "File_path", "Page_type", "Stemmed_name")),
    "tbl_Wiki_Page_Redirect": (
        RedirectEntry,
        ("Page_id", "Redirected_page_title", "Redirected_page_id"),
    ),
    "tbl_Wiki_Page_Categories": (CategoryAssignment, ("Page_id", "Category_page_id")),
    "tbl_Wiki_Page_Links": (
        LinkEntry,
        ("Page_id", "Link_page_id", "Pos_in_page", "Link_description", "Stemmed_link_description"),
    ),
    "tbl_Wiki_Page_Paragraphs": (
        ParagraphEntry,
        ("Page_id", "Paragraph_id", "Paragraph_start_pos", "Paragraph_end_pos", "Paragraph_level"),
    ),
}


@dataclass
class BuildStats:
    pages: int = 0
    entity_pages: int = 0
    redirect_pages: int = 0
    category_pages: int = 0
    dropped_red_links: int = 0
    unresolved_redirects: int = 0
    dropped_categories: int = 0
    skipped_namespaces: int = 0
    duplicate_titles: int = 0
    invalid_titles: int = 0
    parse_warnings: int = 0
    spilled_runs: int = 0

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> BuildStats:
        known = {f.name for f in fields(cls)}
        values = {}
        for line in text.splitlines():
            key, sep, value = line.partition("=")
            if sep and key.strip() in known:
                values[key.strip()] = int(value)
        return cls(**values)


@dataclass
class WikiStore:
    pages: list[WikiPage] = field(default_factory=list)
    redirects: list[RedirectEntry] = field(default_factory=list)
    categories: list[CategoryAssignment] = field(default_factory=list)
    links: list[LinkEntry] = field(default_factory=list)
    paragraphs: list[ParagraphEntry] = field(default_factory=list)
    stats: BuildStats = field(default_factory=BuildStats)
    root: Path | None = None

    def __post_init__(self) -> None:
        self._by_id: dict[int, WikiPage] | None = None

    def table(self, name: str) -> list:
        return {
            "tbl_Wiki_Page": self.pages,
            "tbl_Wiki_Page_Redirect": self.redirects,
            "tbl_Wiki_Page_Categories": self.categories,
            "tbl_Wiki_Page_Links": self.links,
            "tbl_Wiki_Page_Paragraphs": self.paragraphs,
        }[name]

    def page(self, page_id: int) -> WikiPage | None:
        if self._by_id is None:
            self._by_id = {p.page_id: p for p in self.pages}
        return self._by_id.get(page_id)

    def read_text(self, page_id: int) -> str:
        page = self.page(page_id)
        if page is None or self.root is None:
            raise KeyError(page_id)
        return (self.root / page.file_path).read_text(encoding="utf-8")


def assign_file_path(page_id: int) -> str:
    if page_id <= 0:
        raise ValueError(f"page id must be positive, got {page_id}")
    return f"texts/{page_id % 1000:03d}/{page_id}.txt"


def resolve_redirect(title_index: Mapping[str, int], target: str) -> int | None:
    """One lookup hop: a redirect to a redirect yields the middle page's id."""
    try:
        return title_index.get(normalize_title(target))
    except InvalidTitle:
        return None


# -- pass-1 spool --------------------------------------------------------------

# spool record: (page_id, kind, seq, title, anchor, offset)
_REDIRECT_REF, _CATEGORY_REF, _LINK_REF = 0, 1, 2


class _Spool:
    def __init__(self, budget: int, tmpdir: str | None = None):
        self.budget = budget
        self.tmpdir = tmpdir
        self.buffer: list[tuple] = []
        self.used = 0
        self.runs: list[IO[bytes]] = []

    def add(self, rec: tuple) -> None:
        self.buffer.append(rec)
        self.used += 160 + len(rec[3]) + len(rec[4])
        if self.used > self.budget:
            self.spill()

    def spill(self) -> None:
        if not self.buffer:
            return
        self.buffer.sort()
        f = tempfile.TemporaryFile(dir=self.tmpdir)
        pickler = pickle.Pickler(f, protocol=pickle.HIGHEST_PROTOCOL)
        for rec in self.buffer:
            pickler.dump(rec)
        f.seek(0)
        self.runs.append(f)
        self.buffer = []
        self.used = 0

    @staticmethod
    def _read(f: IO[bytes]) -> Iterator[tuple]:
        unpickler = pickle.Unpickler(f)
        while True:
            try:
                yield unpickler.load()
            except EOFError:
                return

    def merged(self) -> Iterator[tuple]:
        self.buffer.sort()
        try:
            yield from heapq.merge(*(self._read(f) for f in self.runs), iter(self.buffer))
        finally:
            self.close()

    def close(self) -> None:
        for f in self.runs:
            f.close()
        self.runs = []
        self.buffer = []


def _discard(_: str) -> None:
    pass


def build_store(
    pages: Iterable[PageRecord],
    out_dir: str | Path,
    *,
    stop_words: StopWords | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    skipped_namespaces: Counter | None = None,
) -> WikiStore:
    """Build the store, writing rendered texts under ``out_dir/texts``.

    ``skipped_namespaces`` is the counter filled by
    :func:`~wikidb.dump_reader.filter_namespaces`; it is read after the
    stream is exhausted so the total lands in the build stats.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats = BuildStats()
    store = WikiStore(stats=stats, root=out)
    title_index: dict[str, int] = {}
    page_types: dict[int, int] = {}
    spool = _Spool(memory_budget)
    made_dirs: set[Path] = set()

    try:
        for record in pages:
            if record.page_id in page_types:
                raise BuildError(f"duplicate page id {record.page_id} ({record.title!r})")
            try:
                key = normalize_title(record.title)
            except InvalidTitle:
                stats.invalid_titles += 1
                log.warning("skipping page %d: invalid title %r", record.page_id, record.title)
                continue
            if key in title_index:
                stats.duplicate_titles += 1
                log.warning(
                    "page %d duplicates title %r of page %d; keeping the first",
                    record.page_id, key, title_index[key],
                )
                continue

            if record.namespace == 14:
                page_type = CATEGORY
            elif record.is_redirect:
                page_type = REDIRECT
            else:
                page_type = ENTITY
            title_index[key] = record.page_id
            page_types[record.page_id] = page_type

            rel = assign_file_path(record.page_id)
            path = out / rel
            if path.parent not in made_dirs:
                path.parent.mkdir(parents=True, exist_ok=True)
                made_dirs.add(path.parent)
            pid = record.page_id
            with open(path, "w", encoding="utf-8", newline="") as fh:
                if page_type == REDIRECT:
                    ann = render_page(record.wikitext, _discard)
                else:
                    ann = render_page(record.wikitext, fh.write)
            stats.parse_warnings += ann.warnings

            store.pages.append(
                WikiPage(pid, record.title, rel, page_type, stem_phrase(record.title, stop_words))
            )
            if page_type == REDIRECT:
                target = ann.redirect_target or extract_redirect(record.wikitext)
                if target is None and record.redirect_title:
                    try:
                        target = normalize_title(record.redirect_title)
                    except InvalidTitle:
                        target = None
                if target is None:
                    stats.unresolved_redirects += 1
                    log.warning("redirect page %d has no readable target", pid)
                else:
                    spool.add((pid, _REDIRECT_REF, 0, target, "", 0))
            else:
                for seq, link in enumerate(ann.links):
                    spool.add((pid, _LINK_REF, seq, link.target_title, link.anchor, link.offset))
                for i, para in enumerate(ann.paragraphs):
                    store.paragraphs.append(ParagraphEntry(pid, i, para.start, para.end, para.level))
            for seq, cat in enumerate(ann.categories):
                spool.add((pid, _CATEGORY_REF, seq, cat, "", 0))
            del record, ann

        stats.spilled_runs = len(spool.runs)
        seen_cats: set[tuple[int, int]] = set()
        for pid, kind, _seq, title, anchor, offset in spool.merged():
            target_id = title_index.get(title)
            if kind == _REDIRECT_REF:
                if target_id is None:
                    stats.unresolved_redirects += 1
                store.redirects.append(RedirectEntry(pid, title, target_id))
            elif kind == _CATEGORY_REF:
                if target_id is None or page_types[target_id] != CATEGORY:
                    stats.dropped_categories += 1
                    log.debug("page %d: category %r has no category page", pid, title)
                elif (pid, target_id) not in seen_cats:
                    seen_cats.add((pid, target_id))
                    store.categories.append(CategoryAssignment(pid, target_id))
            else:
                if target_id is None:
                    stats.dropped_red_links += 1
                else:
                    store.links.append(
                        LinkEntry(pid, target_id, offset, anchor, stem_phrase(anchor, stop_words))
                    )
    finally:
        spool.close()

    store.pages.sort(key=lambda p: p.page_id)
    store.paragraphs.sort(key=lambda p: (p.page_id, p.paragraph_id))
    stats.pages = len(store.pages)
    counts = Counter(p.page_type for p in store.pages)
    stats.entity_pages = counts[ENTITY]
    stats.redirect_pages = counts[REDIRECT]
    stats.category_pages = counts[CATEGORY]
    if skipped_namespaces is not None:
        stats.skipped_namespaces = sum(skipped_namespaces.values())
    write_stats(store, out)
    return store


def write_stats(store: WikiStore, out_dir: str | Path) -> None:
    path = Path(out_dir) / STATS_FILE
    tmp = path.with_suffix(".tmp")
    tmp.write_text(store.stats.to_text(), encoding="utf-8")
    os.replace(tmp, path)
