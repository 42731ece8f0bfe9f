"""wikidb command line: build, query, stats.

Exit codes: 0 ok, 1 usage or missing store, 2 dump/build failure,
3 query target not found.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

from .dump_reader import DumpError, filter_namespaces, open_dump
from .export import SQL_FILE, TSV_DIR, export_sql, export_tsv, load_store
from .query import (
    NotFound,
    cross_group_links,
    links_in_paragraph,
    pages_sharing_category,
    redirect_counts,
)
from .schema_builder import DEFAULT_MEMORY_BUDGET, TABLES, BuildError, build_store
from .stemmer import StopWords

EXIT_USAGE, EXIT_BUILD, EXIT_NOT_FOUND = 1, 2, 3
MEMORY_ENV = "WIKIDB_MEMORY_BUDGET"

log = logging.getLogger("wikidb")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_id_file(path: str) -> list[int]:
    """One decimal id per line; ``#`` starts a comment."""
    ids = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read id file {path}: {exc.strerror or exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.isdigit():
            raise UsageError(f"{path}:{n}: not a page id: {line!r}")
        ids.append(int(line))
    return ids


def _memory_budget(args: argparse.Namespace) -> int:
    mib = args.memory_budget
    if mib is None and os.environ.get(MEMORY_ENV):
        try:
            mib = int(os.environ[MEMORY_ENV])
        except ValueError:
            raise UsageError(f"{MEMORY_ENV} must be an integer number of MiB") from None
    if mib is None:
        return DEFAULT_MEMORY_BUDGET
    if mib <= 0:
        raise UsageError("memory budget must be positive")
    return mib << 20


def cmd_build(args: argparse.Namespace) -> int:
    budget = _memory_budget(args)
    stop_words = None
    if args.stop_words:
        try:
            stop_words = StopWords.from_file(args.stop_words)
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad stop-word file {args.stop_words}: {exc}") from exc
    out = Path(args.out)
    skipped: Counter = Counter()
    try:
        pages = filter_namespaces(open_dump(args.dump), skipped)
        store = build_store(
            pages, out, stop_words=stop_words, memory_budget=budget, skipped_namespaces=skipped
        )
        if args.format in ("sql", "both"):
            export_sql(store, out / SQL_FILE)
        if args.format in ("tsv", "both"):
            export_tsv(store, out / TSV_DIR)
    except (DumpError, BuildError) as exc:
        print(f"wikidb build: {exc}", file=sys.stderr)
        return EXIT_BUILD
    except OSError as exc:
        print(f"wikidb build: {exc}", file=sys.stderr)
        return EXIT_BUILD
    sys.stdout.write(store.stats.to_text())
    return 0


def _load(store_dir: str):
    try:
        return load_store(store_dir)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load store {store_dir}: {exc}") from exc


def cmd_query(args: argparse.Namespace) -> int:
    out = sys.stdout
    if args.query == "shared-category":
        store = _load(args.store)
        for pid, name in pages_sharing_category(store, args.category):
            out.write(f"{pid}\t{name}\n")
    elif args.query == "cross-links":
        g1, g2 = read_id_file(args.group1), read_id_file(args.group2)
        store = _load(args.store)
        for pid, target in sorted(cross_group_links(store, g1, g2)):
            out.write(f"{pid}\t{target}\n")
    elif args.query == "redirect-counts":
        ids = read_id_file(args.pages)
        store = _load(args.store)
        for target, count in redirect_counts(store, ids).items():
            out.write(f"{'' if target is None else target}\t{count}\n")
    else:
        store = _load(args.store)
        try:
            targets = links_in_paragraph(store, args.page, args.paragraph)
        except NotFound as exc:
            print(f"wikidb query: {exc.args[0]}", file=sys.stderr)
            return EXIT_NOT_FOUND
        for target in targets:
            out.write(f"{target}\n")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    store = _load(args.store)
    for table in TABLES:
        sys.stdout.write(f"{table}\t{len(store.table(table))}\n")
    sys.stdout.write(store.stats.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wikidb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build a store from a MediaWiki XML dump")
    b.add_argument("--dump", required=True, help="dump path, or - for stdin")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--stop-words", help="stop-word file (one lowercase token per line)")
    b.add_argument("--memory-budget", type=int, metavar="MiB",
                   help=f"pass-1 spool budget (default 1024, or ${MEMORY_ENV})")
    b.add_argument("--format", choices=("sql", "tsv", "both"), default="both")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="run one of the use-case queries")
    qs = q.add_subparsers(dest="query", required=True, parser_class=_Parser)
    shared = qs.add_parser("shared-category", help="pages in a category")
    shared.add_argument("--category", type=int, required=True)
    cross = qs.add_parser("cross-links", help="links from group1 pages to group2 pages")
    cross.add_argument("--group1", required=True, metavar="FILE")
    cross.add_argument("--group2", required=True, metavar="FILE")
    counts = qs.add_parser("redirect-counts", help="redirect pages per target")
    counts.add_argument("--pages", required=True, metavar="FILE")
    para = qs.add_parser("paragraph-links", help="link targets inside one paragraph")
    para.add_argument("--page", type=int, required=True)
    para.add_argument("--paragraph", type=int, required=True)
    for p in (shared, cross, counts, para):
        p.add_argument("--store", required=True, help="directory written by build")
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("stats", help="row counts and build counters")
    s.add_argument("--store", required=True)
    s.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wikidb: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
