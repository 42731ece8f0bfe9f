"""Write a store out as a SQL script or as TSV files, and read TSV back."""
from __future__ import annotations

import os
import sqlite3
from dataclasses import astuple
from pathlib import Path
from typing import Iterable

from .schema_builder import STATS_FILE, TABLES, BuildStats, WikiStore

SQL_FILE = "wikidb.sql"
TSV_DIR = "tsv"
INSERT_BATCH = 500

DDL = """\
CREATE TABLE tbl_Wiki_Page (
    Page_id INTEGER NOT NULL PRIMARY KEY,
    Page_name TEXT NOT NULL,
    File_path TEXT NOT NULL,
    Page_type INTEGER NOT NULL CHECK (Page_type IN (1, 2, 3)),
    Stemmed_name TEXT NOT NULL
);

CREATE TABLE tbl_Wiki_Page_Redirect (
    Page_id INTEGER NOT NULL PRIMARY KEY,
    Redirected_page_title TEXT NOT NULL,
    Redirected_page_id INTEGER,
    FOREIGN KEY (Page_id) REFERENCES tbl_Wiki_Page (Page_id),
    FOREIGN KEY (Redirected_page_id) REFERENCES tbl_Wiki_Page (Page_id)
);

CREATE TABLE tbl_Wiki_Page_Categories (
    Page_id INTEGER NOT NULL,
    Category_page_id INTEGER NOT NULL,
    PRIMARY KEY (Page_id, Category_page_id),
    FOREIGN KEY (Page_id) REFERENCES tbl_Wiki_Page (Page_id),
    FOREIGN KEY (Category_page_id) REFERENCES tbl_Wiki_Page (Page_id)
);

CREATE TABLE tbl_Wiki_Page_Links (
    Page_id INTEGER NOT NULL,
    Link_page_id INTEGER NOT NULL,
    Pos_in_page INTEGER NOT NULL,
    Link_description TEXT NOT NULL,
    Stemmed_link_description TEXT NOT NULL,
    PRIMARY KEY (Page_id, Pos_in_page),
    FOREIGN KEY (Page_id) REFERENCES tbl_Wiki_Page (Page_id),
    FOREIGN KEY (Link_page_id) REFERENCES tbl_Wiki_Page (Page_id)
);

CREATE TABLE tbl_Wiki_Page_Paragraphs (
    Page_id INTEGER NOT NULL,
    Paragraph_id INTEGER NOT NULL,
    Paragraph_start_pos INTEGER NOT NULL,
    Paragraph_end_pos INTEGER NOT NULL,
    Paragraph_level INTEGER NOT NULL,
    PRIMARY KEY (Page_id, Paragraph_id),
    FOREIGN KEY (Page_id) REFERENCES tbl_Wiki_Page (Page_id)
);
"""


def sql_literal(value: object) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, int):
        return str(value)
    return "'" + str(value).replace("'", "''") + "'"


def _batches(rows: list, size: int) -> Iterable[list]:
    for i in range(0, len(rows), size):
        yield rows[i:i + size]


def _atomic_path(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.with_name(path.name + ".tmp")


def export_sql(store: WikiStore, path: str | Path) -> Path:
    path = Path(path)
    tmp = _atomic_path(path)
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(DDL)
        f.write("\nBEGIN;\n")
        for table, (_, columns) in TABLES.items():
            rows = store.table(table)
            head = f"INSERT INTO {table} ({', '.join(columns)}) VALUES\n"
            for batch in _batches(rows, INSERT_BATCH):
                f.write(head)
                f.write(",\n".join(
                    "(" + ", ".join(sql_literal(v) for v in astuple(row)) + ")" for row in batch
                ))
                f.write(";\n")
        f.write("COMMIT;\n")
    os.replace(tmp, path)
    return path


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def tsv_escape(value: object) -> str:
    if value is None:
        return ""
    s = str(value)
    if any(c in s for c in _ESCAPES):
        s = "".join(_ESCAPES.get(c, c) for c in s)
    return s


def tsv_unescape(field: str) -> str:
    if "\\" not in field:
        return field
    out = []
    it = iter(field)
    for c in it:
        if c == "\\":
            nxt = next(it, "")
            out.append(_UNESCAPES.get(nxt, nxt))
        else:
            out.append(c)
    return "".join(out)


def export_tsv(store: WikiStore, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for table, (_, columns) in TABLES.items():
        path = directory / f"{table}.tsv"
        tmp = _atomic_path(path)
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            f.write("\t".join(columns) + "\n")
            for row in store.table(table):
                f.write("\t".join(tsv_escape(v) for v in astuple(row)) + "\n")
        os.replace(tmp, path)
        written.append(path)
    return written


def load_store(root: str | Path) -> WikiStore:
    """Load a store from ``root/tsv`` and ``root/build_stats.txt``."""
    root = Path(root)
    tsv = root / TSV_DIR
    if not tsv.is_dir():
        if (root / SQL_FILE).is_file():
            return load_sql_store(root)
        raise FileNotFoundError(f"no TSV or SQL export under {root}")
    store = WikiStore(root=root)
    for table, (row_type, columns) in TABLES.items():
        path = tsv / f"{table}.tsv"
        kinds = [row_type.__dataclass_fields__[f].type for f in row_type.__dataclass_fields__]
        rows = store.table(table)
        with open(path, encoding="utf-8", newline="") as f:
            header = f.readline().rstrip("\n").split("\t")
            if header != list(columns):
                raise ValueError(f"{path}: unexpected header {header}")
            for line in f:
                parts = line.rstrip("\n").split("\t")
                if len(parts) != len(columns):
                    raise ValueError(f"{path}: bad row {line!r}")
                values = []
                for raw, kind in zip(parts, kinds):
                    if kind == "int":
                        values.append(int(raw))
                    elif kind == "int | None":
                        values.append(int(raw) if raw else None)
                    else:
                        values.append(tsv_unescape(raw))
                rows.append(row_type(*values))
    _load_stats(store, root)
    return store


def _load_stats(store: WikiStore, root: Path) -> None:
    stats = root / STATS_FILE
    if stats.exists():
        store.stats = BuildStats.from_text(stats.read_text(encoding="utf-8"))


def load_sql_store(root: str | Path) -> WikiStore:
    """Load ``root/wikidb.sql`` through an in-memory SQLite database."""
    root = Path(root)
    conn = sqlite3.connect(":memory:")
    try:
        conn.executescript((root / SQL_FILE).read_text(encoding="utf-8"))
        store = WikiStore(root=root)
        for table, (row_type, columns) in TABLES.items():
            cur = conn.execute(
                f"SELECT {', '.join(columns)} FROM {table} ORDER BY rowid"
            )
            store.table(table).extend(row_type(*row) for row in cur)
    finally:
        conn.close()
    _load_stats(store, root)
    return store
