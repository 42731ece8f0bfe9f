import sqlite3

import pytest

from wikidb.dump_reader import PageRecord
from wikidb.export import (
    SQL_FILE,
    TSV_DIR,
    export_sql,
    export_tsv,
    load_sql_store,
    load_store,
    sql_literal,
    tsv_escape,
    tsv_unescape,
)
from wikidb.schema_builder import TABLES, build_store


def sqlite_from(path):
    conn = sqlite3.connect(":memory:")
    conn.execute("PRAGMA foreign_keys = ON")
    conn.executescript(path.read_text(encoding="utf-8"))
    return conn


def test_sql_literal():
    assert sql_literal(None) == "NULL"
    assert sql_literal(12) == "12"
    assert sql_literal("O'Brien") == "'O''Brien'"


def test_minimal_store_has_five_tables(tmp_path):
    store = build_store([PageRecord(1, 0, "A", "a", False)], tmp_path)
    sql = export_sql(store, tmp_path / SQL_FILE).read_text()
    assert sql.count("CREATE TABLE") == 5


def test_quote_doubling(small_store, tmp_path):
    sql = export_sql(small_store, tmp_path / SQL_FILE).read_text()
    assert "'O''Brien'" in sql


def test_sql_round_trip(small_store):
    conn = sqlite_from(small_store.root / SQL_FILE)
    for table in TABLES:
        (n,) = conn.execute(f"select count(*) from {table}").fetchone()
        assert n == len(small_store.table(table))
    assert conn.execute("PRAGMA foreign_key_check").fetchall() == []
    (name,) = conn.execute("select page_name from tbl_Wiki_Page where page_id = 17").fetchone()
    assert name == "O'Brien"


def test_big_batches(big_store, tmp_path):
    conn = sqlite_from(export_sql(big_store, tmp_path / SQL_FILE))
    (n,) = conn.execute("select count(*) from tbl_Wiki_Page_Links").fetchone()
    assert n == len(big_store.links) > 500


@pytest.mark.parametrize("value", ["", "plain", "a\tb", "line\nbreak\r", "back\\slash\\t", "\\"])
def test_tsv_escape_round_trip(value):
    escaped = tsv_escape(value)
    assert "\t" not in escaped and "\n" not in escaped
    assert tsv_unescape(escaped) == value


def test_tsv_null_is_empty():
    assert tsv_escape(None) == ""


def test_tsv_files(small_store):
    tsv = small_store.root / TSV_DIR
    redirect = (tsv / "tbl_Wiki_Page_Redirect.tsv").read_text()
    assert redirect == (
        "Page_id\tRedirected_page_title\tRedirected_page_id\n"
        "14\tAlpha\t12\n15\tGamma\t14\n16\tMissing page\t\n"
    )
    for table, (_, columns) in TABLES.items():
        lines = (tsv / f"{table}.tsv").read_text().splitlines()
        assert lines[0].split("\t") == list(columns)
        assert len(lines) - 1 == len(small_store.table(table))


def test_load_store_round_trip(small_store):
    loaded = load_store(small_store.root)
    for table in TABLES:
        assert loaded.table(table) == small_store.table(table)
    assert loaded.stats == small_store.stats


def test_load_store_escaped_strings(tmp_path):
    store = build_store([PageRecord(1, 0, "Tab\\name", "[[B|x\ty]]", False),
                         PageRecord(2, 0, "B", "", False)], tmp_path)
    export_tsv(store, tmp_path / TSV_DIR)
    assert load_store(tmp_path).links == store.links
    assert load_store(tmp_path).pages == store.pages


def test_load_store_falls_back_to_sql(small_store, tmp_path):
    export_sql(small_store, tmp_path / SQL_FILE)
    loaded = load_store(tmp_path)
    for table in TABLES:
        assert loaded.table(table) == small_store.table(table)
    assert load_sql_store(tmp_path).links == small_store.links


def test_load_store_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_store(tmp_path)


def test_load_store_bad_header(small_store, tmp_path):
    export_tsv(small_store, tmp_path / TSV_DIR)
    path = tmp_path / TSV_DIR / "tbl_Wiki_Page.tsv"
    path.write_text("wrong\n")
    with pytest.raises(ValueError):
        load_store(tmp_path)
