from __future__ import annotations

import sys
from collections import Counter
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dumpgen import random_dump  # noqa: E402
from wikidb.dump_reader import filter_namespaces, open_dump  # noqa: E402
from wikidb.export import SQL_FILE, TSV_DIR, export_sql, export_tsv  # noqa: E402
from wikidb.schema_builder import build_store  # noqa: E402

DATA = Path(__file__).parent / "data"

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def build(dump: Path, out: Path, **kwargs):
    skipped: Counter = Counter()
    store = build_store(filter_namespaces(open_dump(dump), skipped), out,
                        skipped_namespaces=skipped, **kwargs)
    export_sql(store, out / SQL_FILE)
    export_tsv(store, out / TSV_DIR)
    return store


@pytest.fixture(scope="session")
def small_dump() -> Path:
    return DATA / "small.xml"


@pytest.fixture(scope="session")
def small_store(small_dump, tmp_path_factory):
    return build(small_dump, tmp_path_factory.mktemp("small"))


@pytest.fixture(scope="session")
def big_dump(tmp_path_factory) -> Path:
    return random_dump(tmp_path_factory.mktemp("gen") / "big.xml", n_pages=240, seed=7)


@pytest.fixture(scope="session")
def big_store(big_dump, tmp_path_factory):
    return build(big_dump, tmp_path_factory.mktemp("big"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, label = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {label}")
