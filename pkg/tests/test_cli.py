import subprocess
import sys

import pytest

from wikidb.cli import main, read_id_file


@pytest.fixture(scope="module")
def store_dir(small_dump, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "out"
    assert main(["build", "--dump", str(small_dump), "--out", str(out)]) == 0
    return out


def ids(tmp_path, name, values):
    p = tmp_path / name
    p.write_text("# staged ids\n" + "".join(f"{v}\n" for v in values))
    return str(p)


def test_build_layout(store_dir, capsys):
    assert (store_dir / "texts").is_dir()
    assert (store_dir / "wikidb.sql").is_file()
    assert sorted(p.name for p in (store_dir / "tsv").iterdir()) == [
        "tbl_Wiki_Page.tsv", "tbl_Wiki_Page_Categories.tsv", "tbl_Wiki_Page_Links.tsv",
        "tbl_Wiki_Page_Paragraphs.tsv", "tbl_Wiki_Page_Redirect.tsv",
    ]


def test_build_prints_stats(small_dump, tmp_path, capsys):
    assert main(["build", "--dump", str(small_dump), "--out", str(tmp_path), "--format", "sql"]) == 0
    out = capsys.readouterr().out
    assert "dropped_red_links=1\n" in out and "skipped_namespaces=1\n" in out
    assert not (tmp_path / "tsv").exists()


def test_build_custom_stop_words(small_dump, tmp_path, capsys):
    stop = tmp_path / "stop.txt"
    stop.write_text("alpha\n")
    out = tmp_path / "out"
    assert main(["build", "--dump", str(small_dump), "--out", str(out), "--stop-words", str(stop)]) == 0
    assert "12\tAlpha\ttexts/012/12.txt\t1\t\n" in (out / "tsv" / "tbl_Wiki_Page.tsv").read_text()


def test_build_from_stdin(small_dump, tmp_path):
    out = tmp_path / "out"
    with open(small_dump, "rb") as fh:
        done = subprocess.run([sys.executable, "-m", "wikidb", "build", "--dump", "-", "--out", str(out)],
                              stdin=fh, capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    assert "pages=7" in done.stdout


def test_missing_out_is_usage_error(small_dump, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["build", "--dump", str(small_dump)])
    assert exc.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_malformed_dump_exit_2(small_dump, tmp_path, capsys):
    bad = tmp_path / "bad.xml"
    bad.write_bytes(small_dump.read_bytes()[:700])
    assert main(["build", "--dump", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "byte" in capsys.readouterr().err


def test_memory_budget_env(small_dump, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("WIKIDB_MEMORY_BUDGET", "junk")
    assert main(["build", "--dump", str(small_dump), "--out", str(tmp_path)]) == 1
    monkeypatch.setenv("WIKIDB_MEMORY_BUDGET", "1")
    assert main(["build", "--dump", str(small_dump), "--out", str(tmp_path)]) == 0
    assert main(["build", "--dump", str(small_dump), "--out", str(tmp_path), "--memory-budget", "0"]) == 1


def test_query_shared_category(store_dir, capsys):
    assert main(["query", "shared-category", "--category", "691014", "--store", str(store_dir)]) == 0
    assert capsys.readouterr().out == "12\tAlpha\n13\tBeta\n"


def test_query_cross_links(store_dir, tmp_path, capsys):
    g1, g2 = ids(tmp_path, "g1", [12, 13]), ids(tmp_path, "g2", [13, 12])
    assert main(["query", "cross-links", "--group1", g1, "--group2", g2, "--store", str(store_dir)]) == 0
    assert capsys.readouterr().out == "12\t13\n13\t12\n"


def test_query_cross_links_empty(store_dir, tmp_path, capsys):
    g = ids(tmp_path, "g", [])
    assert main(["query", "cross-links", "--group1", g, "--group2", g, "--store", str(store_dir)]) == 0
    assert capsys.readouterr().out == ""


def test_query_redirect_counts(store_dir, tmp_path, capsys):
    p = ids(tmp_path, "p", [14, 15, 16])
    assert main(["query", "redirect-counts", "--pages", p, "--store", str(store_dir)]) == 0
    assert capsys.readouterr().out == "12\t1\n14\t1\n\t1\n"


def test_query_paragraph_links(store_dir, capsys):
    args = ["query", "paragraph-links", "--page", "12", "--paragraph", "1", "--store", str(store_dir)]
    assert main(args) == 0
    assert capsys.readouterr().out == "14\n13\n"


def test_query_paragraph_not_found(store_dir, capsys):
    args = ["query", "paragraph-links", "--page", "12", "--paragraph", "9", "--store", str(store_dir)]
    assert main(args) == 3
    assert "no paragraph 9" in capsys.readouterr().err


def test_query_bad_flags(store_dir):
    with pytest.raises(SystemExit) as exc:
        main(["query", "shared-category", "--category", "x", "--store", str(store_dir)])
    assert exc.value.code == 1


def test_bad_id_file(store_dir, tmp_path):
    p = tmp_path / "p"
    p.write_text("12\nabc\n")
    assert main(["query", "redirect-counts", "--pages", str(p), "--store", str(store_dir)]) == 1


def test_read_id_file(tmp_path):
    p = tmp_path / "ids"
    p.write_text("# head\n1\n\n 22  # note\n")
    assert read_id_file(str(p)) == [1, 22]


def test_stats(store_dir, capsys):
    assert main(["stats", "--store", str(store_dir)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[:5] == [
        "tbl_Wiki_Page\t7", "tbl_Wiki_Page_Redirect\t3", "tbl_Wiki_Page_Categories\t2",
        "tbl_Wiki_Page_Links\t4", "tbl_Wiki_Page_Paragraphs\t6",
    ]
    for line in out[:5]:
        table, count = line.split("\t")
        rows = (store_dir / "tsv" / f"{table}.tsv").read_text().count("\n") - 1
        assert rows == int(count)


def test_stats_missing_store(tmp_path, capsys):
    assert main(["stats", "--store", str(tmp_path)]) == 1


def test_output_deterministic(store_dir, capsys):
    args = ["query", "shared-category", "--category", "691014", "--store", str(store_dir)]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
