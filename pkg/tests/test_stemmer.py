import hashlib
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lovins_oracle
from wikidb.stemmer import (
    CONDITIONS,
    DEFAULT_STOP_WORDS,
    TABLES,
    StopWords,
    lovins_stem,
    stem_phrase,
    tokenize,
)

# Hand-derived by walking the ending and recoding tables for each word.
VECTORS = {
    "cat": "cat", "nationally": "nat", "sitting": "sit", "rome": "rom",
    "history": "histor", "absorption": "absorb", "believe": "belief",
    "dissolved": "dissolut", "decided": "decis", "relation": "rel",
    "generalizations": "general", "beta": "bes", "running": "run", "hopping": "hop",
    "engineering": "engineer", "magnesia": "magnes", "magnesium": "magnes",
    "provision": "provis", "hopeful": "hop", "happiness": "hap", "nation": "nat",
    "rational": "rat", "matrices": "matric", "matrix": "matrix", "indices": "indic",
    "analysis": "analys", "assumption": "assum", "extended": "extens",
    "concluded": "conclus", "emitted": "emis", "permitting": "permis",
    "evidence": "evid", "parenthetic": "parenthes", "cities": "cit", "city": "cit",
    "saying": "saying", "focus": "foc", "bus": "bus", "early": "ear", "metric": "meter",
    "analyze": "analys", "expanded": "expans", "metal": "metal", "crystal": "crystal",
    "adhere": "adhes", "converted": "convers", "collide": "col", "ending": "ens",
    "moment": "moment", "classes": "clas",
}

ENDINGS_SHA = "d5b3e599ea808725b9f6bda4a871cac63555a161ee563fb1134b3bb0ab3f0c0f"
RECODES_SHA = "b35f854649c38617351d839c3cc26dfa11b721c6031379bbb55601a563510e4a"

words = st.text(alphabet=string.ascii_lowercase, min_size=2, max_size=20)


def test_vector_set_size():
    assert len(VECTORS) == 50


@pytest.mark.parametrize("word,expected", sorted(VECTORS.items()))
def test_vectors(word, expected):
    assert lovins_stem(word) == expected
    assert lovins_oracle.stem(word) == expected


def test_table_integrity():
    assert len(TABLES.endings) == 294
    assert max(len(e) for e, _ in TABLES.endings) == 11
    assert len(TABLES.conditions) == 29
    assert TABLES.transformation_count == 35
    assert {c for _, c in TABLES.endings} <= set(CONDITIONS)
    assert len({e for e, _ in TABLES.endings}) == 294


def test_tables_match_transcription():
    assert dict(TABLES.endings) == lovins_oracle.ENDINGS
    got = hashlib.sha256("".join(f"{e} {c}\n" for e, c in TABLES.endings).encode())
    assert got.hexdigest() == ENDINGS_SHA
    got = hashlib.sha256(
        "".join(f"{r.old} {r.new} {r.not_after}\n" for r in TABLES.recodes).encode()
    )
    assert got.hexdigest() == RECODES_SHA


def test_no_ending_is_identity():
    for w in ("xyzzq", "ab", "matrix", "rubber"):
        assert lovins_stem(w) == w


@settings(max_examples=500)
@given(words)
def test_matches_oracle(w):
    assert lovins_stem(w) == lovins_oracle.stem(w)


@given(words)
def test_min_stem_length_and_determinism(w):
    s = lovins_stem(w)
    assert len(s) >= 2
    assert lovins_stem(w) == s


def test_stem_phrase_examples():
    assert stem_phrase("The History of Rome") == "histor rom"
    assert stem_phrase("") == ""
    assert stem_phrase("42") == "42"
    assert stem_phrase("the of and") == ""


def test_stem_phrase_tokenizes_on_punctuation():
    assert tokenize("O'Brien_x-Y 3d") == ["o", "brien", "x", "y", "3d"]
    assert stem_phrase("Running, Jumping!") == "run jump"


def test_default_stop_words():
    assert len(DEFAULT_STOP_WORDS) == 318
    assert "the" in DEFAULT_STOP_WORDS and "rome" not in DEFAULT_STOP_WORDS


def test_stop_word_file(tmp_path):
    p = tmp_path / "stop.txt"
    p.write_text("# mine\nrome\n\nhistory  # trailing\n", encoding="utf-8")
    sw = StopWords.from_file(p)
    assert set(sw.words) == {"rome", "history"}
    assert stem_phrase("The History of Rome", sw) == "th of"


@pytest.mark.parametrize("text", ["", "# only a comment\n", "Upper\n"])
def test_bad_stop_word_files(text):
    with pytest.raises(ValueError):
        StopWords.from_text(text)
