"""Lovins stemmer and stop-word aware phrase stemming.

The ending list and the recoding rules live in ``data/`` as plain text so
they can be audited against the published tables; the 29 context
conditions are small predicates and are kept in code.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

MIN_STEM = 2

_TOKEN_RE = re.compile(r"[^\W_]+")


def _stem_len(n: int) -> Callable[[str], bool]:
    return lambda s: len(s) >= n


# Each predicate receives the candidate stem (word minus ending).  The
# universal two-letter minimum is enforced separately.
CONDITIONS: dict[str, Callable[[str], bool]] = {
    "A": lambda s: True,
    "B": _stem_len(3),
    "C": _stem_len(4),
    "D": _stem_len(5),
    "E": lambda s: s[-1] != "e",
    "F": lambda s: len(s) >= 3 and s[-1] != "e",
    "G": lambda s: len(s) >= 3 and s[-1] == "f",
    "H": lambda s: s[-1] == "t" or s.endswith("ll"),
    "I": lambda s: s[-1] not in "oe",
    "J": lambda s: s[-1] not in "ae",
    "K": lambda s: len(s) >= 3 and (s[-1] in "li" or (s[-1] == "e" and s[-3] == "u")),
    "L": lambda s: s[-1] not in "ux" and (s[-1] != "s" or s[-2] == "o"),
    "M": lambda s: s[-1] not in "acem",
    "N": lambda s: len(s) >= 3 and (s[-3] != "s" or len(s) >= 4),
    "O": lambda s: s[-1] in "li",
    "P": lambda s: s[-1] != "c",
    "Q": lambda s: len(s) >= 3 and s[-1] not in "ln",
    "R": lambda s: s[-1] in "nr",
    "S": lambda s: s.endswith("dr") or (s[-1] == "t" and s[-2] != "t"),
    "T": lambda s: s[-1] == "s" or (s[-1] == "t" and s[-2] != "o"),
    "U": lambda s: s[-1] in "lmnr",
    "V": lambda s: s[-1] == "c",
    "W": lambda s: s[-1] not in "su",
    "X": lambda s: s[-1] in "li" or (len(s) >= 3 and s[-1] == "e" and s[-3] == "u"),
    "Y": lambda s: s.endswith("in"),
    "Z": lambda s: s[-1] != "f",
    "AA": lambda s: s.endswith(("d", "f", "ph", "th", "l", "er", "or", "es", "t")),
    "BB": lambda s: len(s) >= 3 and not s.endswith(("met", "ryst")),
    "CC": lambda s: s[-1] == "l",
}


@dataclass(frozen=True)
class Recode:
    old: str
    new: str
    not_after: str = ""


@dataclass(frozen=True)
class LovinsTables:
    endings: tuple[tuple[str, str], ...]
    undouble: frozenset[str]
    recodes: tuple[Recode, ...]
    conditions: dict[str, Callable[[str], bool]]

    @property
    def transformation_count(self) -> int:
        return 1 + len(self.recodes)


def _data_lines(name: str) -> Iterable[list[str]]:
    text = resources.files("wikidb").joinpath("data").joinpath(name).read_text(encoding="utf-8")
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line.split()


def load_tables() -> LovinsTables:
    endings = tuple((fields[0], fields[1]) for fields in _data_lines("lovins_endings.txt"))
    undouble: frozenset[str] = frozenset()
    recodes = []
    for fields in _data_lines("lovins_recode.txt"):
        if fields[0] == "undouble":
            undouble = frozenset(fields[1])
        else:
            recodes.append(Recode(fields[0], fields[1], fields[2] if len(fields) > 2 else ""))
    # longest first so the first hit is the longest match
    recodes.sort(key=lambda r: -len(r.old))
    return LovinsTables(endings, undouble, tuple(recodes), CONDITIONS)


TABLES = load_tables()
_BY_LENGTH: dict[int, dict[str, str]] = {}
for _ending, _cond in TABLES.endings:
    _BY_LENGTH.setdefault(len(_ending), {})[_ending] = _cond
_MAX_ENDING = max(_BY_LENGTH)


def _remove_ending(word: str) -> str | None:
    for n in range(min(_MAX_ENDING, len(word) - MIN_STEM), 0, -1):
        cond = _BY_LENGTH.get(n, {}).get(word[-n:])
        if cond is not None and CONDITIONS[cond](word[:-n]):
            return word[:-n]
    return None


def _recode(stem: str) -> str:
    if len(stem) > MIN_STEM and stem[-1] == stem[-2] and stem[-1] in TABLES.undouble:
        stem = stem[:-1]
    for rule in TABLES.recodes:
        if stem.endswith(rule.old):
            head = stem[: -len(rule.old)]
            if head and head[-1] in rule.not_after:
                return stem
            if len(head) + len(rule.new) < MIN_STEM:
                return stem
            return head + rule.new
    return stem


def lovins_stem(token: str) -> str:
    """Stem one lowercase word.

    The longest ending whose condition holds (leaving at least two
    letters) is removed and the stem is then recoded.  A word with no
    removable ending is returned as is.
    """
    stem = _remove_ending(token)
    if stem is None:
        return token
    return _recode(stem)


class StopWords:
    """A fixed stop-word set read from a one-token-per-line file."""

    def __init__(self, words: Iterable[str]):
        self.words = frozenset(words)
        if not self.words:
            raise ValueError("stop-word list is empty")
        for w in self.words:
            if w != w.lower() or any(c.isspace() for c in w):
                raise ValueError(f"bad stop word {w!r}")

    @classmethod
    def from_text(cls, text: str) -> StopWords:
        words = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                words.append(line)
        return cls(words)

    @classmethod
    def from_file(cls, path: str | Path) -> StopWords:
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> StopWords:
        return cls.from_text(
            resources.files("wikidb").joinpath("data").joinpath("stopwords.txt").read_text(encoding="utf-8")
        )

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)


DEFAULT_STOP_WORDS = StopWords.default()


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def stem_phrase(text: str, stop_words: StopWords | None = None) -> str:
    stop_words = stop_words or DEFAULT_STOP_WORDS
    out = []
    for tok in tokenize(text):
        if tok in stop_words:
            continue
        out.append(lovins_stem(tok) if tok.isalpha() else tok)
    return " ".join(out)
