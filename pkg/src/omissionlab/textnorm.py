"""Word normalization and overlap extraction for omission identification.

Normalization: case folding, splitting on any non-alphanumeric character,
dropping single-character tokens, removing stop words, Porter stemming.
Overlap extraction supports two match keys:

* ``stem``: two words agree when their Porter stems agree (default);
* ``surface``: two words agree when their case-folded forms agree.

The shipped stop-word list can be overridden with a one-word-per-line
UTF-8 file (see :func:`load_stopwords`), or globally via the
``OMISSIONLAB_STOPWORDS`` environment variable handled by the CLI.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import porter

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

MATCH_MODES = ("stem", "surface")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stop-word set; the embedded English list when path is None."""
    if path is None:
        text = (
            resources.files("omissionlab")
            .joinpath("data/stopwords_en.txt")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().casefold() for w in text.splitlines() if w.strip())


_DEFAULT_STOPWORDS = load_stopwords()


@dataclass(frozen=True)
class NormalizedWord:
    """A content word: original form plus its stemmed, case-folded form."""

    surface: str
    stem: str

    def key(self, match: str = "stem") -> str:
        if match == "stem":
            return self.stem
        if match == "surface":
            return self.surface.casefold()
        raise ValueError(f"unknown match mode: {match!r}")


def normalize_tokens(
    text: str, stopwords: frozenset[str] | None = None
) -> list[NormalizedWord]:
    """Split, case-fold, drop stop words and single characters, stem.

    Order is preserved and duplicates are retained. Purely numeric tokens
    are kept (they can carry salient facts).
    """
    stop = _DEFAULT_STOPWORDS if stopwords is None else stopwords
    out: list[NormalizedWord] = []
    for tok in _TOKEN_RE.findall(text.casefold()):
        if len(tok) <= 1 or tok in stop:
            continue
        out.append(NormalizedWord(surface=tok, stem=porter.stem(tok)))
    return out


def overlap_words(
    utterance_text: str,
    summary_text: str,
    match: str = "stem",
    stopwords: frozenset[str] | None = None,
) -> list[NormalizedWord]:
    """Utterance content words that also occur in the summary.

    Matching and deduplication use the chosen key; the surviving surface
    form is the first occurrence in the utterance, in utterance order.
    """
    if match not in MATCH_MODES:
        raise ValueError(f"unknown match mode: {match!r}")
    summary_keys = {w.key(match) for w in normalize_tokens(summary_text, stopwords)}
    seen: set[str] = set()
    out: list[NormalizedWord] = []
    for word in normalize_tokens(utterance_text, stopwords):
        k = word.key(match)
        if k in summary_keys and k not in seen:
            seen.add(k)
            out.append(word)
    return out
