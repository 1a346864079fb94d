"""Reference-free lexical omission detector.

A deliberately simple baseline so the detection task runs end to end
without neural dependencies: an utterance scores by the inverse document
frequency of its content stems that are absent from the candidate summary,
normalized by its content-stem count. The reference summary is never read.

The estimator follows the scikit-learn convention: construct with
hyper-parameters, ``fit`` on a corpus of dialogues (builds the IDF table),
``predict`` on (dialogue, candidate) pairs, with ``get_params`` /
``set_params`` for composition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Dialogue
from .textnorm import normalize_tokens


@dataclass(frozen=True)
class DetectorConfig:
    threshold: float = 0.0
    top_k: int | None = None
    idf_floor: float = 1.0

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be >= 1 when set")


def _dialogue_stems(
    dialogue: Dialogue, include_speakers: bool, stopwords: frozenset[str] | None
) -> set[str]:
    stems: set[str] = set()
    for u in dialogue.utterances:
        text = f"{u.speaker}: {u.text}" if include_speakers and u.speaker else u.text
        stems |= {w.stem for w in normalize_tokens(text, stopwords)}
    return stems


def build_idf(
    dialogues: Iterable[Dialogue],
    idf_floor: float = 1.0,
    include_speakers: bool = True,
    stopwords: frozenset[str] | None = None,
) -> dict[str, float]:
    """Smoothed IDF per stem: ln((1 + D) / (1 + df)) + 1, floored."""
    dialogues = list(dialogues)
    if not dialogues:
        raise ValueError("at least one dialogue is required")
    df: dict[str, int] = {}
    for d in dialogues:
        for stem in _dialogue_stems(d, include_speakers, stopwords):
            df[stem] = df.get(stem, 0) + 1
    n = len(dialogues)
    return {
        stem: max(math.log((1 + n) / (1 + k)) + 1, idf_floor)
        for stem, k in df.items()
    }


def score_utterances(
    dialogue: Dialogue,
    candidate_text: str,
    idf: dict[str, float],
    config: DetectorConfig = DetectorConfig(),
    include_speakers: bool = True,
    stopwords: frozenset[str] | None = None,
) -> list[float]:
    """Per-utterance omission scores; 0.0 for utterances with no content."""
    cand_stems = {w.stem for w in normalize_tokens(candidate_text, stopwords)}
    scores = []
    for u in dialogue.utterances:
        text = f"{u.speaker}: {u.text}" if include_speakers and u.speaker else u.text
        stems = {w.stem for w in normalize_tokens(text, stopwords)}
        if not stems:
            scores.append(0.0)
            continue
        missing = stems - cand_stems
        total = sum(idf.get(s, config.idf_floor) for s in missing)
        scores.append(total / len(stems))
    return scores


def detect(
    dialogue: Dialogue,
    candidate_text: str,
    idf: dict[str, float],
    config: DetectorConfig = DetectorConfig(),
    include_speakers: bool = True,
    stopwords: frozenset[str] | None = None,
) -> tuple[int, ...]:
    """Ascending indices of predicted omission utterances."""
    scores = score_utterances(dialogue, candidate_text, idf, config,
                              include_speakers, stopwords)
    if config.top_k is not None:
        ranked = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        picked = [i for i in ranked[: config.top_k] if scores[i] > 0.0]
        return tuple(sorted(picked))
    return tuple(i for i, s in enumerate(scores) if s > config.threshold)


class NotFittedError(ValueError):
    pass


class HeuristicDetector:
    """IDF-weighted coverage detector with a scikit-learn style interface."""

    def __init__(
        self,
        threshold: float = 0.0,
        top_k: int | None = None,
        idf_floor: float = 1.0,
        include_speakers: bool = True,
        stopwords: frozenset[str] | None = None,
    ):
        self.threshold = threshold
        self.top_k = top_k
        self.idf_floor = idf_floor
        self.include_speakers = include_speakers
        self.stopwords = stopwords

    def get_params(self, deep: bool = True) -> dict:
        return {
            "threshold": self.threshold,
            "top_k": self.top_k,
            "idf_floor": self.idf_floor,
            "include_speakers": self.include_speakers,
            "stopwords": self.stopwords,
        }

    def set_params(self, **params) -> "HeuristicDetector":
        for key, value in params.items():
            if key not in self.get_params():
                raise ValueError(f"invalid parameter {key!r}")
            setattr(self, key, value)
        return self

    def _config(self) -> DetectorConfig:
        return DetectorConfig(self.threshold, self.top_k, self.idf_floor)

    def fit(self, dialogues: Iterable[Dialogue], y=None) -> "HeuristicDetector":
        self.idf_ = build_idf(dialogues, self.idf_floor,
                              self.include_speakers, self.stopwords)
        return self

    def _check_fitted(self):
        if not hasattr(self, "idf_"):
            raise NotFittedError("detector is not fitted; call fit() first")

    def score(self, dialogue: Dialogue, candidate_text: str) -> list[float]:
        self._check_fitted()
        return score_utterances(dialogue, candidate_text, self.idf_, self._config(),
                                self.include_speakers, self.stopwords)

    def predict(
        self, pairs: Sequence[tuple[Dialogue, str]]
    ) -> list[tuple[int, ...]]:
        self._check_fitted()
        return [
            detect(d, c, self.idf_, self._config(),
                   self.include_speakers, self.stopwords)
            for d, c in pairs
        ]

    def predict_one(
        self, dialogue: Dialogue, candidate_text: str, top_k: int | None = None
    ) -> tuple[int, ...]:
        self._check_fitted()
        cfg = self._config()
        if top_k is not None:
            cfg = DetectorConfig(self.threshold, top_k, self.idf_floor)
        return detect(dialogue, candidate_text, self.idf_, cfg,
                      self.include_speakers, self.stopwords)
