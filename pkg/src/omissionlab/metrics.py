"""Omission rate, word-level omission recall, and detection evaluation.

Omission rate is the fraction of gold-oracle overlap words that were
omitted: sum of |W^u| over labeled utterances divided by sum of |W_G^u|
over the gold oracle. Word recall counts the gold omission-word stems
recoverable from the text of the predicted utterances. Utterance-level
detection uses standard P/R/F1 with pooled (micro) corpus aggregation.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Sized

from . import porter
from .corpus import Dialogue
from .simmetrics import PRF
from .textnorm import normalize_tokens


@dataclass(frozen=True)
class OmissionRate:
    value: float
    degenerate: bool = False


def omission_rate(
    omission_words: dict[int, Sequence[str]],
    gold_overlaps: dict[int, Sized],
) -> OmissionRate:
    """Fraction of gold-oracle overlap words that were omitted."""
    if not set(omission_words) <= set(gold_overlaps):
        raise ValueError("omission labels must be a subset of the gold oracle")
    denom = sum(len(v) for v in gold_overlaps.values())
    if denom == 0:
        return OmissionRate(0.0, degenerate=True)
    num = sum(len(v) for v in omission_words.values())
    return OmissionRate(num / denom)


def _utterance_stems(
    dialogue: Dialogue,
    index: int,
    include_speakers: bool,
    stopwords: frozenset[str] | None,
) -> set[str]:
    u = dialogue.utterances[index]
    text = f"{u.speaker}: {u.text}" if include_speakers and u.speaker else u.text
    return {w.stem for w in normalize_tokens(text, stopwords)}


@dataclass(frozen=True)
class WordRecall:
    value: float
    hits: int
    total: int
    degenerate: bool = False


def word_recall(
    predicted: Iterable[int],
    omission_words: dict[int, Sequence[str]],
    dialogue: Dialogue,
    include_speakers: bool = True,
    stopwords: frozenset[str] | None = None,
) -> WordRecall:
    """Fraction of gold omission-word stems present in predicted utterances.

    1.0 (degenerate) when there are no omission words to recall.
    """
    gold_stems = {
        porter.stem(w.casefold())
        for words in omission_words.values()
        for w in words
    }
    if not gold_stems:
        return WordRecall(1.0, 0, 0, degenerate=True)
    covered: set[str] = set()
    for i in predicted:
        covered |= _utterance_stems(dialogue, i, include_speakers, stopwords)
    hits = len(gold_stems & covered)
    return WordRecall(hits / len(gold_stems), hits, len(gold_stems))


@dataclass(frozen=True)
class DetectionResult:
    predicted: tuple[int, ...]
    prf: PRF
    wr: float
    tp: int
    fp: int
    fn: int
    wr_hits: int
    wr_total: int


def eval_detection(
    predicted: Iterable[int],
    omission_labels: Sequence[int],
    omission_words: dict[int, Sequence[str]],
    dialogue: Dialogue,
    include_speakers: bool = True,
    stopwords: frozenset[str] | None = None,
) -> DetectionResult:
    pred = tuple(sorted(set(predicted)))
    if any(i < 0 or i >= len(dialogue) for i in pred):
        raise ValueError("predicted index out of range")
    gold = set(omission_labels)
    tp = len(gold & set(pred))
    fp = len(set(pred) - gold)
    fn = len(gold - set(pred))
    if not gold and not pred:
        prf = PRF(1.0, 1.0, 1.0)
    else:
        p = tp / len(pred) if pred else 0.0
        r = tp / len(gold) if gold else 0.0
        prf = PRF.from_pr(p, r)
    wr = word_recall(pred, omission_words, dialogue, include_speakers, stopwords)
    return DetectionResult(
        predicted=pred, prf=prf, wr=wr.value,
        tp=tp, fp=fp, fn=fn, wr_hits=wr.hits, wr_total=wr.total,
    )


@dataclass(frozen=True)
class DetectionAggregate:
    prf: PRF
    wr: float
    pairs: int


def aggregate_detection(
    results: Iterable[DetectionResult], mode: str = "micro"
) -> DetectionAggregate:
    """Pool confusion counts (micro, default) or average per-pair scores."""
    results = list(results)
    if mode == "macro":
        n = len(results)
        if n == 0:
            return DetectionAggregate(PRF(0.0, 0.0, 0.0, degenerate=True), 0.0, 0)
        p = sum(r.prf.precision for r in results) / n
        rr = sum(r.prf.recall for r in results) / n
        f = sum(r.prf.f1 for r in results) / n
        wr = sum(r.wr for r in results) / n
        return DetectionAggregate(PRF(p, rr, f), wr, n)
    if mode != "micro":
        raise ValueError(f"unknown aggregation mode: {mode!r}")
    tp = sum(r.tp for r in results)
    fp = sum(r.fp for r in results)
    fn = sum(r.fn for r in results)
    hits = sum(r.wr_hits for r in results)
    total = sum(r.wr_total for r in results)
    if tp + fp + fn == 0:
        prf = PRF(1.0, 1.0, 1.0, degenerate=not results)
    else:
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        prf = PRF.from_pr(p, r)
    wr = hits / total if total else 1.0
    return DetectionAggregate(prf, wr, len(results))


def group_counter(results_by_group: dict[str, list[DetectionResult]],
                  mode: str = "micro") -> dict[str, DetectionAggregate]:
    return {g: aggregate_detection(rs, mode) for g, rs in sorted(results_by_group.items())}


def render_detection_table(
    rows: dict[str, DetectionAggregate], title: str = "detection"
) -> str:
    """Plain-text P/R/F1/WR table, one row per group."""
    width = max([len(k) for k in rows] + [len(title)])
    lines = [f"{title:<{width}}  {'P':>8} {'R':>8} {'F1':>8} {'WR':>8} {'pairs':>6}"]
    for name, agg in rows.items():
        lines.append(
            f"{name:<{width}}  {agg.prf.precision:8.4f} {agg.prf.recall:8.4f} "
            f"{agg.prf.f1:8.4f} {agg.wr:8.4f} {agg.pairs:6d}"
        )
    return "\n".join(lines)


def pooled_counts(results: Iterable[DetectionResult]) -> Counter:
    c: Counter = Counter()
    for r in results:
        c["tp"] += r.tp
        c["fp"] += r.fp
        c["fn"] += r.fn
    return c
