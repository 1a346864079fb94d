"""Corpus-level analyses: error fractions, position distribution, label
balance, and correlations between omission rate and reference-based metrics.

ROUGE-1/2/L and BLEU are computed natively; embedding- or learning-based
metric columns (for example BERTScore or BLEURT values) are ingested from
each example's ``external_scores`` map and never computed here.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Example
from .labeler import DEFAULT_LABELER_CONFIG, LabelerConfig, gold_overlaps
from .metrics import omission_rate
from .simmetrics import UndefinedCorrelationError, bleu, pearson, rouge_l, rouge_n

GROUP_KEYS = ("domain", "source", "strategy")

DEFAULT_BUCKET_EDGES = (5, 10, 15, 20, 30)


def _group_of(example: Example, cid: str, group_by: str) -> str:
    if group_by == "domain":
        return example.dialogue.domain
    cand = example.candidate(cid)
    if group_by == "source":
        return cand.source
    if group_by == "strategy":
        return cand.strategy
    raise ValueError(f"unknown group key: {group_by!r}")


def omission_error_fraction(
    examples: Iterable[Example], group_by: str = "source"
) -> dict[str, float]:
    """Per group, the fraction of candidates with a non-empty omission set."""
    with_err: dict[str, int] = defaultdict(int)
    total: dict[str, int] = defaultdict(int)
    for ex in examples:
        for cid, labels in ex.labels.items():
            g = _group_of(ex, cid, group_by)
            total[g] += 1
            if labels.omission_labels:
                with_err[g] += 1
    return {g: with_err[g] / total[g] for g in sorted(total)}


def _bucket_label(n: int, edges: Sequence[int]) -> str:
    lo = 1
    for e in edges:
        if n <= e:
            return f"{lo}-{e}"
        lo = e + 1
    return f">{edges[-1]}"


def position_histogram(
    examples: Iterable[Example],
    bucket_edges: Sequence[int] = DEFAULT_BUCKET_EDGES,
    deciles: int = 10,
) -> dict[str, list[float]]:
    """Relative-position distribution of omission labels.

    Dialogues are grouped by utterance count into intervals; omission
    indices map to relative-position deciles; each group's row is
    normalized to sum to 1. Groups without any label are omitted.
    """
    if list(bucket_edges) != sorted(set(bucket_edges)):
        raise ValueError("bucket edges must be strictly increasing")
    counts: dict[str, list[int]] = defaultdict(lambda: [0] * deciles)
    for ex in examples:
        n = len(ex.dialogue)
        bucket = _bucket_label(n, bucket_edges)
        for labels in ex.labels.values():
            for i in labels.omission_labels:
                d = min(deciles - 1, (i * deciles) // n)
                counts[bucket][d] += 1
    out: dict[str, list[float]] = {}
    for bucket in sorted(counts):
        row = counts[bucket]
        total = sum(row)
        if total:
            out[bucket] = [c / total for c in row]
    return out


@dataclass(frozen=True)
class LabelBalance:
    positives: int
    negatives: int

    @property
    def ratio(self) -> float:
        total = self.positives + self.negatives
        return self.positives / total if total else 0.0


def label_balance(examples: Iterable[Example]) -> LabelBalance:
    """Positive (omission) vs negative utterance labels over all pairs."""
    pos = neg = 0
    for ex in examples:
        n = len(ex.dialogue)
        for labels in ex.labels.values():
            k = len(labels.omission_labels)
            pos += k
            neg += n - k
    return LabelBalance(pos, neg)


NATIVE_METRICS = ("rouge-1", "rouge-2", "rouge-l", "bleu")


def candidate_metric_rows(
    examples: Iterable[Example],
    config: LabelerConfig = DEFAULT_LABELER_CONFIG,
) -> list[dict]:
    """One row per (example, candidate): omission rate plus metric columns."""
    rows = []
    for ex in examples:
        overlap_cache: dict[tuple[int, ...], dict] = {}
        for cand in ex.candidates:
            labels = ex.labels.get(cand.cid)
            if labels is None:
                continue
            gold = labels.gold_oracle
            if gold not in overlap_cache:
                overlap_cache[gold] = gold_overlaps(ex.dialogue, ex.reference, gold, config)
            rate = omission_rate(
                {k: v for k, v in labels.omission_words.items()},
                overlap_cache[gold],
            )
            row = {
                "id": ex.id,
                "cid": cand.cid,
                "source": cand.source,
                "strategy": cand.strategy,
                "domain": ex.dialogue.domain,
                "omission_rate": rate.value,
                "degenerate": rate.degenerate,
                "rouge-1": rouge_n(cand.text, ex.reference, 1).f1,
                "rouge-2": rouge_n(cand.text, ex.reference, 2).f1,
                "rouge-l": rouge_l(cand.text, ex.reference).f1,
                "bleu": bleu(cand.text, ex.reference),
            }
            for metric, value in ex.external_scores.get(cand.cid, {}).items():
                row[metric] = value
            rows.append(row)
    return rows


def correlation_report(rows: list[dict]) -> dict[str, dict]:
    """Pearson r of each metric column against omission rate.

    Columns with undefined correlation are reported with a reason instead
    of a value.
    """
    base = [r["omission_rate"] for r in rows]
    metric_names = sorted(
        {k for r in rows for k in r}
        - {"id", "cid", "source", "strategy", "domain", "omission_rate", "degenerate"}
    )
    report: dict[str, dict] = {}
    for name in metric_names:
        pairs = [(r["omission_rate"], r[name]) for r in rows if name in r]
        if len(pairs) < 2:
            report[name] = {"r": None, "reason": "fewer than 2 values"}
            continue
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        try:
            report[name] = {"r": pearson(xs, ys), "n": len(pairs)}
        except UndefinedCorrelationError:
            report[name] = {"r": None, "reason": "zero variance"}
    report["_n_pairs"] = {"n": len(base)}
    return report
