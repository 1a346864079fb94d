"""Data model and JSONL corpus I/O for dialogues, candidates, and labels.

One JSON object per line, UTF-8. Three schemas:

* ``raw``: dialogue, reference, candidates, optional external scores;
* ``labeled``: raw plus per-candidate oracle/omission annotations;
* ``predictions``: detector output rows ``{id, cid, predicted, scores}``.

Index arrays are 0-based and ascending.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Iterator

from .simmetrics import levenshtein


def sample_path(name: str) -> Path:
    """Path of an embedded sample corpus (e.g. ``sample_support.jsonl``)."""
    return Path(str(resources.files("omissionlab").joinpath(f"data/{name}")))


class SchemaError(ValueError):
    """A structurally valid JSON record that violates the corpus schema."""


class MalformedLineError(ValueError):
    """A line that is not a JSON object at all."""


@dataclass(frozen=True)
class Utterance:
    index: int
    speaker: str
    text: str


@dataclass(frozen=True)
class Dialogue:
    id: str
    domain: str
    utterances: tuple[Utterance, ...]

    def __len__(self) -> int:
        return len(self.utterances)


@dataclass(frozen=True)
class CandidateRecord:
    cid: str
    text: str
    source: str
    strategy: str


@dataclass(frozen=True)
class CandidateLabels:
    """Per-candidate annotation block of the labeled schema."""

    gold_oracle: tuple[int, ...]
    candidate_oracle: tuple[int, ...]
    omission_labels: tuple[int, ...]
    omission_words: dict[int, tuple[str, ...]]


@dataclass(frozen=True)
class Example:
    dialogue: Dialogue
    reference: str
    candidates: tuple[CandidateRecord, ...]
    external_scores: dict[str, dict[str, float]] = field(default_factory=dict)
    labels: dict[str, CandidateLabels] = field(default_factory=dict)

    @property
    def id(self) -> str:
        return self.dialogue.id

    def candidate(self, cid: str) -> CandidateRecord:
        for c in self.candidates:
            if c.cid == cid:
                return c
        raise KeyError(cid)


@dataclass(frozen=True)
class PredictionRow:
    id: str
    cid: str
    predicted: tuple[int, ...]
    scores: tuple[float, ...] = ()


SCHEMAS = ("raw", "labeled", "predictions")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaError(msg)


def _parse_utterance(obj: Any, pos: int) -> Utterance:
    _require(isinstance(obj, dict), "utterance must be an object")
    _require(
        isinstance(obj.get("index"), int) and obj["index"] == pos,
        f"utterance indices must be consecutive from 0 (expected {pos})",
    )
    return Utterance(
        index=pos, speaker=str(obj.get("speaker", "")), text=str(obj.get("text", ""))
    )


def _parse_index_array(obj: Any, name: str, n: int) -> tuple[int, ...]:
    _require(isinstance(obj, list), f"{name} must be an array")
    vals = []
    for v in obj:
        _require(isinstance(v, int) and 0 <= v < n, f"{name} index out of range: {v}")
        vals.append(v)
    _require(vals == sorted(set(vals)), f"{name} must be ascending and unique")
    return tuple(vals)


def _parse_labels(obj: dict, n: int) -> CandidateLabels:
    gold = _parse_index_array(obj["gold_oracle"], "gold_oracle", n)
    cand = _parse_index_array(obj["candidate_oracle"], "candidate_oracle", n)
    labels = _parse_index_array(obj["omission_labels"], "omission_labels", n)
    _require(set(labels) <= set(gold), "omission_labels must be a subset of gold_oracle")
    words_raw = obj.get("omission_words", {})
    _require(isinstance(words_raw, dict), "omission_words must be an object")
    words: dict[int, tuple[str, ...]] = {}
    for k, v in words_raw.items():
        idx = int(k)
        _require(idx in labels, f"omission_words key {k} not in omission_labels")
        _require(isinstance(v, list) and len(v) > 0, "omission word lists must be non-empty")
        words[idx] = tuple(str(w) for w in v)
    _require(set(words) == set(labels), "every omission label needs an omission word list")
    return CandidateLabels(gold, cand, labels, words)


def parse_example(obj: Any, schema: str) -> Example:
    _require(isinstance(obj, dict), "record must be a JSON object")
    _require(isinstance(obj.get("id"), str) and obj["id"], "id must be a non-empty string")
    utts_raw = obj.get("dialogue")
    _require(isinstance(utts_raw, list) and len(utts_raw) >= 1, "dialogue must be non-empty")
    utts = tuple(_parse_utterance(u, i) for i, u in enumerate(utts_raw))
    dialogue = Dialogue(id=obj["id"], domain=str(obj.get("domain", "")), utterances=utts)
    reference = obj.get("reference")
    _require(isinstance(reference, str) and reference.strip() != "", "reference must be non-empty")
    cands_raw = obj.get("candidates", [])
    _require(isinstance(cands_raw, list), "candidates must be an array")
    candidates = []
    seen_cids: set[str] = set()
    labels: dict[str, CandidateLabels] = {}
    for c in cands_raw:
        _require(isinstance(c, dict), "candidate must be an object")
        cid = str(c.get("cid", ""))
        _require(cid != "" and cid not in seen_cids, f"candidate cid missing or duplicated: {cid!r}")
        seen_cids.add(cid)
        candidates.append(
            CandidateRecord(
                cid=cid,
                text=str(c.get("text", "")),
                source=str(c.get("source", "")),
                strategy=str(c.get("strategy", "")),
            )
        )
        if schema == "labeled":
            _require("gold_oracle" in c, f"candidate {cid}: labeled schema requires gold_oracle")
            labels[cid] = _parse_labels(c, len(utts))
    scores_raw = obj.get("external_scores", {}) or {}
    _require(isinstance(scores_raw, dict), "external_scores must be an object")
    external_scores = {
        str(cid): {str(m): float(v) for m, v in metrics.items()}
        for cid, metrics in scores_raw.items()
    }
    for cid in external_scores:
        _require(cid in seen_cids, f"external_scores references unknown cid {cid!r}")
    return Example(
        dialogue=dialogue,
        reference=reference,
        candidates=tuple(candidates),
        external_scores=external_scores,
        labels=labels,
    )


def parse_prediction(obj: Any) -> PredictionRow:
    _require(isinstance(obj, dict), "record must be a JSON object")
    _require(isinstance(obj.get("id"), str) and obj["id"], "id must be a non-empty string")
    _require(isinstance(obj.get("cid"), str) and obj["cid"], "cid must be a non-empty string")
    pred_raw = obj.get("predicted")
    _require(isinstance(pred_raw, list), "predicted must be an array")
    pred = []
    for v in pred_raw:
        _require(isinstance(v, int) and v >= 0, f"predicted index invalid: {v}")
        pred.append(v)
    _require(pred == sorted(set(pred)), "predicted must be ascending and unique")
    scores = tuple(float(s) for s in obj.get("scores", []))
    return PredictionRow(id=obj["id"], cid=obj["cid"], predicted=tuple(pred), scores=scores)


def example_to_dict(ex: Example, schema: str) -> dict:
    cands = []
    for c in ex.candidates:
        d: dict[str, Any] = {
            "cid": c.cid,
            "text": c.text,
            "source": c.source,
            "strategy": c.strategy,
        }
        if schema == "labeled":
            lab = ex.labels[c.cid]
            d["gold_oracle"] = list(lab.gold_oracle)
            d["candidate_oracle"] = list(lab.candidate_oracle)
            d["omission_labels"] = list(lab.omission_labels)
            d["omission_words"] = {str(k): list(v) for k, v in sorted(lab.omission_words.items())}
        cands.append(d)
    out: dict[str, Any] = {
        "id": ex.dialogue.id,
        "domain": ex.dialogue.domain,
        "dialogue": [
            {"index": u.index, "speaker": u.speaker, "text": u.text}
            for u in ex.dialogue.utterances
        ],
        "reference": ex.reference,
        "candidates": cands,
    }
    if ex.external_scores:
        out["external_scores"] = {
            cid: dict(metrics) for cid, metrics in ex.external_scores.items()
        }
    return out


def prediction_to_dict(row: PredictionRow) -> dict:
    out: dict[str, Any] = {"id": row.id, "cid": row.cid, "predicted": list(row.predicted)}
    if row.scores:
        out["scores"] = list(row.scores)
    return out


@dataclass
class ReadStats:
    lines: int = 0
    records: int = 0
    errors: int = 0


def read_corpus(
    path: str | Path,
    schema: str = "raw",
    on_error: str = "abort",
    stats: ReadStats | None = None,
) -> Iterator[Example | PredictionRow]:
    """Yield validated records in file order.

    Malformed lines (not parseable JSON objects) either abort with the line
    number or, with ``on_error="skip"``, are counted in ``stats`` and
    skipped. Schema violations always abort.
    """
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}")
    if on_error not in ("abort", "skip"):
        raise ValueError(f"on_error must be 'abort' or 'skip', got {on_error!r}")
    p = Path(path)
    with p.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if stats is not None:
                stats.lines += 1
            if line.strip() == "":
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise MalformedLineError("line is not a JSON object")
            except (json.JSONDecodeError, MalformedLineError) as e:
                if on_error == "skip":
                    if stats is not None:
                        stats.errors += 1
                    continue
                raise MalformedLineError(f"{p}:{lineno}: {e}") from e
            try:
                if schema == "predictions":
                    rec: Example | PredictionRow = parse_prediction(obj)
                else:
                    rec = parse_example(obj, schema)
            except SchemaError as e:
                raise SchemaError(f"{p}:{lineno}: {e}") from e
            if stats is not None:
                stats.records += 1
            yield rec


def write_corpus(
    records: Iterable[Example | PredictionRow],
    path: str | Path,
    schema: str = "raw",
) -> int:
    """Write one record per line; returns the number of records written."""
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}")
    n = 0
    with Path(path).open("w", encoding="utf-8") as f:
        for rec in records:
            if schema == "predictions":
                obj = prediction_to_dict(rec)  # type: ignore[arg-type]
            else:
                obj = example_to_dict(rec, schema)  # type: ignore[arg-type]
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")
            n += 1
    return n


def select_diverse(candidates: list[str], k: int) -> list[int]:
    """Indices of the k candidates with the largest average edit distance.

    Character-level Levenshtein against every other candidate, averaged
    over n-1 (0.0 for a single candidate). Ties break toward the lower
    original index; output is sorted by score descending, then index.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not candidates:
        raise ValueError("candidates must be non-empty")
    n = len(candidates)
    totals = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            d = levenshtein(candidates[i], candidates[j])
            totals[i] += d
            totals[j] += d
    averages = [t / (n - 1) if n > 1 else 0.0 for t in totals]
    order = sorted(range(n), key=lambda i: (-averages[i], i))
    return order[: min(k, n)]
