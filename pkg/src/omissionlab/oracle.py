"""Greedy extractive oracle: map a summary to its supporting utterances.

Starting from the empty set, repeatedly add the utterance that most
increases the selection's score against the summary (see
:class:`omissionlab.simmetrics.OracleScorer`); stop when no utterance adds
a strictly positive gain. Ties break toward the lower utterance index.
With the set-based scorer the selection order never affects the score, so
dialogue order is preserved by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Dialogue
from .simmetrics import OracleScorer


@dataclass(frozen=True)
class OracleConfig:
    scoring: str = "recall"      # "recall" (R1+R2+RL) | "f1" (R1+R2)
    token_mode: str = "stem"     # "stem" (Porter on tokens > 3 chars) | "plain"
    include_speakers: bool = False
    max_size: int | None = None


DEFAULT_ORACLE_CONFIG = OracleConfig()


def utterance_scored_text(speaker: str, text: str, include_speakers: bool) -> str:
    if include_speakers and speaker:
        return f"{speaker}: {text}"
    return text


@dataclass(frozen=True)
class OracleSets:
    """Oracle index sets extracted against the same dialogue."""

    gold: tuple[int, ...]
    cand: tuple[int, ...]
    degenerate: bool = False


def greedy_oracle(
    dialogue: Dialogue,
    summary_text: str,
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> tuple[int, ...]:
    """Ascending utterance indices supporting the summary.

    A summary with no tokens is degenerate and yields the empty set.
    """
    texts = [
        utterance_scored_text(u.speaker, u.text, config.include_speakers)
        for u in dialogue.utterances
    ]
    scorer = OracleScorer(texts, summary_text, config.scoring, config.token_mode)
    if scorer.degenerate:
        return ()
    selected: list[int] = []
    best = 0.0
    n = len(texts)
    while config.max_size is None or len(selected) < config.max_size:
        best_gain = 0.0
        best_idx = -1
        for i in range(n):
            if i in selected:
                continue
            gain = scorer.score(selected + [i]) - best
            if gain > best_gain + 1e-12:
                best_gain = gain
                best_idx = i
        if best_idx < 0:
            break
        selected.append(best_idx)
        best += best_gain
    return tuple(sorted(selected))


def extract_oracles(
    dialogue: Dialogue,
    reference: str,
    candidate_text: str,
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> OracleSets:
    gold = greedy_oracle(dialogue, reference, config)
    cand = greedy_oracle(dialogue, candidate_text, config)
    return OracleSets(gold=gold, cand=cand, degenerate=not gold and not cand)
