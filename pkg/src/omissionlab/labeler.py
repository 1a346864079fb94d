"""The three-step omission-labeling pipeline.

1. Oracle extraction: gold and candidate oracles via the greedy oracle.
2. Omission identification: for every gold-oracle utterance u, the
   omission words are the reference-overlap words of u not covered (at the
   configured match level) by the candidate-overlap words of u; u is an
   omission candidate iff that set is non-empty. The uniform word-level
   rule covers both utterances absent from the candidate oracle and
   partially covered ones.
3. Redundancy removal: drop utterances whose omission words carry no
   information beyond another retained utterance (mode-dependent, see
   :func:`remove_redundancy`).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .corpus import CandidateLabels, Dialogue, Example
from .oracle import DEFAULT_ORACLE_CONFIG, OracleConfig, OracleSets, extract_oracles
from .textnorm import NormalizedWord, overlap_words

REDUNDANCY_MODES = ("subset", "strict", "union")


@dataclass(frozen=True)
class LabelerConfig:
    word_match: str = "stem"       # "stem" | "surface"
    redundancy: str = "subset"     # "subset" | "strict" | "union"
    overlap_speakers: bool = True  # speaker names take part in word overlap
    oracle: OracleConfig = DEFAULT_ORACLE_CONFIG
    stopwords: frozenset[str] | None = None


DEFAULT_LABELER_CONFIG = LabelerConfig()


@dataclass(frozen=True)
class OmissionCandidate:
    """A gold-oracle utterance with its non-empty omission-word set."""

    index: int
    words: tuple[NormalizedWord, ...]

    def stems(self) -> frozenset[str]:
        return frozenset(w.stem for w in self.words)


@dataclass(frozen=True)
class OmissionRecord:
    labels: tuple[int, ...]
    words: dict[int, tuple[str, ...]]


def _overlap_text(dialogue: Dialogue, index: int, include_speakers: bool) -> str:
    u = dialogue.utterances[index]
    if include_speakers and u.speaker:
        return f"{u.speaker}: {u.text}"
    return u.text


def gold_overlaps(
    dialogue: Dialogue,
    reference: str,
    gold: tuple[int, ...],
    config: LabelerConfig = DEFAULT_LABELER_CONFIG,
) -> dict[int, tuple[NormalizedWord, ...]]:
    """Reference-overlap word sets for every gold-oracle utterance."""
    return {
        u: tuple(
            overlap_words(
                _overlap_text(dialogue, u, config.overlap_speakers),
                reference,
                match=config.word_match,
                stopwords=config.stopwords,
            )
        )
        for u in gold
    }


def identify_omissions(
    dialogue: Dialogue,
    reference: str,
    candidate_text: str,
    gold: tuple[int, ...],
    config: LabelerConfig = DEFAULT_LABELER_CONFIG,
) -> list[OmissionCandidate]:
    """Omission candidates in ascending utterance order."""
    out: list[OmissionCandidate] = []
    for u in gold:
        text = _overlap_text(dialogue, u, config.overlap_speakers)
        w_gold = overlap_words(text, reference, match=config.word_match,
                               stopwords=config.stopwords)
        w_cand_keys = {
            w.key(config.word_match)
            for w in overlap_words(text, candidate_text, match=config.word_match,
                                   stopwords=config.stopwords)
        }
        words = tuple(w for w in w_gold if w.key(config.word_match) not in w_cand_keys)
        if words:
            out.append(OmissionCandidate(index=u, words=words))
    return out


def remove_redundancy(
    candidates: list[OmissionCandidate], mode: str = "subset"
) -> OmissionRecord:
    """Collapse redundant omission candidates.

    * ``subset`` (default): drop u when its stem set is a strict subset of
      another candidate's, or equal to an earlier candidate's. The retained
      stem union always equals the pre-removal union.
    * ``strict``: drop u only on stem-set equality with an earlier
      candidate (keep the front position).
    * ``union``: forward pass; drop u when its stems are already covered
      by the union of previously retained candidates.
    """
    if mode not in REDUNDANCY_MODES:
        raise ValueError(f"unknown redundancy mode: {mode!r}")
    if sorted(c.index for c in candidates) != [c.index for c in candidates]:
        raise ValueError("candidates must be sorted by index ascending")
    kept: list[OmissionCandidate] = []
    if mode == "union":
        covered: set[str] = set()
        for cand in candidates:
            stems = cand.stems()
            if stems <= covered:
                continue
            covered |= stems
            kept.append(cand)
    else:
        for i, cand in enumerate(candidates):
            s = cand.stems()
            drop = False
            for j, other in enumerate(candidates):
                if i == j:
                    continue
                t = other.stems()
                if mode == "subset" and s < t:
                    drop = True
                    break
                if s == t and other.index < cand.index:
                    drop = True
                    break
            if not drop:
                kept.append(cand)
    return OmissionRecord(
        labels=tuple(c.index for c in kept),
        words={c.index: tuple(w.surface for w in c.words) for c in kept},
    )


def label_candidate(
    dialogue: Dialogue,
    reference: str,
    candidate_text: str,
    config: LabelerConfig = DEFAULT_LABELER_CONFIG,
) -> tuple[OracleSets, OmissionRecord]:
    oracles = extract_oracles(dialogue, reference, candidate_text, config.oracle)
    candidates = identify_omissions(dialogue, reference, candidate_text,
                                    oracles.gold, config)
    record = remove_redundancy(candidates, config.redundancy)
    return oracles, record


def label_example(
    example: Example, config: LabelerConfig = DEFAULT_LABELER_CONFIG
) -> Example:
    """Label every candidate of an example; returns a labeled copy."""
    from .oracle import greedy_oracle

    gold = greedy_oracle(example.dialogue, example.reference, config.oracle)
    labels: dict[str, CandidateLabels] = {}
    for cand in example.candidates:
        cand_oracle = greedy_oracle(example.dialogue, cand.text, config.oracle)
        candidates = identify_omissions(example.dialogue, example.reference,
                                        cand.text, gold, config)
        record = remove_redundancy(candidates, config.redundancy)
        labels[cand.cid] = CandidateLabels(
            gold_oracle=gold,
            candidate_oracle=cand_oracle,
            omission_labels=record.labels,
            omission_words={k: v for k, v in record.words.items()},
        )
    return replace(example, labels=labels)
