"""Perturbation schedules over the omission / non-omission partition and
emission of refinement-model inputs.

Three schemes inject controlled errors into the omission group:

* ``drop_recall`` moves omission utterances out (precision stays 1);
* ``drop_precision`` moves non-omission utterances in (recall stays 1);
* ``swap`` exchanges utterances pairwise; at rate 1 with the omission
  group no larger than its complement, the groups are fully swapped.

The error rate is the fraction of the source group moved, rounded up so
small non-zero rates have an effect. Victims are chosen uniformly at
random under the given seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable

from .corpus import Dialogue

SCHEMES = ("drop_recall", "drop_precision", "swap")


@dataclass(frozen=True)
class Partition:
    """Disjoint split of all dialogue utterance indices."""

    omission: tuple[int, ...]
    non_omission: tuple[int, ...]

    def __post_init__(self):
        o, n = set(self.omission), set(self.non_omission)
        if o & n:
            raise ValueError("omission and non-omission groups overlap")
        if tuple(sorted(o)) != self.omission or tuple(sorted(n)) != self.non_omission:
            raise ValueError("partition groups must be ascending and unique")

    @property
    def universe(self) -> frozenset[int]:
        return frozenset(self.omission) | frozenset(self.non_omission)


def make_partition(omission_labels: Iterable[int], n_utterances: int) -> Partition:
    om = tuple(sorted(set(omission_labels)))
    if om and (om[0] < 0 or om[-1] >= n_utterances):
        raise ValueError("omission label out of range")
    non = tuple(i for i in range(n_utterances) if i not in set(om))
    return Partition(om, non)


@dataclass(frozen=True)
class PerturbResult:
    partition: Partition
    moved: int
    warning: str | None = None


def perturb(partition: Partition, scheme: str, rate: float, seed: int) -> PerturbResult:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme: {scheme!r}")
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    rng = random.Random(seed)
    om = list(partition.omission)
    non = list(partition.non_omission)

    if scheme == "drop_recall":
        if rate > 0 and not om:
            return PerturbResult(partition, 0, "omission group empty; no-op")
        m = math.ceil(rate * len(om))
        victims = set(rng.sample(om, m)) if m else set()
        new_om = [i for i in om if i not in victims]
        new_non = sorted(non + list(victims))
        return PerturbResult(Partition(tuple(new_om), tuple(new_non)), m)

    if scheme == "drop_precision":
        if rate > 0 and not non:
            return PerturbResult(partition, 0, "non-omission group empty; no-op")
        m = math.ceil(rate * len(non))
        victims = set(rng.sample(non, m)) if m else set()
        new_non = [i for i in non if i not in victims]
        new_om = sorted(om + list(victims))
        return PerturbResult(Partition(tuple(new_om), tuple(new_non)), m)

    # swap
    k = min(len(om), len(non))
    m = math.ceil(rate * k)
    if rate > 0 and k == 0:
        return PerturbResult(partition, 0, "one group empty; nothing to swap")
    out = set(rng.sample(om, m)) if m else set()
    into = set(rng.sample(non, m)) if m else set()
    new_om = sorted([i for i in om if i not in out] + list(into))
    new_non = sorted([i for i in non if i not in into] + list(out))
    return PerturbResult(Partition(tuple(new_om), tuple(new_non)), m)


def emit_refinement_input(
    candidate_text: str,
    partition: Partition,
    dialogue: Dialogue,
    sep: str = "<sep>",
    include_speakers: bool = True,
) -> str:
    """``candidate <sep> omission-utterances <sep> non-omission-utterances``.

    Each group's utterances are joined in dialogue order; an empty group
    leaves its segment empty (an empty omission group is then identical to
    candidate plus raw dialogue).
    """
    if partition.universe != frozenset(range(len(dialogue))):
        raise ValueError("partition does not cover this dialogue")

    def fmt(indices: tuple[int, ...]) -> str:
        parts = []
        for i in indices:
            u = dialogue.utterances[i]
            if include_speakers and u.speaker:
                parts.append(f"{u.speaker}: {u.text}")
            else:
                parts.append(u.text)
        return " ".join(parts)

    pieces = [candidate_text, sep]
    om = fmt(partition.omission)
    if om:
        pieces.append(om)
    pieces.append(sep)
    non = fmt(partition.non_omission)
    if non:
        pieces.append(non)
    return " ".join(pieces)
