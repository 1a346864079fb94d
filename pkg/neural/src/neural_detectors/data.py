"""Corpus reading and tokenization for the detection frameworks.

Consumes the labeled JSONL contract of the omissionlab `label` subcommand
and emits its predictions JSONL contract. The reference summary field is
never read anywhere in this package: detection is reference-agnostic by
construction, at training time (labels only) and at inference.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<s>", "</s>"
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class Pair:
    """One (dialogue, candidate) instance with optional omission labels."""

    example_id: str
    cid: str
    utterances: tuple[str, ...]
    candidate: str
    labels: tuple[int, ...] | None


def load_pairs(path: str | Path, require_labels: bool = False) -> list[Pair]:
    pairs: list[Pair] = []
    with Path(path).open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            utterances = tuple(u["text"] for u in obj["dialogue"])
            for cand in obj.get("candidates", []):
                labels = cand.get("omission_labels")
                if labels is None and require_labels:
                    raise ValueError(
                        f"{path}:{lineno}: candidate {cand.get('cid')!r} "
                        "has no omission labels; run the labeler first")
                pairs.append(Pair(
                    example_id=obj["id"],
                    cid=cand["cid"],
                    utterances=utterances,
                    candidate=cand["text"],
                    labels=tuple(labels) if labels is not None else None,
                ))
    if not pairs:
        raise ValueError(f"no candidate pairs found in {path}")
    return pairs


@dataclass
class Vocab:
    token_to_id: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for special in (PAD, UNK, BOS, EOS):
            self.token_to_id.setdefault(special, len(self.token_to_id))

    def __len__(self) -> int:
        return len(self.token_to_id)

    def add(self, token: str) -> None:
        self.token_to_id.setdefault(token, len(self.token_to_id))

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.token_to_id[UNK]
        return [self.token_to_id.get(t, unk) for t in tokens]

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD]

    @property
    def bos_id(self) -> int:
        return self.token_to_id[BOS]

    @property
    def eos_id(self) -> int:
        return self.token_to_id[EOS]

    def to_json(self) -> dict:
        return dict(self.token_to_id)

    @classmethod
    def from_json(cls, obj: dict) -> "Vocab":
        return cls(token_to_id={str(k): int(v) for k, v in obj.items()})


def build_vocab(pairs: list[Pair], max_size: int = 20000) -> Vocab:
    """Frequency-ordered vocabulary over candidates and utterances only."""
    from collections import Counter

    counts: Counter = Counter()
    for p in pairs:
        counts.update(tokenize(p.candidate))
        for u in p.utterances:
            counts.update(tokenize(u))
    vocab = Vocab()
    for token, _ in counts.most_common(max_size):
        vocab.add(token)
    return vocab


def write_predictions(rows: list[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
