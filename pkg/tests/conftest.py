"""Shared fixtures: synthetic corpora with planted omissions."""

import random

import pytest

from omissionlab.corpus import (
    CandidateRecord,
    Dialogue,
    Example,
    Utterance,
    write_corpus,
)

FILLER = ["okay, noted.", "hm, I see.", "right, makes sense.", "sure thing."]


def synthetic_example(rng: random.Random, ident: int, n_covered: int = 4,
                      n_planted: int = 2, n_filler: int = 3) -> Example:
    """A dialogue whose reference covers content utterances, with the planted
    subset missing from the candidate. Labeling yields exactly the planted
    utterances; their unique words are rare (high IDF) across a corpus."""
    content = []
    for j in range(n_covered):
        w1 = f"matter{ident}x{j}"
        w2 = f"detail{ident}y{j}"
        content.append((w1, w2, f"we discussed {w1} and also {w2} today."))
    filler = [FILLER[k % len(FILLER)] for k in range(n_filler)]
    texts = [t for _, _, t in content] + filler
    order = list(range(len(texts)))
    rng.shuffle(order)
    utterances = tuple(
        Utterance(i, "Ana" if i % 2 == 0 else "Ben", texts[j])
        for i, j in enumerate(order)
    )
    content_positions = [order.index(j) for j in range(n_covered)]
    planted = sorted(rng.sample(content_positions, n_planted))
    ref_parts = [f"{w1} came up along with {w2}." for w1, w2, _ in content]
    reference = " ".join(ref_parts)
    cand_parts = [
        f"{content[j][0]} came up along with {content[j][1]}."
        for j in range(n_covered)
        if order.index(j) not in planted
    ]
    candidate = " ".join(cand_parts) if cand_parts else "nothing of note."
    dialogue = Dialogue(id=f"syn-{ident:04d}", domain="synthetic",
                        utterances=utterances)
    return Example(
        dialogue=dialogue,
        reference=reference,
        candidates=(CandidateRecord(cid="c1", text=candidate,
                                    source="toy", strategy="beam"),),
    ), tuple(planted)


def build_synthetic_corpus(n: int, seed: int = 0):
    rng = random.Random(seed)
    examples, planted = [], {}
    for i in range(n):
        n_covered = rng.randint(3, 5)
        n_planted = rng.randint(1, n_covered - 1)
        ex, p = synthetic_example(rng, i, n_covered=n_covered,
                                  n_planted=n_planted)
        examples.append(ex)
        planted[ex.id] = p
    return examples, planted


@pytest.fixture(scope="session")
def synthetic_corpus():
    return build_synthetic_corpus(50, seed=20240501)


@pytest.fixture()
def synthetic_raw_path(tmp_path, synthetic_corpus):
    examples, _ = synthetic_corpus
    path = tmp_path / "synthetic_raw.jsonl"
    write_corpus(examples, path, "raw")
    return path
