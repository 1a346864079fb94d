"""Smoke corpus: planted omissions with a learnable lexical signal.

The raw corpus is labeled through the primary package's CLI (an external
process); the frameworks consume only the labeled JSONL file.
"""

import json
import random
import shutil
import subprocess

import pytest

CALM = ["budget", "venue", "catering", "schedule", "travel"]
ALARM = ["refund", "outage", "deadline"]
FILLER = ["okay, noted.", "hm, I see."]


def generate_raw_corpus(path, n=50, seed=99):
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as f:
        for i in range(n):
            calm = [(rng.choice(CALM), f"item{i}x{j}")
                    for j in range(rng.randint(2, 3))]
            alarm = [(rng.choice(ALARM), f"risk{i}y{j}")
                     for j in range(rng.randint(2, 3))]
            texts = [f"settled: the {t} plan is agreed for {u}." for t, u in calm]
            texts += [f"problem: the {t} fix remains pending for {u}." for t, u in alarm]
            texts += rng.sample(FILLER, rng.randint(0, 1))
            order = list(range(len(texts)))
            rng.shuffle(order)
            utts = [{"index": k, "speaker": "Ana" if k % 2 == 0 else "Ben",
                     "text": texts[j]} for k, j in enumerate(order)]
            reference = " ".join(
                [f"settled: the {t} plan is agreed for {u}." for t, u in calm]
                + [f"problem: the {t} fix remains pending for {u}." for t, u in alarm])
            candidate = " ".join(f"settled: the {t} plan is agreed for {u}."
                                 for t, u in calm)
            rec = {"id": f"smoke-{i:04d}", "domain": "synthetic",
                   "dialogue": utts, "reference": reference,
                   "candidates": [{"cid": "c1", "text": candidate,
                                   "source": "toy", "strategy": "beam"}]}
            f.write(json.dumps(rec) + "\n")


@pytest.fixture(scope="session")
def labeler_cli():
    exe = shutil.which("omissionlab")
    if exe is None:
        pytest.skip("primary CLI 'omissionlab' is not installed")
    return exe


@pytest.fixture(scope="session")
def smoke_corpus(tmp_path_factory, labeler_cli):
    root = tmp_path_factory.mktemp("smoke")
    raw = root / "raw.jsonl"
    labeled = root / "labeled.jsonl"
    generate_raw_corpus(raw)
    subprocess.run([labeler_cli, "label", "--input", str(raw),
                    "--output", str(labeled)], check=True)
    return {"raw": raw, "labeled": labeled, "root": root}
