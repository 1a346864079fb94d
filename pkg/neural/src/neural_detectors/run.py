"""Training and prediction entry points with on-disk model artifacts.

An artifact directory holds ``model.pt`` (weights), ``vocab.json``, a
``manifest.json`` recording the framework configuration for provenance,
and ``training_log.json`` with per-batch losses.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

import torch

from .data import Pair, Vocab, build_vocab, load_pairs, write_predictions
from .frameworks import FrameworkSpec, build_model


def train(
    labeled_path: str | Path,
    model_dir: str | Path,
    spec: FrameworkSpec,
    seed: int = 0,
) -> dict:
    """Train one framework on a labeled corpus and save the artifact.

    Returns the manifest, which includes the per-batch loss log.
    """
    torch.manual_seed(seed)
    rng = random.Random(seed)
    pairs = load_pairs(labeled_path, require_labels=True)
    vocab = build_vocab(pairs)
    model = build_model(vocab, spec)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)

    losses: list[float] = []
    model.train()
    for _epoch in range(spec.epochs):
        for batch in model.batches(pairs, shuffle_rng=rng):
            optimizer.zero_grad()
            loss = model.loss(batch)
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))

    out = Path(model_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out / "model.pt")
    (out / "vocab.json").write_text(json.dumps(vocab.to_json()),
                                    encoding="utf-8")
    manifest = {
        "framework": spec.to_json(),
        "seed": seed,
        "vocab_size": len(vocab),
        "pairs": len(pairs),
        "batches": len(losses),
        "first_loss": losses[0],
        "last_loss": losses[-1],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2),
                                       encoding="utf-8")
    (out / "training_log.json").write_text(json.dumps(losses),
                                           encoding="utf-8")
    return manifest


def load_model(model_dir: str | Path):
    out = Path(model_dir)
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    spec = FrameworkSpec(**manifest["framework"])
    vocab = Vocab.from_json(
        json.loads((out / "vocab.json").read_text(encoding="utf-8")))
    model = build_model(vocab, spec)
    model.load_state_dict(torch.load(out / "model.pt", weights_only=True))
    model.eval()
    return model, spec, manifest


def predict_pairs(model, pairs: list[Pair]) -> list[dict]:
    rows = []
    for pair in pairs:
        predicted, scores = model.predict_pair(pair)
        rows.append({
            "id": pair.example_id,
            "cid": pair.cid,
            "predicted": sorted(predicted),
            "scores": [round(s, 6) for s in scores],
        })
    return rows


def predict(
    model_dir: str | Path,
    corpus_path: str | Path,
    output_path: str | Path,
) -> int:
    """Run a saved model over a raw or labeled corpus; returns row count."""
    model, _spec, _manifest = load_model(model_dir)
    pairs = load_pairs(corpus_path, require_labels=False)
    rows = predict_pairs(model, pairs)
    write_predictions(rows, output_path)
    return len(rows)
