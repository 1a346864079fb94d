"""Per-framework smoke training, prediction contract, and evaluation wiring."""

import json
import subprocess

import pytest

from neural_detectors.data import load_pairs, write_predictions
from neural_detectors.frameworks import FrameworkSpec
from neural_detectors.run import load_model, predict_pairs, train

# one-epoch settings that learn the smoke signal from a cold start
SMOKE = {
    "pairwise": dict(learning_rate=2e-3, batch_size=8),
    "seqlabel": dict(learning_rate=2e-3, batch_size=4),
    "pointer": dict(learning_rate=5e-3, batch_size=2),
}

_model_cache = {}


def trained_model_dir(kind, smoke_corpus):
    if kind not in _model_cache:
        spec = FrameworkSpec(kind=kind, epochs=1, max_len=192, **SMOKE[kind])
        model_dir = smoke_corpus["root"] / f"model_{kind}"
        train(smoke_corpus["labeled"], model_dir, spec, seed=0)
        _model_cache[kind] = model_dir
    return _model_cache[kind]


def micro_f1_via_eval_detect(labeler_cli, labeled, predictions, out_dir, tag):
    report_path = out_dir / f"report_{tag}.json"
    subprocess.run([labeler_cli, "eval-detect", "--labeled", str(labeled),
                    "--predictions", str(predictions),
                    "--output", str(report_path)], check=True)
    report = json.loads(report_path.read_text(encoding="utf-8"))
    return report["groups"]["overall"]["f1"]


@pytest.mark.parametrize("kind", ["pairwise", "seqlabel", "pointer"])
def test_loss_is_finite_and_decreasing(kind, smoke_corpus):
    model_dir = trained_model_dir(kind, smoke_corpus)
    log = json.loads((model_dir / "training_log.json").read_text())
    assert all(l == l and abs(l) != float("inf") for l in log)
    half = len(log) // 2
    first = sum(log[:half]) / half
    second = sum(log[half:]) / (len(log) - half)
    assert second < first, f"{kind}: loss {first:.4f} -> {second:.4f}"


@pytest.mark.parametrize("kind", ["pairwise", "seqlabel", "pointer"])
def test_manifest_records_framework(kind, smoke_corpus):
    model_dir = trained_model_dir(kind, smoke_corpus)
    manifest = json.loads((model_dir / "manifest.json").read_text())
    assert manifest["framework"]["kind"] == kind
    assert manifest["framework"]["epochs"] == 1
    assert manifest["seed"] == 0
    assert manifest["vocab_size"] > 4


@pytest.mark.parametrize("kind", ["pairwise", "seqlabel", "pointer"])
def test_predictions_schema_and_ranges(kind, smoke_corpus):
    model_dir = trained_model_dir(kind, smoke_corpus)
    model, _, _ = load_model(model_dir)
    pairs = load_pairs(smoke_corpus["labeled"])
    rows = predict_pairs(model, pairs)
    assert len(rows) == len(pairs)
    by_pair = {(p.example_id, p.cid): p for p in pairs}
    for row in rows:
        pair = by_pair[(row["id"], row["cid"])]
        n = len(pair.utterances)
        assert row["predicted"] == sorted(set(row["predicted"]))
        assert all(0 <= i < n for i in row["predicted"])
        assert len(row["predicted"]) <= n
        assert len(row["scores"]) == n


@pytest.mark.parametrize("kind", ["pairwise", "seqlabel", "pointer"])
def test_beats_all_negative_baseline_via_eval_detect(
        kind, smoke_corpus, labeler_cli, tmp_path):
    model_dir = trained_model_dir(kind, smoke_corpus)
    model, _, _ = load_model(model_dir)
    pairs = load_pairs(smoke_corpus["labeled"])
    rows = predict_pairs(model, pairs)
    preds = tmp_path / "preds.jsonl"
    write_predictions(rows, preds)

    baseline_rows = [{"id": p.example_id, "cid": p.cid, "predicted": []}
                     for p in pairs]
    baseline = tmp_path / "allneg.jsonl"
    write_predictions(baseline_rows, baseline)

    model_f1 = micro_f1_via_eval_detect(
        labeler_cli, smoke_corpus["labeled"], preds, tmp_path, f"{kind}")
    baseline_f1 = micro_f1_via_eval_detect(
        labeler_cli, smoke_corpus["labeled"], baseline, tmp_path, "allneg")
    assert baseline_f1 == 0.0
    assert model_f1 > baseline_f1, f"{kind}: F1 {model_f1}"


@pytest.mark.parametrize("kind", ["pairwise", "seqlabel", "pointer"])
def test_reference_blindness_at_inference(kind, smoke_corpus, tmp_path):
    model_dir = trained_model_dir(kind, smoke_corpus)
    model, _, _ = load_model(model_dir)
    base_rows = predict_pairs(model, load_pairs(smoke_corpus["labeled"]))

    mutated = tmp_path / "mutated.jsonl"
    with open(smoke_corpus["labeled"], encoding="utf-8") as src, \
            open(mutated, "w", encoding="utf-8") as dst:
        for line in src:
            obj = json.loads(line)
            obj["reference"] = "a completely different reference summary"
            dst.write(json.dumps(obj) + "\n")
    mutated_rows = predict_pairs(model, load_pairs(mutated))
    assert mutated_rows == base_rows


def test_pairwise_single_pair_corpus_emits_one_decision(tmp_path):
    rec = {"id": "solo", "domain": "t",
           "dialogue": [{"index": 0, "speaker": "", "text": "only turn here"}],
           "reference": "irrelevant",
           "candidates": [{"cid": "c1", "text": "a summary", "source": "m",
                           "strategy": "beam", "gold_oracle": [0],
                           "candidate_oracle": [0], "omission_labels": [0],
                           "omission_words": {"0": ["turn"]}}]}
    corpus = tmp_path / "solo.jsonl"
    corpus.write_text(json.dumps(rec) + "\n", encoding="utf-8")
    spec = FrameworkSpec(kind="pairwise", epochs=1, learning_rate=1e-3,
                         batch_size=1, max_len=64)
    model_dir = tmp_path / "model"
    train(corpus, model_dir, spec, seed=0)
    model, _, _ = load_model(model_dir)
    rows = predict_pairs(model, load_pairs(corpus))
    assert len(rows) == 1
    assert len(rows[0]["scores"]) == 1
    assert rows[0]["predicted"] in ([], [0])


def test_pointer_halts_within_budget(smoke_corpus):
    model_dir = trained_model_dir("pointer", smoke_corpus)
    model, _, _ = load_model(model_dir)
    pairs = load_pairs(smoke_corpus["labeled"])
    for pair in pairs[:10]:
        predicted, _scores = model.predict_pair(pair)
        assert len(predicted) <= len(pair.utterances)


def test_train_requires_labels(tmp_path, smoke_corpus):
    raw = smoke_corpus["raw"]
    spec = FrameworkSpec(kind="pairwise", epochs=1)
    with pytest.raises(ValueError):
        train(raw, tmp_path / "m", spec)


def test_predict_accepts_raw_corpus(smoke_corpus, tmp_path):
    from neural_detectors.run import predict

    model_dir = trained_model_dir("pairwise", smoke_corpus)
    out = tmp_path / "raw_preds.jsonl"
    n = predict(model_dir, smoke_corpus["raw"], out)
    assert n == 50
    first = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
    assert set(first) == {"id", "cid", "predicted", "scores"}


def test_cli_train_and_predict(smoke_corpus, tmp_path, labeler_cli):
    from neural_detectors.cli import main

    model_dir = tmp_path / "climodel"
    assert main(["train", "--framework", "pairwise",
                 "--input", str(smoke_corpus["labeled"]),
                 "--model-dir", str(model_dir),
                 "--epochs", "1", "--learning-rate", "2e-3",
                 "--batch-size", "8", "--max-len", "192"]) == 0
    preds = tmp_path / "preds.jsonl"
    assert main(["predict", "--model-dir", str(model_dir),
                 "--input", str(smoke_corpus["labeled"]),
                 "--output", str(preds)]) == 0
    f1 = micro_f1_via_eval_detect(labeler_cli, smoke_corpus["labeled"],
                                  preds, tmp_path, "cli")
    assert f1 > 0.0


def test_unknown_framework_rejected():
    with pytest.raises(ValueError):
        FrameworkSpec(kind="magic")
    with pytest.raises(ValueError):
        FrameworkSpec(kind="pairwise", encoder="hub-base-uncased")
