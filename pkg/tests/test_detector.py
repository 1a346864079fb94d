"""Heuristic reference-free detector."""

import math

import pytest

from omissionlab.corpus import Dialogue, Utterance
from omissionlab.detector import (
    DetectorConfig,
    HeuristicDetector,
    NotFittedError,
    build_idf,
    detect,
    score_utterances,
)


def make_dialogue(texts, id="d"):
    return Dialogue(id=id, domain="t",
                    utterances=tuple(Utterance(i, "", t)
                                     for i, t in enumerate(texts)))


def test_idf_formula():
    d1 = make_dialogue(["common words everywhere"], id="a")
    d2 = make_dialogue(["common words and a rarity"], id="b")
    idf = build_idf([d1, d2], idf_floor=0.0)
    assert idf["common"] == pytest.approx(math.log(3 / 3) + 1)     # df = 2
    assert idf["rariti"] == pytest.approx(math.log(3 / 2) + 1)     # df = 1


def test_idf_floor_applies():
    d = make_dialogue(["word"])
    idf = build_idf([d], idf_floor=2.5)
    assert all(v >= 2.5 for v in idf.values())


def test_idf_requires_dialogues():
    with pytest.raises(ValueError):
        build_idf([])


def test_candidate_covering_everything_yields_empty():
    d = make_dialogue(["the engineer replied", "the forum thread moved"])
    idf = build_idf([d])
    got = detect(d, "engineer replied forum thread moved", idf)
    assert got == ()


def test_empty_candidate_topk_returns_content_utterances():
    d = make_dialogue(["engineer replied", "forum thread", "me too!"])
    idf = build_idf([d])
    got = detect(d, "", idf, DetectorConfig(top_k=len(d)))
    assert got == (0, 1)   # "me too!" has no content stems


def test_high_idf_utterance_ranks_first():
    docs = [make_dialogue(["the usual report arrived", "see you tomorrow"],
                          id=f"bg{i}") for i in range(20)]
    target = make_dialogue([
        "the usual report arrived",
        "the flamingo escaped the enclosure",
        "see you tomorrow",
    ], id="target")
    idf = build_idf(docs + [target])
    scores = score_utterances(target, "the usual report arrived", idf)
    assert scores[1] == max(scores)
    got = detect(target, "the usual report arrived", idf,
                 DetectorConfig(top_k=1))
    assert got == (1,)


def test_reference_blindness():
    d = make_dialogue(["engineer replied", "forum thread"])
    idf = build_idf([d])
    a = detect(d, "a candidate", idf)
    assert a == detect(d, "a candidate", idf)  # nothing else to vary


def test_monotonicity_removing_candidate_word():
    d = make_dialogue(["engineer replied to the forum"])
    idf = build_idf([d])
    full = score_utterances(d, "engineer replied forum", idf)
    less = score_utterances(d, "engineer replied", idf)
    assert all(b >= a for a, b in zip(full, less))


def test_threshold_shrinks_predictions():
    d = make_dialogue(["engineer replied", "forum thread", "alpha beta"])
    idf = build_idf([d])
    prev = None
    for thr in (0.0, 0.5, 1.0, 2.0, 10.0):
        got = set(detect(d, "nothing matches", idf, DetectorConfig(threshold=thr)))
        if prev is not None:
            assert got <= prev
        prev = got


def test_zero_content_dialogue_empty_prediction():
    d = make_dialogue(["...", "?!"])
    idf = build_idf([make_dialogue(["some words"])])
    assert detect(d, "anything", idf) == ()


def test_estimator_api():
    det = HeuristicDetector(top_k=2)
    params = det.get_params()
    assert params["top_k"] == 2
    det.set_params(threshold=0.25)
    assert det.threshold == 0.25
    with pytest.raises(ValueError):
        det.set_params(bogus=1)
    with pytest.raises(NotFittedError):
        det.predict([(make_dialogue(["a b"]), "c")])
    d = make_dialogue(["engineer replied", "forum thread"])
    det.fit([d])
    got = det.predict([(d, "engineer replied")])
    assert got == [(1,)]
    assert det.predict_one(d, "engineer replied", top_k=1) == (1,)


def test_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(threshold=-1)
    with pytest.raises(ValueError):
        DetectorConfig(top_k=0)


def test_planted_corpus_detection(synthetic_corpus):
    examples, planted = synthetic_corpus
    det = HeuristicDetector().fit([ex.dialogue for ex in examples])
    correct = total = 0
    for ex in examples:
        want = planted[ex.id]
        got = det.predict_one(ex.dialogue, ex.candidates[0].text,
                              top_k=len(want))
        correct += len(set(got) & set(want))
        total += len(want)
    assert correct / total >= 0.8
