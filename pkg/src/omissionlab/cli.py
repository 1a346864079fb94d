"""Command-line interface.

Subcommands wire JSONL corpora through labeling, metrics, analyses,
perturbations, detection, and pairwise scoring. All randomness sits behind
``--seed``; every JSON report echoes its effective configuration; reruns
with identical inputs and flags produce byte-identical outputs regardless
of ``--threads``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import analysis as analysis_mod
from . import corpus as corpus_mod
from .corpus import Example, PredictionRow, ReadStats, read_corpus, write_corpus
from .detector import DetectorConfig, build_idf, detect as detect_one, score_utterances
from .labeler import LabelerConfig, label_example
from .metrics import (
    DetectionResult,
    aggregate_detection,
    eval_detection,
    render_detection_table,
)
from .oracle import OracleConfig
from .perturb import emit_refinement_input, make_partition, perturb
from .simmetrics import bleu, levenshtein, rouge_l, rouge_n
from .textnorm import load_stopwords

STOPWORDS_ENV = "OMISSIONLAB_STOPWORDS"


class UsageError(ValueError):
    pass


def _stopwords_from(args) -> frozenset[str] | None:
    path = getattr(args, "stopwords", None) or os.environ.get(STOPWORDS_ENV)
    return load_stopwords(path) if path else None


def _labeler_config(args) -> LabelerConfig:
    oracle = OracleConfig(
        scoring=args.oracle_scoring,
        token_mode=args.oracle_tokens,
        include_speakers=args.oracle_speakers,
        max_size=args.max_oracle_size,
    )
    return LabelerConfig(
        word_match=args.word_match,
        redundancy=args.redundancy,
        overlap_speakers=not args.no_overlap_speakers,
        oracle=oracle,
        stopwords=_stopwords_from(args),
    )


def _config_echo(args, keys: list[str]) -> dict:
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _add_labeler_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--word-match", choices=("stem", "surface"), default="stem",
                   help="word comparison level for omission identification")
    p.add_argument("--redundancy", choices=("subset", "strict", "union"),
                   default="subset", help="redundancy-removal mode")
    p.add_argument("--oracle-scoring", choices=("recall", "f1"), default="recall",
                   help="greedy-oracle objective")
    p.add_argument("--oracle-tokens", choices=("stem", "plain"), default="stem",
                   help="token normalization inside the oracle scorer")
    p.add_argument("--oracle-speakers", action="store_true",
                   help="include speaker names in oracle-scored text")
    p.add_argument("--no-overlap-speakers", action="store_true",
                   help="exclude speaker names from word-overlap extraction")
    p.add_argument("--max-oracle-size", type=int, default=None,
                   help="cap on oracle size (default: unlimited)")
    p.add_argument("--stopwords", default=None,
                   help=f"stop-word override file (or ${STOPWORDS_ENV})")


_LABELER_ECHO = [
    "word_match", "redundancy", "oracle_scoring", "oracle_tokens",
    "oracle_speakers", "no_overlap_speakers", "max_oracle_size", "stopwords",
]


@dataclass(frozen=True)
class _LabelTask:
    example: Example
    config: LabelerConfig


def _label_worker(task: _LabelTask) -> Example:
    return label_example(task.example, task.config)


def cmd_label(args) -> int:
    config = _labeler_config(args)
    stats = ReadStats()
    examples = list(read_corpus(args.input, "raw", on_error=args.on_error, stats=stats))
    tasks = [_LabelTask(ex, config) for ex in examples]
    if args.threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            labeled = list(pool.map(_label_worker, tasks, chunksize=8))
    else:
        labeled = [_label_worker(t) for t in tasks]
    write_corpus(labeled, args.output, "labeled")
    n_cands = sum(len(ex.candidates) for ex in labeled)
    print(f"labeled {len(labeled)} examples ({n_cands} candidates); "
          f"skipped {stats.errors} malformed lines", file=sys.stderr)
    return 0


def cmd_metrics(args) -> int:
    config = _labeler_config(args)
    examples = list(read_corpus(args.input, "labeled"))
    rows = analysis_mod.candidate_metric_rows(examples, config)
    balance = analysis_mod.label_balance(examples)
    by_source: dict[str, list[float]] = {}
    for r in rows:
        by_source.setdefault(r["source"], []).append(r["omission_rate"])
    report = {
        "config": _config_echo(args, _LABELER_ECHO + ["input"]),
        "pairs": len(rows),
        "mean_omission_rate": (sum(r["omission_rate"] for r in rows) / len(rows))
        if rows else None,
        "mean_omission_rate_by_source": {
            s: sum(v) / len(v) for s, v in sorted(by_source.items())
        },
        "label_balance": {
            "positives": balance.positives,
            "negatives": balance.negatives,
            "ratio": balance.ratio,
        },
        "per_candidate": rows,
    }
    Path(args.output).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n",
                                 encoding="utf-8")
    return 0


def _detection_results(
    examples: list[Example],
    predictions: list[PredictionRow],
    include_speakers: bool,
    stopwords,
) -> tuple[list[tuple[Example, str, DetectionResult]], int]:
    by_pair = {(p.id, p.cid): p for p in predictions}
    known = set()
    results = []
    missing = 0
    for ex in examples:
        for cand in ex.candidates:
            key = (ex.id, cand.cid)
            known.add(key)
            labels = ex.labels[cand.cid]
            row = by_pair.get(key)
            if row is None:
                missing += 1
                predicted: tuple[int, ...] = ()
            else:
                predicted = row.predicted
            res = eval_detection(
                predicted, labels.omission_labels,
                {k: list(v) for k, v in labels.omission_words.items()},
                ex.dialogue, include_speakers, stopwords,
            )
            results.append((ex, cand.cid, res))
    unknown = [k for k in by_pair if k not in known]
    if unknown:
        raise UsageError(f"predictions reference unknown pairs, e.g. {unknown[0]}")
    return results, missing


def cmd_eval_detect(args) -> int:
    examples = list(read_corpus(args.labeled, "labeled"))
    predictions = list(read_corpus(args.predictions, "predictions"))
    stopwords = _stopwords_from(args)
    results, missing = _detection_results(
        examples, predictions, not args.no_overlap_speakers, stopwords)
    groups: dict[str, list[DetectionResult]] = {"overall": [r for _, _, r in results]}
    if args.group_by:
        for ex, cid, res in results:
            g = analysis_mod._group_of(ex, cid, args.group_by)
            groups.setdefault(g, []).append(res)
    table = {g: aggregate_detection(rs, args.aggregate) for g, rs in groups.items()}
    report = {
        "config": _config_echo(args, ["labeled", "predictions", "group_by",
                                      "aggregate", "no_overlap_speakers"]),
        "pairs": len(results),
        "pairs_without_prediction": missing,
        "groups": {
            g: {
                "precision": a.prf.precision,
                "recall": a.prf.recall,
                "f1": a.prf.f1,
                "wr": a.wr,
                "pairs": a.pairs,
            }
            for g, a in table.items()
        },
        "per_pair": [
            {
                "id": ex.id, "cid": cid,
                "precision": r.prf.precision, "recall": r.prf.recall,
                "f1": r.prf.f1, "wr": r.wr, "predicted": list(r.predicted),
            }
            for ex, cid, r in results
        ],
    }
    Path(args.output).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n",
                                 encoding="utf-8")
    if args.table:
        print(render_detection_table(table))
    return 0


def cmd_analyze(args) -> int:
    config = _labeler_config(args)
    examples = list(read_corpus(args.input, "labeled"))
    edges = tuple(int(x) for x in args.buckets.split(",")) if args.buckets \
        else analysis_mod.DEFAULT_BUCKET_EDGES
    rows = analysis_mod.candidate_metric_rows(examples, config)
    histogram = analysis_mod.position_histogram(examples, edges)
    balance = analysis_mod.label_balance(examples)
    report = {
        "config": _config_echo(args, _LABELER_ECHO + ["input", "group_by", "buckets"]),
        "omission_error_fraction": analysis_mod.omission_error_fraction(
            examples, args.group_by),
        "position_histogram": histogram,
        "label_balance": {
            "positives": balance.positives,
            "negatives": balance.negatives,
            "ratio": balance.ratio,
        },
        "correlations": analysis_mod.correlation_report(rows),
    }
    Path(args.output).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n",
                                 encoding="utf-8")
    if args.csv_dir:
        _write_analysis_csvs(Path(args.csv_dir), report, rows)
    if args.histogram_tsv:
        _write_histogram_tsv(Path(args.histogram_tsv), histogram)
    return 0


def _write_analysis_csvs(csv_dir: Path, report: dict, rows: list[dict]) -> None:
    import csv

    csv_dir.mkdir(parents=True, exist_ok=True)
    with (csv_dir / "error_fraction.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["group", "fraction"])
        for g, v in report["omission_error_fraction"].items():
            w.writerow([g, v])
    with (csv_dir / "correlations.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["metric", "pearson_r", "reason"])
        for m, entry in report["correlations"].items():
            if m.startswith("_"):
                continue
            w.writerow([m, entry.get("r"), entry.get("reason", "")])
    with (csv_dir / "label_balance.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["positives", "negatives", "ratio"])
        b = report["label_balance"]
        w.writerow([b["positives"], b["negatives"], b["ratio"]])
    with (csv_dir / "position_histogram.csv").open("w", newline="",
                                                   encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["bucket", "decile", "mass"])
        for bucket, masses in report["position_histogram"].items():
            for d, m in enumerate(masses):
                w.writerow([bucket, d, m])
    if rows:
        cols = sorted({k for r in rows for k in r})
        with (csv_dir / "per_candidate.csv").open("w", newline="", encoding="utf-8") as f:
            w = csv.DictWriter(f, fieldnames=cols)
            w.writeheader()
            w.writerows(rows)


def _write_histogram_tsv(path: Path, histogram: dict[str, list[float]]) -> None:
    lines = ["bucket\tdecile\tmass"]
    for bucket, masses in histogram.items():
        for d, m in enumerate(masses):
            lines.append(f"{bucket}\t{d}\t{m}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_perturb(args) -> int:
    examples = list(read_corpus(args.input, "labeled"))
    rows = []
    tsv_lines = []
    ordinal = 0
    for ex in examples:
        for cand in ex.candidates:
            labels = ex.labels[cand.cid]
            base = make_partition(labels.omission_labels, len(ex.dialogue))
            result = perturb(base, args.scheme, args.rate, args.seed ^ ordinal)
            ordinal += 1
            if result.warning:
                print(f"{ex.id}/{cand.cid}: {result.warning}", file=sys.stderr)
            rows.append(PredictionRow(id=ex.id, cid=cand.cid,
                                      predicted=result.partition.omission))
            if args.refinement_tsv:
                line = emit_refinement_input(
                    cand.text, result.partition, ex.dialogue, sep=args.sep,
                    include_speakers=not args.no_overlap_speakers)
                tsv_lines.append(f"{ex.id}·{cand.cid}\t{line}")
    write_corpus(rows, args.output, "predictions")
    if args.refinement_tsv:
        Path(args.refinement_tsv).write_text("\n".join(tsv_lines) + "\n",
                                             encoding="utf-8")
    return 0


def cmd_select_diverse(args) -> int:
    if args.format == "lines":
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
        candidates = [ln for ln in lines if ln.strip()]
        picked = corpus_mod.select_diverse(candidates, args.k)
        out = json.dumps(picked)
        if args.output:
            Path(args.output).write_text(out + "\n", encoding="utf-8")
        else:
            print(out)
        return 0
    examples = list(read_corpus(args.input, "raw"))
    pruned = []
    for ex in examples:
        if len(ex.candidates) <= args.k:
            pruned.append(ex)
            continue
        picked = corpus_mod.select_diverse([c.text for c in ex.candidates], args.k)
        keep = [ex.candidates[i] for i in sorted(picked)]
        scores = {c.cid: ex.external_scores[c.cid] for c in keep
                  if c.cid in ex.external_scores}
        pruned.append(Example(dialogue=ex.dialogue, reference=ex.reference,
                              candidates=tuple(keep), external_scores=scores))
    write_corpus(pruned, args.output, "raw")
    return 0


def cmd_detect(args) -> int:
    schema = "labeled" if args.labeled else "raw"
    examples = list(read_corpus(args.input, schema))
    stopwords = _stopwords_from(args)
    include_speakers = not args.no_overlap_speakers
    if args.idf_corpus:
        idf_examples = list(read_corpus(args.idf_corpus, "raw"))
    else:
        idf_examples = examples
    idf = build_idf([e.dialogue for e in idf_examples], args.idf_floor,
                    include_speakers, stopwords)
    rows = []
    for ex in examples:
        for cand in ex.candidates:
            top_k = args.top_k
            budget_zero = False
            if args.top_k_gold:
                if not args.labeled:
                    raise UsageError("--top-k-gold requires --labeled input")
                gold_size = len(ex.labels[cand.cid].omission_labels)
                budget_zero = gold_size == 0
                top_k = gold_size or None
            config = DetectorConfig(threshold=args.threshold, top_k=top_k,
                                    idf_floor=args.idf_floor)
            if budget_zero:
                predicted: tuple[int, ...] = ()
            else:
                predicted = detect_one(ex.dialogue, cand.text, idf, config,
                                       include_speakers, stopwords)
            scores = score_utterances(ex.dialogue, cand.text, idf, config,
                                      include_speakers, stopwords)
            rows.append(PredictionRow(
                id=ex.id, cid=cand.cid, predicted=predicted,
                scores=tuple(round(s, 6) for s in scores)))
    write_corpus(rows, args.output, "predictions")
    return 0


def cmd_score(args) -> int:
    def read_text(inline: str | None, path: str | None, name: str) -> str:
        if inline is not None:
            return inline
        if path is not None:
            return Path(path).read_text(encoding="utf-8")
        raise UsageError(f"provide --{name} or --{name}-file")

    cand = read_text(args.candidate, args.candidate_file, "candidate")
    ref = read_text(args.reference, args.reference_file, "reference")
    r1 = rouge_n(cand, ref, 1)
    r2 = rouge_n(cand, ref, 2)
    rl = rouge_l(cand, ref)
    out = {
        "rouge-1": {"precision": r1.precision, "recall": r1.recall, "f1": r1.f1},
        "rouge-2": {"precision": r2.precision, "recall": r2.recall, "f1": r2.f1},
        "rouge-l": {"precision": rl.precision, "recall": rl.recall, "f1": rl.f1},
        "bleu": bleu(cand, ref, args.max_n),
        "levenshtein": levenshtein(cand, ref),
    }
    print(json.dumps(out, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omissionlab",
        description="Utterance-level omission labeling, metrics, and analyses "
                    "for dialogue summarization corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("label", help="label a raw corpus with omission annotations")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--on-error", choices=("abort", "skip"), default="abort")
    p.add_argument("--threads", type=int, default=1)
    _add_labeler_flags(p)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("metrics", help="omission-rate report for a labeled corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_labeler_flags(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("eval-detect", help="evaluate predictions against labels")
    p.add_argument("--labeled", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--group-by", choices=analysis_mod.GROUP_KEYS, default=None)
    p.add_argument("--aggregate", choices=("micro", "macro"), default="micro")
    p.add_argument("--table", action="store_true", help="print a text table")
    p.add_argument("--no-overlap-speakers", action="store_true")
    p.add_argument("--stopwords", default=None)
    p.set_defaults(func=cmd_eval_detect)

    p = sub.add_parser("analyze", help="corpus analyses over a labeled corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--group-by", choices=analysis_mod.GROUP_KEYS, default="source")
    p.add_argument("--buckets", default=None,
                   help="comma-separated dialogue-length bucket edges")
    p.add_argument("--csv-dir", default=None)
    p.add_argument("--histogram-tsv", default=None)
    p.add_argument("--threads", type=int, default=1)
    _add_labeler_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("perturb", help="perturb omission partitions, emit "
                                       "refinement inputs")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True,
                   help="perturbed omission groups (predictions JSONL)")
    p.add_argument("--scheme", choices=("drop_recall", "drop_precision", "swap"),
                   required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refinement-tsv", default=None)
    p.add_argument("--sep", default="<sep>")
    p.add_argument("--no-overlap-speakers", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("select-diverse", help="pick the k most diverse candidates")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--format", choices=("lines", "corpus"), default="lines")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_select_diverse)

    p = sub.add_parser("detect", help="run the heuristic reference-free detector")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--labeled", action="store_true",
                   help="input uses the labeled schema")
    p.add_argument("--idf-corpus", default=None,
                   help="fit IDF on this raw corpus instead of the input")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--top-k-gold", action="store_true",
                   help="per-pair budget equal to the gold omission count")
    p.add_argument("--idf-floor", type=float, default=1.0)
    p.add_argument("--no-overlap-speakers", action="store_true")
    p.add_argument("--stopwords", default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("score", help="pairwise ROUGE/BLEU/Levenshtein")
    p.add_argument("--candidate", default=None)
    p.add_argument("--candidate-file", default=None)
    p.add_argument("--reference", default=None)
    p.add_argument("--reference-file", default=None)
    p.add_argument("--max-n", type=int, default=4)
    p.set_defaults(func=cmd_score)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (UsageError, corpus_mod.SchemaError, corpus_mod.MalformedLineError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
