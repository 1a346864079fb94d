"""Reference-based similarity metrics: ROUGE-1/2/L, BLEU, Levenshtein, Pearson.

Metric tokenization is a case-folded split on non-alphanumeric characters
with no stop-word removal and no stemming; the stop-word/stemming rules in
:mod:`omissionlab.textnorm` apply only to omission-word comparison, not to
metric computation.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from . import porter

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Case-folded alphanumeric tokens; everything kept, nothing stemmed."""
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False

    @staticmethod
    def from_pr(p: float, r: float, degenerate: bool = False) -> "PRF":
        f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
        return PRF(p, r, f1, degenerate)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_matches(cand: Counter, ref: Counter) -> int:
    return sum(min(c, ref[g]) for g, c in cand.items())


def rouge_n(candidate_text: str, reference_text: str, n: int) -> PRF:
    """N-gram overlap with clipping over case-folded tokens."""
    if n not in (1, 2):
        raise ValueError("rouge_n supports n in {1, 2}")
    return rouge_n_tokens(tokenize(candidate_text), tokenize(reference_text), n)


def rouge_n_tokens(cand_tokens: list[str], ref_tokens: list[str], n: int) -> PRF:
    cand = _ngrams(cand_tokens, n)
    ref = _ngrams(ref_tokens, n)
    total_c = sum(cand.values())
    total_r = sum(ref.values())
    if total_c == 0 or total_r == 0:
        return PRF(0.0, 0.0, 0.0, degenerate=True)
    m = _clipped_matches(cand, ref)
    return PRF.from_pr(m / total_c, m / total_r)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate_text: str, reference_text: str) -> PRF:
    """Longest-common-subsequence overlap over case-folded tokens."""
    cand = tokenize(candidate_text)
    ref = tokenize(reference_text)
    if not cand or not ref:
        return PRF(0.0, 0.0, 0.0, degenerate=True)
    lcs = _lcs_length(cand, ref)
    return PRF.from_pr(lcs / len(cand), lcs / len(ref))


def bleu(candidate_text: str, reference_text: str, max_n: int = 4) -> float:
    """Geometric mean of modified n-gram precisions times brevity penalty.

    Orders above 1 use add-1 smoothing so that short or partially matching
    candidates keep a nonzero score.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    cand = tokenize(candidate_text)
    ref = tokenize(reference_text)
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_n = _ngrams(cand, n)
        ref_n = _ngrams(ref, n)
        matches = _clipped_matches(cand_n, ref_n)
        total = sum(cand_n.values())
        if n == 1:
            if matches == 0 or total == 0:
                return 0.0
            p = matches / total
        else:
            p = (matches + 1) / (total + 1)
        log_sum += math.log(p)
    score = math.exp(log_sum / max_n)
    if len(cand) < len(ref):
        score *= math.exp(1 - len(ref) / len(cand))
    return score


def levenshtein(a: str, b: str) -> int:
    """Minimal character insertions/deletions/substitutions from a to b."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (ca != cb),
            )
        prev = cur
    return prev[-1]


class UndefinedCorrelationError(ValueError):
    """Raised when one input to Pearson correlation has zero variance."""


def pearson(x: list[float], y: list[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("pearson requires two equal-length lists of size >= 2")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = sum(v * v for v in dx)
    syy = sum(v * v for v in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("zero variance input")
    sxy = sum(a * b for a, b in zip(dx, dy))
    return sxy / math.sqrt(sxx * syy)


# -- greedy-oracle scoring --
#
# The extractive oracle scores a set of utterances against a summary with
# summary-level ROUGE semantics: texts are sentence-split, tokens longer
# than three characters are Porter-stemmed, n-grams never cross sentence
# boundaries, and ROUGE-L takes the union of per-sentence LCS hits with
# unigram-count clipping. The default objective is the recall sum of
# ROUGE-1, ROUGE-2, and ROUGE-L; an F1 objective over ROUGE-1 + ROUGE-2
# is available.

ORACLE_SCORING_MODES = ("recall", "f1")
ORACLE_TOKEN_MODES = ("stem", "plain")

_SENT_RE = re.compile(r"(?<=[.!?])\s+")


def sentence_split(text: str) -> list[str]:
    return [p for p in _SENT_RE.split(text.strip()) if p]


def oracle_sentence_tokens(text: str, token_mode: str = "stem") -> list[list[str]]:
    """Per-sentence token lists for oracle scoring."""
    if token_mode not in ORACLE_TOKEN_MODES:
        raise ValueError(f"unknown oracle token mode: {token_mode!r}")
    out = []
    for sent in sentence_split(text):
        toks = tokenize(sent)
        if token_mode == "stem":
            toks = [porter.stem(t) if len(t) > 3 else t for t in toks]
        if toks:
            out.append(toks)
    return out


def _sent_ngrams(sents: list[list[str]], n: int) -> tuple[Counter, int]:
    d: Counter = Counter()
    total = 0
    for s in sents:
        for i in range(len(s) - n + 1):
            d[tuple(s[i : i + n])] += 1
            total += 1
    return d, total


def _lcs_hit_mask(ref_sent: list[str], hyp_sent: list[str]) -> list[bool]:
    """Reference-token positions on one LCS path against hyp_sent."""
    m, n = len(ref_sent), len(hyp_sent)
    vals = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        row = vals[i]
        prev = vals[i - 1]
        for j in range(1, n + 1):
            if ref_sent[i - 1] == hyp_sent[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = max(prev[j], row[j - 1])
    mask = [False] * m
    i, j = m, n
    while i and j:
        if ref_sent[i - 1] == hyp_sent[j - 1] and vals[i][j] == vals[i - 1][j - 1] + 1:
            mask[i - 1] = True
            i -= 1
            j -= 1
        elif vals[i - 1][j] >= vals[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return mask


class OracleScorer:
    """Scores utterance selections against one summary.

    Per-utterance n-gram tables and per-(reference-sentence, utterance)
    LCS hit masks are precomputed so each greedy trial costs O(|u| + |ref|).
    """

    def __init__(
        self,
        utterance_texts: list[str],
        summary_text: str,
        scoring: str = "recall",
        token_mode: str = "stem",
    ):
        if scoring not in ORACLE_SCORING_MODES:
            raise ValueError(f"unknown oracle scoring mode: {scoring!r}")
        self.scoring = scoring
        self.ref_sents = oracle_sentence_tokens(summary_text, token_mode)
        self.utt_sents = [oracle_sentence_tokens(t, token_mode) for t in utterance_texts]
        self.ref_ngrams = [_sent_ngrams(self.ref_sents, n) for n in (1, 2)]
        self.utt_ngrams = [
            [_sent_ngrams(sents, n) for n in (1, 2)] for sents in self.utt_sents
        ]
        if scoring == "recall":
            self.masks = [
                [
                    self._union_mask(rs, sents)
                    for rs in self.ref_sents
                ]
                for sents in self.utt_sents
            ]

    @staticmethod
    def _union_mask(ref_sent: list[str], hyp_sents: list[list[str]]) -> list[bool]:
        mask = [False] * len(ref_sent)
        for hs in hyp_sents:
            for i, hit in enumerate(_lcs_hit_mask(ref_sent, hs)):
                if hit:
                    mask[i] = True
        return mask

    @property
    def degenerate(self) -> bool:
        return not self.ref_sents

    def score(self, selection: list[int]) -> float:
        """Score of the utterance subset; 0.0 for the empty selection."""
        if not selection or self.degenerate:
            return 0.0
        total = 0.0
        sel_counts: Counter = Counter()
        for order in (0, 1):
            ref_d, ref_total = self.ref_ngrams[order]
            if ref_total == 0:
                continue
            cand: Counter = Counter()
            cand_total = 0
            for i in selection:
                d, t = self.utt_ngrams[i][order]
                cand.update(d)
                cand_total += t
            matches = sum(min(c, ref_d[g]) for g, c in cand.items() if g in ref_d)
            r = matches / ref_total
            if self.scoring == "recall":
                total += r
            else:
                p = matches / cand_total if cand_total else 0.0
                total += 2 * p * r / (p + r) if p + r else 0.0
            if order == 0:
                sel_counts = cand
        if self.scoring == "recall":
            total += self._union_lcs_recall(selection, sel_counts)
        return total

    def _union_lcs_recall(self, selection: list[int], hyp_uni: Counter) -> float:
        ref_d, ref_total = self.ref_ngrams[0]
        if ref_total == 0:
            return 0.0
        hyp_left = dict(hyp_uni)
        ref_left = {g[0]: c for g, c in ref_d.items()}
        hits = 0
        for si, rs in enumerate(self.ref_sents):
            mask = [False] * len(rs)
            for i in selection:
                for k, hit in enumerate(self.masks[i][si]):
                    if hit:
                        mask[k] = True
            for k, hit in enumerate(mask):
                if not hit:
                    continue
                tok = rs[k]
                if hyp_left.get((tok,), 0) > 0 and ref_left.get(tok, 0) > 0:
                    hyp_left[(tok,)] -= 1
                    ref_left[tok] -= 1
                    hits += 1
        return hits / ref_total
