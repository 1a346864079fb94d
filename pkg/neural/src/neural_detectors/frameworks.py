"""Three detection frameworks over a shared tiny transformer encoder.

* ``pairwise`` : binary classification of one (candidate, utterance) pair
  from the input ``<s> candidate </s> utterance </s>``.
* ``seqlabel`` : the candidate is prepended to the whole dialogue as
  ``<s> c </s> <s> u_1 </s> <s> u_2 </s> ...`` and each utterance's marker
  representation is classified; the marker in front of the candidate takes
  no part in the classification.
* ``pointer``  : same input; an autoregressive decoder selects omission
  utterances one at a time with a glimpse attention over the marker
  representations and an explicit stop action.

The built-in ``tiny`` encoder is a small randomly initialized transformer
so the package trains offline; paper-scale runs swap in a pretrained
encoder checkpoint and the full-corpus hyper-parameters (see README).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import torch
from torch import nn

from .data import Pair, Vocab, tokenize

KINDS = ("pairwise", "seqlabel", "pointer")


@dataclass(frozen=True)
class FrameworkSpec:
    kind: str
    encoder: str = "tiny"
    max_len: int = 256
    epochs: int = 5
    learning_rate: float = 5e-5
    batch_size: int = 16

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown framework kind: {self.kind!r}")
        if self.encoder != "tiny":
            raise ValueError(
                "only the built-in 'tiny' encoder is available offline; "
                "pretrained encoders need a checkpoint download")
        if self.max_len < 8:
            raise ValueError("max_len too small")

    def to_json(self) -> dict:
        return asdict(self)


class TinyEncoder(nn.Module):
    """Small transformer with a forward-looking local mix.

    The depthwise convolution folds each position's next few tokens into
    its residual stream, so segment-marker positions carry their segment's
    content even before the attention heads specialize.
    """

    def __init__(self, vocab_size: int, pad_id: int, max_len: int,
                 d_model: int = 64, nhead: int = 4, layers: int = 2,
                 local_window: int = 4):
        super().__init__()
        self.pad_id = pad_id
        self.d_model = d_model
        self.local_window = local_window
        self.embed = nn.Embedding(vocab_size, d_model, padding_idx=pad_id)
        self.pos = nn.Embedding(max_len, d_model)
        self.local = nn.Conv1d(d_model, d_model, kernel_size=local_window,
                               groups=d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=d_model, nhead=nhead, dim_feedforward=4 * d_model,
            dropout=0.1, batch_first=True)
        self.encoder = nn.TransformerEncoder(layer, num_layers=layers)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device)
        x = self.embed(ids) * math.sqrt(self.d_model) + self.pos(positions)
        padded = nn.functional.pad(x.transpose(1, 2),
                                   (0, self.local_window - 1))
        x = x + self.local(padded).transpose(1, 2)
        mask = ids.eq(self.pad_id)
        return self.encoder(x, src_key_padding_mask=mask)


def encode_pairwise(pair: Pair, utt_index: int, vocab: Vocab,
                    max_len: int) -> list[int]:
    ids = [vocab.bos_id] + vocab.encode(tokenize(pair.candidate))
    ids += [vocab.eos_id] + vocab.encode(tokenize(pair.utterances[utt_index]))
    ids += [vocab.eos_id]
    return ids[:max_len]


def encode_dialogue(pair: Pair, vocab: Vocab, max_len: int
                    ) -> tuple[list[int], list[int]]:
    """Token ids plus the marker position of each utterance that fits.

    Utterances whose marker would fall beyond max_len are dropped;
    predictions for them default to negative.
    """
    ids = [vocab.bos_id] + vocab.encode(tokenize(pair.candidate))
    ids.append(vocab.eos_id)
    markers: list[int] = []
    for utt in pair.utterances:
        if len(ids) + 2 > max_len:
            break
        markers.append(len(ids))
        ids.append(vocab.bos_id)
        ids.extend(vocab.encode(tokenize(utt)))
        ids.append(vocab.eos_id)
    return ids[:max_len], markers


def pad_batch(seqs: list[list[int]], pad_id: int) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    return torch.tensor([s + [pad_id] * (width - len(s)) for s in seqs],
                        dtype=torch.long)


class PairwiseClassifier(nn.Module):
    kind = "pairwise"

    def __init__(self, vocab: Vocab, spec: FrameworkSpec):
        super().__init__()
        self.vocab = vocab
        self.spec = spec
        self.encoder = TinyEncoder(len(vocab), vocab.pad_id, spec.max_len)
        self.head = nn.Linear(self.encoder.d_model, 1)
        self.loss_fn = nn.BCEWithLogitsLoss()

    def batches(self, pairs: list[Pair], shuffle_rng=None):
        rows = [(p, i) for p in pairs for i in range(len(p.utterances))]
        if shuffle_rng is not None:
            shuffle_rng.shuffle(rows)
        for start in range(0, len(rows), self.spec.batch_size):
            yield rows[start:start + self.spec.batch_size]

    def loss(self, batch) -> torch.Tensor:
        seqs = [encode_pairwise(p, i, self.vocab, self.spec.max_len)
                for p, i in batch]
        ids = pad_batch(seqs, self.vocab.pad_id)
        hidden = self.encoder(ids)
        logits = self.head(hidden[:, 0, :]).squeeze(-1)
        targets = torch.tensor([float(i in p.labels) for p, i in batch])
        return self.loss_fn(logits, targets)

    @torch.no_grad()
    def predict_pair(self, pair: Pair) -> tuple[list[int], list[float]]:
        self.eval()
        seqs = [encode_pairwise(pair, i, self.vocab, self.spec.max_len)
                for i in range(len(pair.utterances))]
        ids = pad_batch(seqs, self.vocab.pad_id)
        probs = torch.sigmoid(self.head(self.encoder(ids)[:, 0, :])).squeeze(-1)
        scores = [float(p) for p in probs]
        return [i for i, s in enumerate(scores) if s > 0.5], scores


class SequenceLabeler(nn.Module):
    kind = "seqlabel"

    def __init__(self, vocab: Vocab, spec: FrameworkSpec):
        super().__init__()
        self.vocab = vocab
        self.spec = spec
        self.encoder = TinyEncoder(len(vocab), vocab.pad_id, spec.max_len)
        self.head = nn.Linear(self.encoder.d_model, 1)
        self.loss_fn = nn.BCEWithLogitsLoss()

    def batches(self, pairs: list[Pair], shuffle_rng=None):
        rows = list(pairs)
        if shuffle_rng is not None:
            shuffle_rng.shuffle(rows)
        for start in range(0, len(rows), self.spec.batch_size):
            yield rows[start:start + self.spec.batch_size]

    def _marker_logits(self, pair: Pair):
        ids, markers = encode_dialogue(pair, self.vocab, self.spec.max_len)
        if not markers:
            return None, []
        hidden = self.encoder(pad_batch([ids], self.vocab.pad_id))
        reps = hidden[0, markers, :]
        return self.head(reps).squeeze(-1), markers

    def loss(self, batch) -> torch.Tensor:
        losses = []
        for pair in batch:
            logits, markers = self._marker_logits(pair)
            if logits is None:
                continue
            targets = torch.tensor([float(i in pair.labels)
                                    for i in range(len(markers))])
            losses.append(self.loss_fn(logits, targets))
        return torch.stack(losses).mean()

    @torch.no_grad()
    def predict_pair(self, pair: Pair) -> tuple[list[int], list[float]]:
        self.eval()
        logits, markers = self._marker_logits(pair)
        scores = [0.0] * len(pair.utterances)
        if logits is None:
            return [], scores
        probs = torch.sigmoid(logits)
        for k in range(len(markers)):
            scores[k] = float(probs[k])
        return [i for i, s in enumerate(scores) if s > 0.5], scores


class PointerNetwork(nn.Module):
    kind = "pointer"

    def __init__(self, vocab: Vocab, spec: FrameworkSpec):
        super().__init__()
        self.vocab = vocab
        self.spec = spec
        self.encoder = TinyEncoder(len(vocab), vocab.pad_id, spec.max_len)
        d = self.encoder.d_model
        self.stop_rep = nn.Parameter(torch.randn(d) * 0.02)
        self.cell = nn.GRUCell(d, d)
        self.glimpse_w = nn.Linear(d, d)
        self.glimpse_h = nn.Linear(d, d, bias=False)
        self.glimpse_v = nn.Linear(d, 1, bias=False)
        self.point_w = nn.Linear(d, d)
        self.point_g = nn.Linear(d, d, bias=False)
        self.point_v = nn.Linear(d, 1, bias=False)

    def batches(self, pairs: list[Pair], shuffle_rng=None):
        rows = list(pairs)
        if shuffle_rng is not None:
            shuffle_rng.shuffle(rows)
        for start in range(0, len(rows), self.spec.batch_size):
            yield rows[start:start + self.spec.batch_size]

    def _step_logits(self, reps: torch.Tensor, hidden: torch.Tensor,
                     visited: set[int]) -> torch.Tensor:
        # reps: [K+1, d] with the stop action last; hidden: [d]
        e = self.glimpse_v(torch.tanh(
            self.glimpse_w(reps) + self.glimpse_h(hidden))).squeeze(-1)
        e = e.masked_fill(self._visited_mask(reps.size(0), visited), -1e9)
        glimpse = (torch.softmax(e, dim=0).unsqueeze(-1) * reps).sum(dim=0)
        scores = self.point_v(torch.tanh(
            self.point_w(reps) + self.point_g(glimpse))).squeeze(-1)
        return scores.masked_fill(self._visited_mask(reps.size(0), visited), -1e9)

    @staticmethod
    def _visited_mask(size: int, visited: set[int]) -> torch.Tensor:
        mask = torch.zeros(size, dtype=torch.bool)
        for v in visited:
            mask[v] = True
        return mask

    def _reps(self, pair: Pair):
        ids, markers = encode_dialogue(pair, self.vocab, self.spec.max_len)
        if not markers:
            return None
        hidden = self.encoder(pad_batch([ids], self.vocab.pad_id))
        utt_reps = hidden[0, markers, :]
        return torch.cat([utt_reps, self.stop_rep.unsqueeze(0)], dim=0)

    def loss(self, batch) -> torch.Tensor:
        losses = []
        for pair in batch:
            reps = self._reps(pair)
            if reps is None:
                continue
            n_utts = reps.size(0) - 1
            stop = n_utts
            gold = [i for i in pair.labels if i < n_utts] + [stop]
            hidden = reps[:n_utts].mean(dim=0)
            visited: set[int] = set()
            steps = []
            for target in gold:
                logits = self._step_logits(reps, hidden, visited)
                steps.append(nn.functional.cross_entropy(
                    logits.unsqueeze(0), torch.tensor([target])))
                visited.add(target)
                hidden = self.cell(reps[target].unsqueeze(0),
                                   hidden.unsqueeze(0)).squeeze(0)
            losses.append(torch.stack(steps).mean())
        return torch.stack(losses).mean()

    @torch.no_grad()
    def predict_pair(self, pair: Pair) -> tuple[list[int], list[float]]:
        self.eval()
        scores = [0.0] * len(pair.utterances)
        reps = self._reps(pair)
        if reps is None:
            return [], scores
        n_utts = reps.size(0) - 1
        stop = n_utts
        hidden = reps[:n_utts].mean(dim=0)
        visited: set[int] = set()
        picked: list[int] = []
        for _ in range(n_utts):
            logits = self._step_logits(reps, hidden, visited)
            probs = torch.softmax(logits, dim=0)
            choice = int(torch.argmax(probs))
            if choice == stop:
                break
            picked.append(choice)
            scores[choice] = float(probs[choice])
            visited.add(choice)
            hidden = self.cell(reps[choice].unsqueeze(0),
                               hidden.unsqueeze(0)).squeeze(0)
        return sorted(picked), scores


MODEL_CLASSES = {
    "pairwise": PairwiseClassifier,
    "seqlabel": SequenceLabeler,
    "pointer": PointerNetwork,
}


def build_model(vocab: Vocab, spec: FrameworkSpec) -> nn.Module:
    return MODEL_CLASSES[spec.kind](vocab, spec)
