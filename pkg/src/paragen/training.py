"""Teacher-forced NLL training with Adam, gradient clipping, and checkpoints.

Training runs one example at a time: each sentence pair carries its own
extended vocabulary, so there is no shared output width to batch over. The
whole loop is a pure function of (dataset, config, seed).
"""

import json
import logging
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from . import autograd as ag
from .autograd import Tensor, backward
from .errors import NumericalError, ValidationError
from .model import ModelDims, ModelParams
from .pointer import full_step
from .vocab import BOS, EOS, build_vocab, encode_source, encode_target, tokenize

log = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"CPFG"
CHECKPOINT_VERSION = 1


class CheckpointError(Exception):
    """Base class for checkpoint load failures."""


class VersionMismatchError(CheckpointError):
    pass


class CorruptCheckpointError(CheckpointError):
    pass


class WidthMismatchError(CheckpointError):
    pass


class VocabMismatchError(CheckpointError):
    pass


@dataclass
class TrainConfig:
    seed: int
    epochs: int = 10
    lr: float = 1e-3
    clip: float = 2.0
    max_source_len: int = 50
    max_target_len: int = 50
    vocab_size: int = 10000
    min_count: int = 1
    d_emb: int = 64
    d_h: int = 64
    d_s: int = 64
    d_a: int = 64
    checkpoint_interval: int = 10

    def __post_init__(self):
        if self.seed is None:
            raise ValidationError("TrainConfig: seed is mandatory")
        if self.epochs < 1 or self.checkpoint_interval < 1:
            raise ValidationError("TrainConfig: epochs and checkpoint_interval must be >= 1")
        if self.lr < 0 or self.clip <= 0:
            raise ValidationError("TrainConfig: lr must be >= 0 and clip > 0")
        if min(self.max_source_len, self.max_target_len) < 1:
            raise ValidationError("TrainConfig: length limits must be >= 1")
        if self.vocab_size <= 4 or min(self.d_emb, self.d_h, self.d_s, self.d_a) < 1:
            raise ValidationError("TrainConfig: vocab_size > 4 and widths >= 1 required")

    def dims(self, vocab_size):
        return ModelDims(vocab_size=vocab_size, d_emb=self.d_emb, d_h=self.d_h,
                         d_s=self.d_s, d_a=self.d_a)


@dataclass
class EpochStats:
    epoch: int
    mean_nll: float
    token_accuracy: float
    wall_time_s: float

    def as_dict(self):
        return {"epoch": self.epoch, "mean_nll": self.mean_nll,
                "token_accuracy": self.token_accuracy, "wall_time_s": self.wall_time_s}


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)

    @property
    def final_nll(self):
        return self.epochs[-1].mean_nll if self.epochs else float("nan")


def _pair_texts(pair):
    if hasattr(pair, "x") and hasattr(pair, "y"):
        return pair.x, pair.y
    x, y = pair
    return x, y


def _teacher_forced(pair, params, vocab, max_source_len, max_target_len):
    """Mean NLL over the gold sequence plus greedy-match counts."""
    x_text, y_text = _pair_texts(pair)
    src = tokenize(x_text)
    tgt = tokenize(y_text)
    if not src or not tgt:
        raise ValidationError("sequence_loss: empty source or target after tokenization")
    if len(src) > max_source_len:
        log.warning("source truncated from %d to %d tokens", len(src), max_source_len)
        src = src[:max_source_len]
    if len(tgt) > max_target_len:
        log.warning("target truncated from %d to %d tokens", len(tgt), max_target_len)
        tgt = tgt[:max_target_len]

    src_ids, ev = encode_source(src, vocab)
    gold = encode_target(tgt, ev) + [EOS]
    states = params.encode_source_ids(src_ids)
    state = params.initial_decoder_state(states)

    prev = BOS
    total = None
    correct = 0
    for gold_id in gold:
        dist, state = full_step(prev, ev, states, state, params)
        term = ag.neg(ag.log(ag.pick(dist.p, gold_id)))
        total = term if total is None else ag.add(total, term)
        if int(np.argmax(dist.p.data)) == gold_id:
            correct += 1
        prev = gold_id
    loss = ag.mul(total, Tensor(1.0 / len(gold)))
    return loss, correct, len(gold)


def sequence_loss(pair, params, vocab, max_source_len=50, max_target_len=50):
    """Teacher-forced mean negative log-likelihood of one sentence pair."""
    loss, _, _ = _teacher_forced(pair, params, vocab, max_source_len, max_target_len)
    return loss


def clip_gradients(named_params, clip):
    """Scale all gradients so their global L2 norm is at most ``clip``.

    Returns the pre-clip norm. Direction is preserved exactly.
    """
    total = 0.0
    grads = []
    for _, p in named_params:
        if p.grad is not None:
            grads.append(p.grad)
            total += float((p.grad * p.grad).sum())
    norm = float(np.sqrt(total))
    if norm > clip and norm > 0.0:
        scale = clip / norm
        for g in grads:
            g *= scale
    return norm


class Adam:
    """Adam with bias correction; one slot pair per parameter tensor."""

    def __init__(self, named_params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(named_params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for _, p in self.params]
        self.v = [np.zeros_like(p.data) for _, p in self.params]

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for (name, p), m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if g is None:
                continue
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * (g * g)
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(dataset, cfg, vocab=None, checkpoint_path=None, log_path=None):
    """Train a fresh model on (source, target) text pairs.

    Returns (ModelParams, TrainReport). When ``vocab`` is None one is built
    from both sides of the dataset under cfg.vocab_size / cfg.min_count.
    """
    if not dataset:
        raise ValidationError("train: empty dataset")
    pairs = [_pair_texts(p) for p in dataset]
    if vocab is None:
        corpus = [tokenize(x) for x, _ in pairs] + [tokenize(y) for _, y in pairs]
        vocab = build_vocab(corpus, max_size=cfg.vocab_size, min_count=cfg.min_count)

    params = ModelParams(cfg.dims(vocab.size), seed=cfg.seed)
    opt = Adam(params.named_parameters(), lr=cfg.lr)
    shuffle_rng = np.random.default_rng(cfg.seed)
    report = TrainReport()

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        order = shuffle_rng.permutation(len(pairs))
        nll_sum = 0.0
        correct = 0
        total = 0
        for idx in order:
            params.zero_grad()
            loss, c, t = _teacher_forced(pairs[idx], params, vocab,
                                         cfg.max_source_len, cfg.max_target_len)
            if not np.isfinite(loss.data):
                raise NumericalError(f"non-finite loss at epoch {epoch}, example {idx}")
            backward(loss)
            clip_gradients(params.named_parameters(), cfg.clip)
            opt.step()
            nll_sum += float(loss.data)
            correct += c
            total += t
        stats = EpochStats(epoch=epoch,
                           mean_nll=nll_sum / len(pairs),
                           token_accuracy=correct / max(total, 1),
                           wall_time_s=time.perf_counter() - t0)
        report.epochs.append(stats)
        log.info("epoch %d: nll %.4f acc %.3f (%.1fs)",
                 epoch, stats.mean_nll, stats.token_accuracy, stats.wall_time_s)
        if log_path is not None:
            with open(log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(stats.as_dict()) + "\n")
        if checkpoint_path is not None and epoch % cfg.checkpoint_interval == 0:
            save_checkpoint(params, checkpoint_path, vocab)
    if checkpoint_path is not None:
        save_checkpoint(params, checkpoint_path, vocab)
    return params, report


# ---------------------------------------------------------------------------
# dataset and checkpoint files


def load_pairs_tsv(path):
    """Read a pair-per-line TSV; every line must contain exactly one TAB."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh.read().splitlines(), start=1):
            if line.count("\t") != 1:
                raise ValidationError(
                    f"{path}: line {lineno}: expected exactly one TAB separator")
            x, y = line.split("\t")
            pairs.append((x, y))
    return pairs


def save_pairs_tsv(pairs, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            x, y = _pair_texts(pair)
            fh.write(f"{x}\t{y}\n")


def save_checkpoint(params, path, vocab):
    """Binary checkpoint: magic, version, widths, vocab fingerprint, tensors."""
    d = params.dims
    header = CHECKPOINT_MAGIC
    header += struct.pack("<H", CHECKPOINT_VERSION)
    header += struct.pack("<5I", d.vocab_size, d.d_emb, d.d_h, d.d_s, d.d_a)
    header += vocab.fingerprint()
    payload = b"".join(np.ascontiguousarray(p.data, dtype="<f8").tobytes()
                       for _, p in params.named_parameters())
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<Q", len(payload)))
        fh.write(payload)


def load_checkpoint(path, expected_dims=None, expected_vocab=None):
    """Load a checkpoint; returns (ModelParams, vocab_fingerprint bytes)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    fixed = len(CHECKPOINT_MAGIC) + 2 + 20 + 32 + 8
    if len(blob) < fixed or blob[:4] != CHECKPOINT_MAGIC:
        raise CorruptCheckpointError(f"{path}: not a model checkpoint")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise VersionMismatchError(
            f"{path}: format version {version}, expected {CHECKPOINT_VERSION}")
    widths = struct.unpack_from("<5I", blob, 6)
    dims = ModelDims(vocab_size=widths[0], d_emb=widths[1], d_h=widths[2],
                     d_s=widths[3], d_a=widths[4])
    if expected_dims is not None:
        for name in ("vocab_size", "d_emb", "d_h", "d_s", "d_a"):
            want = getattr(expected_dims, name)
            got = getattr(dims, name)
            if want != got:
                raise WidthMismatchError(
                    f"{path}: checkpoint {name}={got}, run expects {name}={want}")
    fingerprint = blob[26:58]
    if expected_vocab is not None and expected_vocab.fingerprint() != fingerprint:
        raise VocabMismatchError(f"{path}: checkpoint was trained with a different vocabulary")
    (payload_len,) = struct.unpack_from("<Q", blob, 58)
    payload = blob[66:]
    if len(payload) != payload_len:
        raise CorruptCheckpointError(
            f"{path}: payload is {len(payload)} bytes, header declares {payload_len}")

    params = ModelParams(dims, seed=0)
    offset = 0
    for name, p in params.named_parameters():
        n = p.data.size
        end = offset + 8 * n
        if end > len(payload):
            raise CorruptCheckpointError(f"{path}: truncated while reading {name}")
        p.data[...] = np.frombuffer(payload[offset:end], dtype="<f8").reshape(p.data.shape)
        offset = end
    if offset != len(payload):
        raise CorruptCheckpointError(f"{path}: {len(payload) - offset} trailing bytes")
    return params, fingerprint
