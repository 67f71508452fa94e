"""Contrastive training, biased weak learners, and PoE-debiased training.

The loss for a batch (q, d+, d-_1..d-_n) is the softmax cross-entropy
of the positive among the candidate dot-product logits. Gradients are
exact and hand-derived: with p = softmax(logits),

    dL/dh_q   = sum_j (p_j - [j == 0]) * h_{d_j}
    dL/dh_d_j = (p_j - [j == 0]) * h_q

chain-ruled through mean pooling (each token row receives a 1/len
share per occurrence). Updates use an adaptive-moment optimizer with
bias correction and decoupled weight decay, applied lazily to touched
rows only.

Debiased training combines a frozen biased model's distribution z_b
with the robust model's z_r as z_d = softmax(alpha * log z_b + log z_r)
(a product of experts with exponent alpha on the biased expert) and
descends -log z_d[0]; gradients flow only through the z_r branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Query, TrainingBatch
from .encoder import (
    ROLE_BIASED,
    EncoderParams,
    Vocabulary,
    document_text,
    init_params,
    score_batch,
)
from .text_analysis import amplify_noun_phrases

BIAS_STRATEGIES = (
    "amplified_constructs",
    "weaker_model",
    "fewer_iterations",
    "less_data",
)

# Seed-stream tags so the init, epoch shuffles, and data subsetting draw
# from independent deterministic streams.
_STREAM_INIT = 0
_STREAM_SHUFFLE = 1
_STREAM_SUBSET = 2


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 20
    n_negatives: int = 7
    seed: int = 0
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dim: int = 32

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0 < b < 1:
                raise ValueError(f"{name} must be in (0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")


@dataclass(frozen=True)
class DebiasConfig:
    alpha: float = 0.1
    bias_strategy: str = "less_data"
    data_fraction: float = 0.2
    epoch_fraction: float = 0.2
    weak_dim: int | None = None
    repetitions: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must be in [0,1]")
        if self.bias_strategy not in BIAS_STRATEGIES:
            raise ValueError(f"unknown strategy {self.bias_strategy!r}")
        if not 0 < self.data_fraction <= 1:
            raise ValueError("data_fraction must be in (0, 1]")
        if not 0 < self.epoch_fraction <= 1:
            raise ValueError("epoch_fraction must be in (0, 1]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class CombinedDistribution:
    z_b: np.ndarray
    z_r: np.ndarray
    z_d: np.ndarray


@dataclass
class SparseGrads:
    """Gradient rows keyed by embedding-row id, per table."""

    query_rows: dict[int, np.ndarray] = field(default_factory=dict)
    doc_rows: dict[int, np.ndarray] = field(default_factory=dict)


@dataclass
class AdamState:
    m_q: np.ndarray
    v_q: np.ndarray
    m_d: np.ndarray
    v_d: np.ndarray
    t_q: np.ndarray
    t_d: np.ndarray

    @classmethod
    def for_params(cls, params: EncoderParams) -> "AdamState":
        shape = params.query_embeddings.shape
        return cls(
            m_q=np.zeros(shape),
            v_q=np.zeros(shape),
            m_d=np.zeros(shape),
            v_d=np.zeros(shape),
            t_q=np.zeros(shape[0], dtype=np.int64),
            t_d=np.zeros(shape[0], dtype=np.int64),
        )


@dataclass
class TrainResult:
    params: EncoderParams
    epoch_losses: list[float]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / e.sum()


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    return shifted - math.log(np.exp(shifted).sum())


def contrastive_loss(logits: np.ndarray) -> float:
    """-log softmax(logits)[0], computed with max subtraction."""
    logits = np.asarray(logits, dtype=float)
    if logits.size < 2:
        raise ValueError("need at least 2 candidates")
    if not np.all(np.isfinite(logits)):
        raise ValueError("non-finite logit")
    shifted = logits - np.max(logits)
    return float(math.log(np.exp(shifted).sum()) - shifted[0])


def poe_combine(
    z_b_logits: np.ndarray, z_r_logits: np.ndarray, alpha: float
) -> CombinedDistribution:
    """z_d proportional to z_b**alpha * z_r, all in log space.

    alpha = 0 returns z_r itself (exactly, not merely numerically).
    """
    z_b_logits = np.asarray(z_b_logits, dtype=float)
    z_r_logits = np.asarray(z_r_logits, dtype=float)
    if z_b_logits.shape != z_r_logits.shape or z_b_logits.size < 2:
        raise ValueError("logit vectors must share a length of at least 2")
    if not (np.all(np.isfinite(z_b_logits)) and np.all(np.isfinite(z_r_logits))):
        raise ValueError("non-finite logit")
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must be in [0,1]")
    z_b = softmax(z_b_logits)
    z_r = softmax(z_r_logits)
    if alpha == 0.0:
        z_d = z_r.copy()
    else:
        combined = alpha * _log_softmax(z_b_logits) + _log_softmax(z_r_logits)
        z_d = softmax(combined)
    return CombinedDistribution(z_b=z_b, z_r=z_r, z_d=z_d)


def _accumulate(rows: dict[int, np.ndarray], idx: int, grad: np.ndarray) -> None:
    if idx in rows:
        rows[idx] += grad
    else:
        rows[idx] = grad.copy()


def _forward(params: EncoderParams, vocab: Vocabulary, batch: TrainingBatch):
    q_ids = vocab.ids(batch.query.text)
    doc_ids = [vocab.ids(document_text(d)) for d in (batch.positive, *batch.negatives)]
    h_q = (
        params.query_embeddings[q_ids].mean(axis=0) if q_ids else np.zeros(params.dim)
    )
    h_docs = [
        params.doc_embeddings[ids].mean(axis=0) if ids else np.zeros(params.dim)
        for ids in doc_ids
    ]
    logits = np.array([float(h_q @ h_d) for h_d in h_docs])
    return q_ids, doc_ids, h_q, h_docs, logits


def _backprop(
    q_ids: list[int],
    doc_ids: list[list[int]],
    h_q: np.ndarray,
    h_docs: list[np.ndarray],
    dlogits: np.ndarray,
) -> SparseGrads:
    grads = SparseGrads()
    if q_ids:
        dh_q = np.zeros_like(h_q)
        for j, h_d in enumerate(h_docs):
            dh_q += dlogits[j] * h_d
        share = dh_q / len(q_ids)
        for idx in q_ids:
            _accumulate(grads.query_rows, idx, share)
    for j, ids in enumerate(doc_ids):
        if not ids:
            continue
        share = (dlogits[j] * h_q) / len(ids)
        for idx in ids:
            _accumulate(grads.doc_rows, idx, share)
    return grads


def contrastive_grad(
    batch: TrainingBatch, params: EncoderParams, vocab: Vocabulary
) -> tuple[float, SparseGrads]:
    """Loss and exact sparse gradient of the contrastive objective."""
    q_ids, doc_ids, h_q, h_docs, logits = _forward(params, vocab, batch)
    loss = contrastive_loss(logits)
    dlogits = softmax(logits)
    dlogits[0] -= 1.0
    return loss, _backprop(q_ids, doc_ids, h_q, h_docs, dlogits)


def debiased_grad(
    batch: TrainingBatch,
    params: EncoderParams,
    f_b: EncoderParams,
    vocab: Vocabulary,
    alpha: float,
) -> tuple[float, SparseGrads]:
    """Loss -log z_d[0] and its gradient through the robust branch only."""
    q_ids, doc_ids, h_q, h_docs, logits_r = _forward(params, vocab, batch)
    logits_b = score_batch(f_b, vocab, batch)
    dist = poe_combine(logits_b, logits_r, alpha)
    loss = float(-math.log(dist.z_d[0]))
    dlogits = dist.z_d.copy()
    dlogits[0] -= 1.0
    return loss, _backprop(q_ids, doc_ids, h_q, h_docs, dlogits)


def _adam_row(
    theta: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: np.ndarray,
    idx: int,
    grad: np.ndarray,
    config: TrainConfig,
) -> None:
    t[idx] += 1
    step = t[idx]
    m[idx] = config.beta1 * m[idx] + (1 - config.beta1) * grad
    v[idx] = config.beta2 * v[idx] + (1 - config.beta2) * grad * grad
    m_hat = m[idx] / (1 - config.beta1**step)
    v_hat = v[idx] / (1 - config.beta2**step)
    theta[idx] -= config.learning_rate * (
        m_hat / (np.sqrt(v_hat) + config.eps) + config.weight_decay * theta[idx]
    )


def optimizer_step(
    params: EncoderParams, grads: SparseGrads, state: AdamState, config: TrainConfig
) -> None:
    """In-place lazy AdamW update of the touched rows; per-row step
    counts drive the bias correction."""
    if params.frozen:
        raise ValueError("cannot update frozen parameters")
    for idx in sorted(grads.query_rows):
        _adam_row(
            params.query_embeddings,
            state.m_q,
            state.v_q,
            state.t_q,
            idx,
            grads.query_rows[idx],
            config,
        )
    for idx in sorted(grads.doc_rows):
        _adam_row(
            params.doc_embeddings,
            state.m_d,
            state.v_d,
            state.t_d,
            idx,
            grads.doc_rows[idx],
            config,
        )


def _train_loop(
    batches: Sequence[TrainingBatch],
    vocab: Vocabulary,
    config: TrainConfig,
    f_b: EncoderParams | None = None,
    alpha: float = 0.0,
) -> TrainResult:
    if not batches:
        raise ValueError("no training batches")
    params = init_params(vocab, config.dim, seed=[config.seed, _STREAM_INIT])
    state = AdamState.for_params(params)
    epoch_losses: list[float] = []
    for epoch in range(config.epochs):
        order = np.random.default_rng(
            [config.seed, _STREAM_SHUFFLE, epoch]
        ).permutation(len(batches))
        total = 0.0
        for bi in order:
            batch = batches[int(bi)]
            if f_b is None:
                loss, grads = contrastive_grad(batch, params, vocab)
            else:
                loss, grads = debiased_grad(batch, params, f_b, vocab, alpha)
            optimizer_step(params, grads, state, config)
            total += loss
        epoch_losses.append(total / len(batches))
    return TrainResult(params, epoch_losses)


def train_plain(
    batches: Sequence[TrainingBatch], vocab: Vocabulary, config: TrainConfig
) -> TrainResult:
    """Contrastive training; deterministic in (batches, config.seed)."""
    return _train_loop(batches, vocab, config)


def train_debiased(
    batches: Sequence[TrainingBatch],
    f_b: EncoderParams,
    vocab: Vocabulary,
    config: TrainConfig,
    debias: DebiasConfig,
) -> TrainResult:
    """PoE-debiased training of a robust model against a frozen biased one."""
    if not f_b.frozen:
        raise ValueError("biased model must be frozen")
    if f_b.query_embeddings.shape[0] != vocab.size:
        raise ValueError("biased model vocabulary does not match")
    return _train_loop(batches, vocab, config, f_b=f_b, alpha=debias.alpha)


def make_biased_learner(
    strategy: str,
    batches: Sequence[TrainingBatch],
    vocab: Vocabulary,
    config: TrainConfig,
    debias: DebiasConfig | None = None,
) -> TrainResult:
    """Train a deliberately weak model and freeze it.

    amplified_constructs: noun phrases in query texts are repeated;
    weaker_model: dimension reduced to dim/4 (minimum 2);
    fewer_iterations: ceil(epoch_fraction * epochs) epochs;
    less_data: a seeded uniform fraction of the batches.
    """
    debias = debias or DebiasConfig(bias_strategy=strategy)
    if strategy not in BIAS_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "amplified_constructs":
        amplified = [
            TrainingBatch(
                Query(b.query.id, amplify_noun_phrases(b.query.text, debias.repetitions)),
                b.positive,
                b.negatives,
            )
            for b in batches
        ]
        result = _train_loop(amplified, vocab, config)
    elif strategy == "weaker_model":
        dim_b = debias.weak_dim if debias.weak_dim is not None else max(2, config.dim // 4)
        result = _train_loop(batches, vocab, replace(config, dim=dim_b))
    elif strategy == "fewer_iterations":
        epochs_b = max(1, math.ceil(config.epochs * debias.epoch_fraction))
        result = _train_loop(batches, vocab, replace(config, epochs=epochs_b))
    else:  # less_data
        count = max(1, int(len(batches) * debias.data_fraction))
        rng = np.random.default_rng([config.seed, _STREAM_SUBSET])
        picks = sorted(rng.choice(len(batches), size=count, replace=False))
        result = _train_loop([batches[int(i)] for i in picks], vocab, config)
    result.params.role = ROLE_BIASED
    result.params.frozen = True
    return result


def write_manifest(path, entries: Mapping[str, object]) -> None:
    """key=value reproducibility record, written beside a checkpoint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")
