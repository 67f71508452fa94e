"""Trainable embedding-bag bi-encoder.

Two token-embedding tables (query side and document side) of shape
(V, d); a text embeds as the mean of its tokens' rows, and relevance is
the unscaled dot product of the two embeddings. One parameter set
serves either the robust model or a biased weak learner (``role``).

Checkpoint layout: magic ``EQIR1``, then V, d and a role byte, followed
by the two tables as row-major float64; the vocabulary sits in an
adjacent ``<path>.vocab`` file as ``token<TAB>id`` lines.
"""

from __future__ import annotations

import hashlib
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Document, Query, TrainingBatch
from .text_analysis import tokenize

CHECKPOINT_MAGIC = b"EQIR1"
UNK_TOKEN = "<unk>"
UNK_ID = 0

ROLE_ROBUST = "robust"
ROLE_BIASED = "biased"
_ROLE_BYTES = {ROLE_ROBUST: 0, ROLE_BIASED: 1}
_BYTE_ROLES = {v: k for k, v in _ROLE_BYTES.items()}


@dataclass(frozen=True)
class Vocabulary:
    token_to_id: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.token_to_id)

    def ids(self, text: str) -> list[int]:
        return [self.token_to_id.get(tok.lower(), UNK_ID) for tok in tokenize(text)]


@dataclass
class EncoderParams:
    query_embeddings: np.ndarray
    doc_embeddings: np.ndarray
    dim: int
    role: str = ROLE_ROBUST
    frozen: bool = False


def document_text(doc: Document) -> str:
    return f"{doc.title} {doc.text}".strip() if doc.title else doc.text


def build_vocab(
    corpus: Iterable[Document], queries: Iterable[Query], min_count: int = 1
) -> Vocabulary:
    """Frequency-ordered ids (ties lexicographic); id 0 is reserved for
    the unknown token, and sub-threshold tokens map to it."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for doc in corpus:
        counts.update(tok.lower() for tok in tokenize(document_text(doc)))
    for query in queries:
        counts.update(tok.lower() for tok in tokenize(query.text))
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    mapping = {UNK_TOKEN: UNK_ID}
    for i, tok in enumerate(kept, start=1):
        mapping[tok] = i
    return Vocabulary(mapping)


def init_params(
    vocab: Vocabulary, dim: int, seed, role: str = ROLE_ROBUST
) -> EncoderParams:
    """Uniform init in [-0.5/d, 0.5/d], seeded."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    rng = np.random.default_rng(seed)
    scale = 0.5 / dim
    shape = (vocab.size, dim)
    return EncoderParams(
        query_embeddings=rng.uniform(-scale, scale, size=shape),
        doc_embeddings=rng.uniform(-scale, scale, size=shape),
        dim=dim,
        role=role,
    )


def encode(params: EncoderParams, vocab: Vocabulary, text: str, side: str) -> np.ndarray:
    """Mean of the side's embedding rows; empty text gives the zero vector."""
    ids = vocab.ids(text)
    table = _table(params, side)
    if not ids:
        return np.zeros(params.dim)
    return table[ids].mean(axis=0)


def _table(params: EncoderParams, side: str) -> np.ndarray:
    if side == "query":
        return params.query_embeddings
    if side == "document":
        return params.doc_embeddings
    raise ValueError(f"unknown side {side!r}")


def score_batch(
    params: EncoderParams, vocab: Vocabulary, batch: TrainingBatch
) -> np.ndarray:
    """Dot-product logits over the batch candidates; index 0 is the positive."""
    h_q = encode(params, vocab, batch.query.text, "query")
    candidates = (batch.positive, *batch.negatives)
    return np.array(
        [float(h_q @ encode(params, vocab, document_text(d), "document")) for d in candidates]
    )


def save_checkpoint(params: EncoderParams, vocab: Vocabulary, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    v, d = params.query_embeddings.shape
    header = CHECKPOINT_MAGIC + struct.pack("<QQB", v, d, _ROLE_BYTES[params.role])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(params.query_embeddings, dtype=np.float64).tobytes())
        fh.write(np.ascontiguousarray(params.doc_embeddings, dtype=np.float64).tobytes())
    with open(str(path) + ".vocab", "w", encoding="utf-8") as fh:
        for tok, idx in sorted(vocab.token_to_id.items(), key=lambda kv: kv[1]):
            fh.write(f"{tok}\t{idx}\n")


def load_checkpoint(path) -> tuple[EncoderParams, Vocabulary]:
    """Read a checkpoint and its adjacent vocabulary. Biased checkpoints
    come back frozen."""
    path = Path(path)
    head_len = len(CHECKPOINT_MAGIC) + struct.calcsize("<QQB")
    with open(path, "rb") as fh:
        header = fh.read(head_len)
        if len(header) < head_len or header[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint (bad magic)")
        v, d, role_byte = struct.unpack("<QQB", header[len(CHECKPOINT_MAGIC) :])
        if role_byte not in _BYTE_ROLES:
            raise ValueError(f"{path}: unknown role byte {role_byte}")
        table_bytes = v * d * 8
        q = np.frombuffer(fh.read(table_bytes), dtype=np.float64).reshape(v, d).copy()
        doc = np.frombuffer(fh.read(table_bytes), dtype=np.float64).reshape(v, d).copy()
    mapping: dict[str, int] = {}
    with open(str(path) + ".vocab", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}.vocab line {lineno}: expected token<TAB>id")
            mapping[parts[0]] = int(parts[1])
    if mapping.get(UNK_TOKEN) != UNK_ID:
        raise ValueError(f"{path}.vocab: missing reserved {UNK_TOKEN} entry")
    if len(mapping) != v:
        raise ValueError(f"{path}.vocab: {len(mapping)} tokens, checkpoint says {v}")
    role = _BYTE_ROLES[role_byte]
    params = EncoderParams(q, doc, int(d), role=role, frozen=role == ROLE_BIASED)
    return params, Vocabulary(mapping)


def checkpoint_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
