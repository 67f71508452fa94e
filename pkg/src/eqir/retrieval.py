"""BM25 lexical ranking and exhaustive dense ranking.

BM25 uses the non-negative idf form ln(1 + (N - df + 0.5)/(df + 0.5))
so tiny corpora cannot produce negative scores. Dense search scores
every (query, document) pair exactly; there is no approximate index.
All rankings break score ties by ascending doc id, which makes output
files byte-stable across runs and thread counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import Document, Query, RunRanking
from .encoder import EncoderParams, Vocabulary, document_text, encode
from .text_analysis import tokenize


@dataclass(frozen=True)
class RetrievalConfig:
    k1: float = 1.2
    b: float = 0.75
    top_k: int = 100

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError("k1 must be > 0")
        if not 0 <= self.b <= 1:
            raise ValueError("b must be in [0,1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class Bm25Index:
    postings: dict[str, list[tuple[int, int]]]
    doc_lengths: tuple[int, ...]
    avg_doc_length: float
    doc_count: int
    doc_frequencies: dict[str, int]
    doc_ids: tuple[str, ...]


def _doc_tokens(doc: Document) -> list[str]:
    return [tok.lower() for tok in tokenize(document_text(doc))]


def build_bm25(corpus: list[Document]) -> Bm25Index:
    if not corpus:
        raise ValueError("empty corpus")
    postings: dict[str, list[tuple[int, int]]] = {}
    lengths: list[int] = []
    for internal, doc in enumerate(corpus):
        tokens = _doc_tokens(doc)
        lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            postings.setdefault(tok, []).append((internal, tf))
    return Bm25Index(
        postings=postings,
        doc_lengths=tuple(lengths),
        avg_doc_length=sum(lengths) / len(lengths),
        doc_count=len(corpus),
        doc_frequencies={tok: len(plist) for tok, plist in postings.items()},
        doc_ids=tuple(doc.id for doc in corpus),
    )


def bm25_search(
    index: Bm25Index, query_text: str, config: RetrievalConfig | None = None
) -> list[tuple[str, float]]:
    """Top-k (doc_id, score) for documents sharing at least one term."""
    config = config or RetrievalConfig()
    terms = list(dict.fromkeys(tok.lower() for tok in tokenize(query_text)))
    scores: dict[int, float] = {}
    n = index.doc_count
    avg = index.avg_doc_length
    for term in terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        df = index.doc_frequencies[term]
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for internal, tf in plist:
            length = index.doc_lengths[internal]
            norm = 1.0 - config.b + config.b * (length / avg if avg > 0 else 0.0)
            part = idf * tf * (config.k1 + 1.0) / (tf + config.k1 * norm)
            scores[internal] = scores.get(internal, 0.0) + part
    ranked = sorted(
        ((index.doc_ids[i], s) for i, s in scores.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[: config.top_k]


def bm25_run(
    index: Bm25Index,
    queries: list[Query],
    config: RetrievalConfig | None = None,
    tag: str = "bm25",
) -> RunRanking:
    return RunRanking(
        {q.id: bm25_search(index, q.text, config) for q in queries}, tag=tag
    )


def dense_search(
    params: EncoderParams,
    vocab: Vocabulary,
    corpus: list[Document],
    queries: list[Query],
    top_k: int = 100,
    tag: str = "dense",
    threads: int = 1,
) -> RunRanking:
    """Exhaustive dot-product ranking of every document for every query."""
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    doc_ids = [doc.id for doc in corpus]
    doc_matrix = np.stack(
        [encode(params, vocab, document_text(doc), "document") for doc in corpus]
    )

    def rank_one(query: Query) -> list[tuple[str, float]]:
        h_q = encode(params, vocab, query.text, "query")
        scores = doc_matrix @ h_q
        order = sorted(range(len(doc_ids)), key=lambda i: (-scores[i], doc_ids[i]))
        return [(doc_ids[i], float(scores[i])) for i in order[:top_k]]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ranked = list(pool.map(rank_one, queries))
    else:
        ranked = [rank_one(q) for q in queries]
    return RunRanking({q.id: rows for q, rows in zip(queries, ranked)}, tag=tag)
