"""BEIR-layout data loading, training-batch assembly, and TREC run files.

File formats:
- ``corpus.jsonl`` / ``queries.jsonl``: one JSON object per line with
  ``_id``/``title``/``text`` (queries: ``_id``/``text``).
- qrels: tab-separated ``query-id<TAB>corpus-id<TAB>score`` with an
  optional header line.
- run files: six-column TREC format ``qid Q0 docid rank score tag``,
  scores written with six decimals.

All sampling is a pure function of (inputs, seed); loaded structures
are immutable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

_RUN_SCORE_DECIMALS = 6


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str


@dataclass(frozen=True)
class Query:
    id: str
    text: str


@dataclass(frozen=True)
class Qrels:
    """Graded relevance judgments keyed by (query_id, doc_id)."""

    judgments: dict[tuple[str, str], int]

    def grade(self, query_id: str, doc_id: str) -> int:
        return self.judgments.get((query_id, doc_id), 0)

    def for_query(self, query_id: str) -> dict[str, int]:
        return {
            did: g for (qid, did), g in self.judgments.items() if qid == query_id
        }

    def relevant_docs(self, query_id: str) -> list[str]:
        return [
            did for (qid, did), g in self.judgments.items() if qid == query_id and g >= 1
        ]

    def query_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for qid, _ in self.judgments:
            seen.setdefault(qid)
        return list(seen)


@dataclass(frozen=True)
class TrainingBatch:
    query: Query
    positive: Document
    negatives: tuple[Document, ...]


@dataclass(frozen=True)
class RunRanking:
    """Per-query ranked (doc_id, score) lists, scores non-increasing."""

    entries: dict[str, list[tuple[str, float]]]
    tag: str = "run"


def load_corpus(path) -> list[Document]:
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            if "_id" not in rec or not str(rec["_id"]):
                raise ValueError(f"line {lineno}: missing _id")
            if "text" not in rec:
                raise ValueError(f"line {lineno}: missing text")
            doc_id = str(rec["_id"])
            if doc_id in seen:
                raise ValueError(f"duplicate _id {doc_id}")
            seen.add(doc_id)
            docs.append(Document(doc_id, str(rec.get("title", "")), str(rec["text"])))
    return docs


def load_queries(path) -> list[Query]:
    queries: list[Query] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            if "_id" not in rec or not str(rec["_id"]):
                raise ValueError(f"line {lineno}: missing _id")
            if "text" not in rec or not str(rec["text"]).strip():
                raise ValueError(f"line {lineno}: missing or empty text")
            qid = str(rec["_id"])
            if qid in seen:
                raise ValueError(f"duplicate _id {qid}")
            seen.add(qid)
            queries.append(Query(qid, str(rec["text"])))
    return queries


_QRELS_HEADER_WORDS = {"query-id", "query_id", "qid", "corpus-id", "corpus_id", "score"}


def load_qrels(path) -> Qrels:
    judgments: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    f"line {lineno}: expected 3 tab-separated columns, got {len(parts)}"
                )
            if lineno == 1 and any(p.lower() in _QRELS_HEADER_WORDS for p in parts):
                continue
            qid, did, grade_str = (p.strip() for p in parts)
            try:
                grade = int(grade_str)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: non-integer grade {grade_str!r}") from exc
            if grade < 0:
                raise ValueError(f"line {lineno}: negative grade {grade}")
            if not qid or not did:
                raise ValueError(f"line {lineno}: empty id")
            judgments[(qid, did)] = grade
    return Qrels(judgments)


def make_batches(
    queries: list[Query],
    qrels: Qrels,
    corpus: list[Document],
    n_negatives: int = 7,
    seed: int = 0,
) -> tuple[list[TrainingBatch], int]:
    """One batch per (query, positive) pair with `n_negatives` uniform
    negatives drawn without replacement among grade-0/unjudged documents.

    Returns (batches, skipped) where skipped counts queries without any
    positive judgment.
    """
    if n_negatives < 1:
        raise ValueError("n_negatives must be >= 1")
    if len(corpus) <= n_negatives:
        raise ValueError("corpus smaller than the number of negatives requested")
    by_id = {doc.id: doc for doc in corpus}
    rng = np.random.default_rng(seed)
    batches: list[TrainingBatch] = []
    skipped = 0
    for query in queries:
        grades = qrels.for_query(query.id)
        positives = sorted(did for did, g in grades.items() if g >= 1)
        if not positives:
            skipped += 1
            continue
        eligible = [doc for doc in corpus if grades.get(doc.id, 0) < 1]
        if len(eligible) < n_negatives:
            raise ValueError(
                f"query {query.id}: only {len(eligible)} eligible negatives, "
                f"need {n_negatives}"
            )
        for pos_id in positives:
            if pos_id not in by_id:
                raise ValueError(f"query {query.id}: positive {pos_id} not in corpus")
            picks = rng.choice(len(eligible), size=n_negatives, replace=False)
            negatives = tuple(eligible[i] for i in picks)
            batches.append(TrainingBatch(query, by_id[pos_id], negatives))
    if skipped:
        logger.warning("make_batches: skipped %d queries without positives", skipped)
    return batches, skipped


def write_run(run: RunRanking, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(run.entries):
            for rank, (did, score) in enumerate(run.entries[qid], start=1):
                fh.write(f"{qid} Q0 {did} {rank} {score:.{_RUN_SCORE_DECIMALS}f} {run.tag}\n")


def read_run(path) -> RunRanking:
    entries: dict[str, list[tuple[str, float, int]]] = {}
    tag = "run"
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ValueError(f"line {lineno}: expected 6 columns, got {len(parts)}")
            qid, _q0, did, rank_str, score_str, tag = parts
            try:
                rank = int(rank_str)
                score = float(score_str)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad rank or score") from exc
            entries.setdefault(qid, []).append((did, score, rank))
    final: dict[str, list[tuple[str, float]]] = {}
    for qid, rows in entries.items():
        ranks = [r for _, _, r in rows]
        if ranks != list(range(1, len(rows) + 1)):
            logger.warning("run %s query %s: ranks not contiguous, reordering by score", path, qid)
            rows = sorted(rows, key=lambda r: -r[1])
        seen: set[str] = set()
        out_rows: list[tuple[str, float]] = []
        for did, score, _ in rows:
            if did in seen:
                raise ValueError(f"query {qid}: duplicate doc id {did}")
            seen.add(did)
            out_rows.append((did, score))
        final[qid] = out_rows
    return RunRanking(final, tag)
