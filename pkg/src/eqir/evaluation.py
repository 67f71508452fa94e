"""Ranking evaluation: NDCG@k, equity aggregates, complexity-bucketed
curves, and paired sign-flip permutation tests with Bonferroni
adjustment.

Conventions: unjudged documents count as non-relevant; queries without
any relevant document are dropped (with a logged count) before
aggregation; the standard deviation is the population form, so the
coefficient of variation identities on [0,1] scores are exact.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .complexity import ComplexityProfile, assign_buckets
from .corpus import Qrels, RunRanking

logger = logging.getLogger(__name__)

_SIGN_CHUNK = 1024


@dataclass(frozen=True)
class PerQueryScores:
    values: dict[str, float]
    k: int = 10


@dataclass(frozen=True)
class AggregateStats:
    mu: float
    sigma: float
    cv: float | None

    @property
    def cv_defined(self) -> bool:
        return self.cv is not None


@dataclass(frozen=True)
class BucketRow:
    bucket: int
    mean_complexity: float
    mean_ndcg: float
    count: int


@dataclass(frozen=True)
class BucketCurve:
    rows: tuple[BucketRow, ...]

    def gap(self) -> float:
        """Max-min spread of the per-bucket mean NDCG."""
        values = [r.mean_ndcg for r in self.rows]
        return max(values) - min(values)


@dataclass(frozen=True)
class SignificanceResult:
    raw_p: float
    adjusted_p: float
    comparisons: int
    resamples: int
    seed: int


def ndcg_at_k(
    ranked_doc_ids: Sequence[str], grades: Mapping[str, int], k: int = 10
) -> float:
    """DCG over the top k of the ranking, normalized by the ideal DCG
    from the judgment grades. Raises for queries with no relevant
    document."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ideal = sorted(grades.values(), reverse=True)[:k]
    if not ideal or ideal[0] <= 0:
        raise ValueError("no relevant documents")
    dcg = 0.0
    for i, did in enumerate(ranked_doc_ids[:k], start=1):
        rel = grades.get(did, 0)
        dcg += (2.0**rel - 1.0) / np.log2(i + 1)
    idcg = 0.0
    for i, rel in enumerate(ideal, start=1):
        idcg += (2.0**rel - 1.0) / np.log2(i + 1)
    return dcg / idcg


def score_run(
    run: RunRanking, qrels: Qrels, k: int = 10, threads: int = 1
) -> PerQueryScores:
    """NDCG@k for every judged query with at least one relevant doc.

    Judged queries absent from the run score 0; queries lacking any
    relevant document are dropped with a logged count.
    """
    per_query_grades: dict[str, dict[str, int]] = {}
    for (qid, did), grade in qrels.judgments.items():
        per_query_grades.setdefault(qid, {})[did] = grade
    qids = sorted(per_query_grades)
    dropped = 0
    scorable: list[str] = []
    for qid in qids:
        if any(g >= 1 for g in per_query_grades[qid].values()):
            scorable.append(qid)
        else:
            dropped += 1
    if dropped:
        logger.warning("score_run: dropped %d queries without relevant documents", dropped)

    def one(qid: str) -> float:
        ranked = [did for did, _ in run.entries.get(qid, [])]
        return ndcg_at_k(ranked, per_query_grades[qid], k)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(one, scorable))
    else:
        scores = [one(qid) for qid in scorable]
    return PerQueryScores(dict(zip(scorable, scores)), k=k)


def aggregate(scores: PerQueryScores) -> AggregateStats:
    """Mean, population standard deviation, and coefficient of variation."""
    values = np.array(sorted(scores.values.values()), dtype=float)
    if values.size < 2:
        raise ValueError("need at least 2 queries to aggregate")
    mu = float(values.mean())
    sigma = float(values.std())
    cv = sigma / mu if mu > 0 else None
    return AggregateStats(mu, sigma, cv)


def combine_datasets(stats: Sequence[AggregateStats]) -> AggregateStats:
    """Unweighted average of per-dataset aggregates (the multi-dataset
    reporting convention)."""
    if not stats:
        raise ValueError("no dataset stats to combine")
    mu = sum(s.mu for s in stats) / len(stats)
    sigma = sum(s.sigma for s in stats) / len(stats)
    if any(s.cv is None for s in stats):
        cv = None
    else:
        cv = sum(s.cv for s in stats) / len(stats)
    return AggregateStats(mu, sigma, cv)


def bucket_curve(
    scores: PerQueryScores, profiles: Sequence[ComplexityProfile], k_buckets: int
) -> BucketCurve:
    """Per-bucket mean complexity and mean NDCG over quantile buckets."""
    by_id = {p.query_id: p for p in profiles}
    missing = sorted(set(scores.values) - set(by_id))
    if missing:
        raise ValueError(f"queries without complexity profiles: {', '.join(missing)}")
    scored_profiles = [by_id[qid] for qid in sorted(scores.values)]
    assignment = assign_buckets(scored_profiles, k_buckets)
    rows = []
    for bucket in range(k_buckets):
        qids = [qid for qid, b in assignment.items() if b == bucket]
        comp = sum(by_id[qid].score for qid in qids) / len(qids)
        ndcg = sum(scores.values[qid] for qid in qids) / len(qids)
        rows.append(BucketRow(bucket, comp, ndcg, len(qids)))
    return BucketCurve(tuple(rows))


def paired_significance(
    scores_a: Mapping[str, float],
    scores_b: Mapping[str, float],
    resamples: int = 10_000,
    seed: int = 0,
    comparisons: int = 1,
) -> SignificanceResult:
    """Two-sided paired sign-flip permutation test on per-query
    differences, Bonferroni-adjusted for `comparisons` tests.

    p = (1 + #{resamples with |mean flipped| >= |mean observed|})
        / (resamples + 1)
    """
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    if comparisons < 1:
        raise ValueError("comparisons must be >= 1")
    keys_a = set(scores_a)
    keys_b = set(scores_b)
    if keys_a != keys_b:
        raise ValueError(
            "query sets differ: "
            f"only-a={sorted(keys_a - keys_b)[:5]} only-b={sorted(keys_b - keys_a)[:5]}"
        )
    qids = sorted(keys_a)
    diffs = np.array([scores_a[q] - scores_b[q] for q in qids])
    observed = abs(float(diffs.mean()))
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = resamples
    while remaining > 0:
        chunk = min(_SIGN_CHUNK, remaining)
        signs = rng.integers(0, 2, size=(chunk, diffs.size)) * 2 - 1
        stats = np.abs((signs * diffs).mean(axis=1))
        hits += int(np.sum(stats >= observed))
        remaining -= chunk
    raw_p = (1 + hits) / (resamples + 1)
    return SignificanceResult(
        raw_p=raw_p,
        adjusted_p=min(1.0, comparisons * raw_p),
        comparisons=comparisons,
        resamples=resamples,
        seed=seed,
    )


def emit_report(
    stats: AggregateStats,
    curve: BucketCurve,
    per_query: PerQueryScores,
    complexity_scores: Mapping[str, float],
    out_dir,
) -> list[Path]:
    """Write summary.txt, per_query.tsv, and bucket_curve.tsv; all output
    (field order, float formatting) is stable across reruns."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cv_text = f"{stats.cv:.6f}" if stats.cv is not None else "NA"

    summary = out_dir / "summary.txt"
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write(f"mu={stats.mu:.6f}\n")
        fh.write(f"sigma={stats.sigma:.6f}\n")
        fh.write(f"cv={cv_text}\n")
        fh.write(f"n_queries={len(per_query.values)}\n")
        fh.write(f"k={per_query.k}\n")
        for row in curve.rows:
            fh.write(
                f"{row.bucket}\t{row.mean_complexity:.6f}\t{row.mean_ndcg:.6f}\t{row.count}\n"
            )

    per_query_path = out_dir / "per_query.tsv"
    with open(per_query_path, "w", encoding="utf-8") as fh:
        fh.write("query_id\tcomplexity_score\tndcg\n")
        for qid in sorted(per_query.values):
            fh.write(
                f"{qid}\t{complexity_scores[qid]:.6f}\t{per_query.values[qid]:.6f}\n"
            )

    curve_path = out_dir / "bucket_curve.tsv"
    with open(curve_path, "w", encoding="utf-8") as fh:
        fh.write("bucket\tmean_complexity\tmean_ndcg\tcount\n")
        for row in curve.rows:
            fh.write(
                f"{row.bucket}\t{row.mean_complexity:.6f}\t{row.mean_ndcg:.6f}\t{row.count}\n"
            )
    return [summary, per_query_path, curve_path]
