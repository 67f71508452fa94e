"""Lexical and syntactic complexity indices, normalization, and scoring.

Thirty indices are computed per text: fourteen syntactic ratios over
clause/T-unit/phrase counts and sixteen lexical-diversity measures over
token/type counts. Ratios whose denominator is zero (and length-gated
measures on short texts) are *missing* rather than imputed; a query's
aggregate score is the mean of its min-max column-normalized present
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .text_analysis import SyntacticUnits, TaggedText, pos_tag, segment_units, tokenize

# Report/column order: syntactic block then lexical block.
INDEX_ORDER: tuple[str, ...] = (
    "MLC",
    "MLS",
    "MLT",
    "C/S",
    "C/T",
    "CT/T",
    "DC/C",
    "DC/T",
    "T/S",
    "CP/C",
    "CP/T",
    "CN/C",
    "CN/T",
    "VP/T",
    "TTR",
    "MSTTR-50",
    "CTTR",
    "RTTR",
    "LogTTR",
    "Uber",
    "D",
    "LV",
    "VV1",
    "SVV1",
    "CVV1",
    "VV2",
    "NV",
    "AdjV",
    "AdvV",
    "ModV",
)

IndexVector = dict[str, "float | None"]

_LEXICAL_TAGS = ("NOUN", "VERB", "ADJ", "ADV")

_VOCD_SEED = 7
_VOCD_SAMPLES = 100
_VOCD_SIZES = range(35, 51)
_VOCD_GRID = range(1, 201)
_MIN_TOKENS_FOR_D = 50
_MSTTR_SEGMENT = 50


@dataclass(frozen=True)
class TokenCounts:
    """Token/type tallies over the word tokens (punctuation excluded)."""

    n_tokens: int
    n_types: int
    n_lex: int
    t_lex: int
    n_verb: int
    t_verb: int
    t_noun: int
    t_adj: int
    t_adv: int


@dataclass(frozen=True)
class ComplexityProfile:
    query_id: str
    raw: IndexVector
    normalized: IndexVector
    score: float
    all_missing: bool = False


def count_tokens(tagged: TaggedText) -> TokenCounts:
    words = [tok for tok in tagged.tokens if tok.pos != "PUNCT"]
    types = {tok.lower for tok in words}
    lex = [tok for tok in words if tok.pos in _LEXICAL_TAGS]
    verbs = [tok for tok in words if tok.pos == "VERB"]
    return TokenCounts(
        n_tokens=len(words),
        n_types=len(types),
        n_lex=len(lex),
        t_lex=len({tok.lower for tok in lex}),
        n_verb=len(verbs),
        t_verb=len({tok.lower for tok in verbs}),
        t_noun=len({tok.lower for tok in words if tok.pos == "NOUN"}),
        t_adj=len({tok.lower for tok in words if tok.pos == "ADJ"}),
        t_adv=len({tok.lower for tok in words if tok.pos == "ADV"}),
    )


def word_tokens(tagged: TaggedText) -> list[str]:
    """Lowercased word tokens in order, punctuation dropped."""
    return [tok.lower for tok in tagged.tokens if tok.pos != "PUNCT"]


def _ratio(num: float, den: float) -> float | None:
    if den == 0:
        return None
    return num / den


def _msttr(tokens: list[str]) -> float:
    n = len(tokens)
    if n < _MSTTR_SEGMENT:
        return len(set(tokens)) / n
    ttrs = []
    for i in range(n // _MSTTR_SEGMENT):
        seg = tokens[i * _MSTTR_SEGMENT : (i + 1) * _MSTTR_SEGMENT]
        ttrs.append(len(set(seg)) / _MSTTR_SEGMENT)
    return sum(ttrs) / len(ttrs)


def vocd_d(tokens: list[str]) -> float | None:
    """D via the vocd sampling procedure.

    For texts of at least 50 word tokens: draw 100 random samples
    without replacement at each size 35..50, average the TTR per size,
    and fit D on an integer grid 1..200 by least squares against
    ttr(n) = (D/n) * (sqrt(1 + 2n/D) - 1). Sampling uses a fixed
    internal seed so results are reproducible. Shorter texts yield
    a missing value.
    """
    n = len(tokens)
    if n < _MIN_TOKENS_FOR_D:
        return None
    arr = np.array(tokens, dtype=object)
    rng = np.random.default_rng(_VOCD_SEED)
    sizes = list(_VOCD_SIZES)
    mean_ttrs = np.empty(len(sizes))
    for si, size in enumerate(sizes):
        total = 0.0
        for _ in range(_VOCD_SAMPLES):
            idx = rng.choice(n, size=size, replace=False)
            total += len(set(arr[idx])) / size
        mean_ttrs[si] = total / _VOCD_SAMPLES
    sizes_arr = np.array(sizes, dtype=float)
    best_d = None
    best_sse = math.inf
    for d in _VOCD_GRID:
        pred = (d / sizes_arr) * (np.sqrt(1.0 + 2.0 * sizes_arr / d) - 1.0)
        sse = float(np.sum((pred - mean_ttrs) ** 2))
        if sse < best_sse:
            best_sse = sse
            best_d = d
    return float(best_d)


def lexical_indices(counts: TokenCounts, tokens: list[str]) -> IndexVector:
    """The sixteen lexical entries; `tokens` are the ordered lowercased
    word tokens (needed for the segmental MSTTR and D measures)."""
    n = counts.n_tokens
    if n == 0:
        raise ValueError("empty text")
    t = counts.n_types
    out: IndexVector = {}
    out["TTR"] = t / n
    out["RTTR"] = t / math.sqrt(n)
    out["CTTR"] = t / math.sqrt(2 * n)
    out["LogTTR"] = math.log(t) / math.log(n) if n > 1 else None
    if t == n or t == 1:
        out["Uber"] = None
    else:
        out["Uber"] = math.log(2 * n) / math.log(n / t)
    out["MSTTR-50"] = _msttr(tokens)
    out["D"] = vocd_d(tokens)
    out["LV"] = _ratio(counts.t_lex, counts.n_lex)
    out["VV1"] = _ratio(counts.t_verb, counts.n_verb)
    out["SVV1"] = _ratio(counts.t_verb**2, counts.n_verb)
    out["CVV1"] = (
        counts.t_verb / math.sqrt(2 * counts.n_verb) if counts.n_verb > 0 else None
    )
    out["VV2"] = _ratio(counts.t_verb, counts.n_lex)
    out["NV"] = _ratio(counts.t_noun, counts.n_lex)
    out["AdjV"] = _ratio(counts.t_adj, counts.n_lex)
    out["AdvV"] = _ratio(counts.t_adv, counts.n_lex)
    out["ModV"] = _ratio(counts.t_adj + counts.t_adv, counts.n_lex)
    return out


def syntactic_indices(units: SyntacticUnits, counts: TokenCounts) -> IndexVector:
    """The fourteen syntactic ratio entries."""
    if units.sentences < 1:
        raise ValueError("no sentences")
    n = counts.n_tokens
    c = units.clauses
    s = units.sentences
    tu = units.t_units
    return {
        "MLC": _ratio(n, c),
        "MLS": _ratio(n, s),
        "MLT": _ratio(n, tu),
        "C/S": _ratio(c, s),
        "C/T": _ratio(c, tu),
        "CT/T": _ratio(units.complex_t_units, tu),
        "DC/C": _ratio(units.dependent_clauses, c),
        "DC/T": _ratio(units.dependent_clauses, tu),
        "T/S": _ratio(tu, s),
        "CP/C": _ratio(units.coordinate_phrases, c),
        "CP/T": _ratio(units.coordinate_phrases, tu),
        "CN/C": _ratio(units.complex_nominals, c),
        "CN/T": _ratio(units.complex_nominals, tu),
        "VP/T": _ratio(units.verb_phrases, tu),
    }


def compute_raw_indices(tagged: TaggedText) -> IndexVector:
    """All thirty indices for one text; all-missing for word-less text."""
    counts = count_tokens(tagged)
    if counts.n_tokens == 0 or not tagged.sentence_bounds:
        return {name: None for name in INDEX_ORDER}
    units = segment_units(tagged)
    raw = syntactic_indices(units, counts)
    raw.update(lexical_indices(counts, word_tokens(tagged)))
    return {name: raw[name] for name in INDEX_ORDER}


def column_normalize(raws: list[IndexVector]) -> list[IndexVector]:
    """Min-max scale each index column to [0, 1] over its present values.

    Constant columns map to 0.5; missing values stay missing.
    """
    if len(raws) < 2:
        raise ValueError("column_normalize requires at least 2 profiles")
    normalized: list[IndexVector] = [dict() for _ in raws]
    for name in INDEX_ORDER:
        present = [(i, rv[name]) for i, rv in enumerate(raws) if rv.get(name) is not None]
        if not present:
            for nv in normalized:
                nv[name] = None
            continue
        values = [v for _, v in present]
        lo = min(values)
        hi = max(values)
        for i, rv in enumerate(raws):
            v = rv.get(name)
            if v is None:
                normalized[i][name] = None
            elif hi == lo:
                normalized[i][name] = 0.5
            else:
                normalized[i][name] = (v - lo) / (hi - lo)
    return normalized


def profile_queries(
    query_ids: list[str], tagged_texts: list[TaggedText]
) -> list[ComplexityProfile]:
    """Compute raw indices, column-normalize across the set, and average.

    A query whose every index is missing (e.g. punctuation-only text)
    receives the midpoint score 0.5, flagged via ``all_missing``.
    """
    if not query_ids:
        raise ValueError("empty query set")
    if len(query_ids) != len(tagged_texts):
        raise ValueError("query ids and texts must align")
    raws = [compute_raw_indices(t) for t in tagged_texts]
    normalized = column_normalize(raws)
    profiles = []
    for qid, raw, norm in zip(query_ids, raws, normalized):
        present = [v for v in norm.values() if v is not None]
        if present:
            profiles.append(ComplexityProfile(qid, raw, norm, sum(present) / len(present)))
        else:
            profiles.append(ComplexityProfile(qid, raw, norm, 0.5, all_missing=True))
    return profiles


def aggregate_scores(
    query_ids: list[str], texts: list[str], threads: int = 1
) -> list[ComplexityProfile]:
    """End-to-end scoring from raw text: tokenize, tag, profile."""
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            tagged = list(pool.map(lambda s: pos_tag(tokenize(s)), texts))
    else:
        tagged = [pos_tag(tokenize(s)) for s in texts]
    return profile_queries(query_ids, tagged)


def assign_buckets(profiles: list[ComplexityProfile], k: int) -> dict[str, int]:
    """Quantile buckets by score (ties broken by query id); bucket 0 is
    the least complex. Bucket sizes differ by at most one, with the
    remainder going to the lowest buckets."""
    if k < 2:
        raise ValueError("bucket count must be >= 2")
    if len(profiles) < k:
        raise ValueError(f"need at least {k} profiles for {k} buckets")
    ordered = sorted(profiles, key=lambda p: (p.score, p.query_id))
    n = len(ordered)
    base, rem = divmod(n, k)
    assignment: dict[str, int] = {}
    pos = 0
    for bucket in range(k):
        size = base + (1 if bucket < rem else 0)
        for p in ordered[pos : pos + size]:
            assignment[p.query_id] = bucket
        pos += size
    return assignment
