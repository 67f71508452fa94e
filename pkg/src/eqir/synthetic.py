"""Seeded generator for a desk-scale retrieval dataset with a planted
linguistic bias.

Half the queries are linguistically simple (short templates); half are
complex (long templates with subordinate and relative clauses, varied
vocabulary). Every query pairs a topic word from a shared pool with
one (simple) or three (complex) content words; its positive document
carries exactly that combination, so relevance generalizes to unseen
queries through word-identity alignments. Positives of simple queries
additionally carry a planted artifact token, making them solvable
through a lexical shortcut that a biased weak learner picks up easily;
complex positives never contain the artifact and require the full
content-word overlap. Filler documents act as distractors. Everything
is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document, Qrels, Query

ARTIFACT_TOKEN = "xyzzy"

_CONTENT_WORDS = (
    "harbor lantern marble quarry violin meadow copper anvil kettle orchard "
    "saddle turbine falcon canyon timber mosaic"
).split()

_FILLER_WORDS = (
    "basin cellar dune ember fjord grove hearth inlet knoll loft mound notch "
    "pylon ridge shoal trench vale wharf attic bayou crag delta eddy geyser "
    "hollow islet jetty kiln ledge mesa nook plateau quay ravine slope "
    "upland vault willow zenith cairn"
).split()

_ADJ_SLOT = "old new big small quick narrow wide cheap recent common".split()
_ADV_SLOT = "broadly deeply rarely slowly widely openly barely calmly".split()

_ONSETS = "br cr dr fl gr kl pr sk tr vl".split()
_VOWELS = "a e i o u".split()
_CODAS = "n r l s m".split()


def _topic_word(index: int) -> str:
    i, e = divmod(index, len(_CODAS))
    i, d = divmod(i, len(_VOWELS))
    i, c = divmod(i, len(_ONSETS))
    i, b = divmod(i, len(_VOWELS))
    i, a = divmod(i, len(_ONSETS))
    if i:
        raise ValueError("topic index out of range")
    return _ONSETS[a] + _VOWELS[b] + _ONSETS[c] + _VOWELS[d] + _CODAS[e]


_SIMPLE_TEMPLATES = (
    "what is {topic} {c1}",
    "where is {topic} {c1}",
    "what is the {topic} {c1}",
    "{topic} {c1} cost",
)

# Every complex template contains one "is": the token the simple
# templates lean on, so a model that couples it to the artifact channel
# pays for that shortcut exactly on the complex half.
_COMPLEX_TEMPLATES = (
    "although the {adj} {c1} is broken , the {topic} {c2} still holds {c3}",
    "because the {c1} which kept the {c2} is {adj} , researchers {adv} "
    "chose {topic} {c3}",
    "while the {c2} is moved , the {adj} {topic} that carried {c1} and "
    "{c3} {adv} improved",
    "if the {c3} is {adj} , people near the {c1} {adv} trusted the "
    "{topic} {c2}",
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator knobs; defaults give a corpus of 2x n_queries documents
    (one positive per query plus one filler per query)."""

    artifact_token: str = ARTIFACT_TOKEN
    train_fraction: float = 2.0 / 3.0
    n_topics: int = 16
    filler_doc_factor: float = 1.0
    filler_words_per_doc: int = 6


@dataclass(frozen=True)
class TrainTestSplit:
    train_query_ids: tuple[str, ...]
    test_query_ids: tuple[str, ...]
    simple_query_ids: tuple[str, ...]
    complex_query_ids: tuple[str, ...]


@dataclass(frozen=True)
class SyntheticDataset:
    corpus: list[Document]
    queries: list[Query]
    qrels: Qrels
    split: TrainTestSplit
    artifact_token: str


def generate_synthetic_biased(
    seed: int, n_queries: int, spec: SyntheticSpec | None = None
) -> SyntheticDataset:
    """Build the planted-bias dataset; deterministic in (seed, n_queries)."""
    if n_queries < 40:
        raise ValueError("n_queries must be >= 40 (buckets would be degenerate)")
    spec = spec or SyntheticSpec()
    rng = np.random.default_rng(seed)
    topics = [_topic_word(i) for i in range(spec.n_topics)]

    queries: list[Query] = []
    docs: list[Document] = []
    judgments: dict[tuple[str, str], int] = {}
    simple_ids: list[str] = []
    complex_ids: list[str] = []
    seen_combos: set[tuple] = set()

    for i in range(n_queries):
        is_simple = i % 2 == 0
        qid = ("s" if is_simple else "c") + f"{i:04d}"
        did = "d" + qid
        # Rejection-sample an unused (topic, content words) combination
        # so every positive is the unique full match for its query.
        while True:
            topic = topics[int(rng.integers(len(topics)))]
            if is_simple:
                c1 = _CONTENT_WORDS[int(rng.integers(len(_CONTENT_WORDS)))]
                combo = ("s", topic, c1)
                contents = [c1]
            else:
                picks = rng.choice(len(_CONTENT_WORDS), size=3, replace=False)
                contents = [_CONTENT_WORDS[j] for j in picks]
                combo = ("c", topic, tuple(sorted(contents)))
            if combo not in seen_combos:
                seen_combos.add(combo)
                break
        if is_simple:
            template = _SIMPLE_TEMPLATES[int(rng.integers(len(_SIMPLE_TEMPLATES)))]
            text = template.format(topic=topic, c1=contents[0])
            # Positive documents carry only signal words: the planted
            # artifact plus the query's (topic, content) combination.
            doc_text = " ".join([spec.artifact_token, topic, contents[0]])
            simple_ids.append(qid)
        else:
            template = _COMPLEX_TEMPLATES[int(rng.integers(len(_COMPLEX_TEMPLATES)))]
            adj = _ADJ_SLOT[int(rng.integers(len(_ADJ_SLOT)))]
            adv = _ADV_SLOT[int(rng.integers(len(_ADV_SLOT)))]
            text = template.format(
                topic=topic, c1=contents[0], c2=contents[1], c3=contents[2], adj=adj, adv=adv
            )
            doc_text = " ".join([topic, contents[0], contents[1], contents[2]])
            complex_ids.append(qid)
        queries.append(Query(qid, text))
        docs.append(Document(did, "", doc_text))
        judgments[(qid, did)] = 1

    n_fillers = int(round(n_queries * spec.filler_doc_factor))
    pool = _FILLER_WORDS + _CONTENT_WORDS
    for j in range(n_fillers):
        words = [
            pool[int(rng.integers(len(pool)))] for _ in range(spec.filler_words_per_doc)
        ]
        docs.append(Document(f"f{j:04d}", "", " ".join(words)))

    def _split(ids: list[str]) -> tuple[list[str], list[str]]:
        order = rng.permutation(len(ids))
        n_train = int(round(len(ids) * spec.train_fraction))
        train = sorted(ids[k] for k in order[:n_train])
        test = sorted(ids[k] for k in order[n_train:])
        return train, test

    s_train, s_test = _split(simple_ids)
    c_train, c_test = _split(complex_ids)
    split = TrainTestSplit(
        train_query_ids=tuple(sorted(s_train + c_train)),
        test_query_ids=tuple(sorted(s_test + c_test)),
        simple_query_ids=tuple(simple_ids),
        complex_query_ids=tuple(complex_ids),
    )
    return SyntheticDataset(docs, queries, Qrels(judgments), split, spec.artifact_token)
