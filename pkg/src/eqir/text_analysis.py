"""Tokenization, rule-based POS tagging, and shallow syntactic segmentation.

Everything here is deterministic and pure. The tagger uses a coarse
14-tag set (NOUN, VERB, AUX, ADJ, ADV, DET, ADP, PRON, CCONJ, SCONJ,
NUM, PART, PUNCT, X) assigned by, in priority order: a closed-class /
frequent-word lexicon, suffix rules, and a NOUN default. Clause and
phrase counts are derived from fixed heuristic rules over the tag
sequence; a pre-tagged input path (`load_pretagged`) lets callers plug
in an external tagger while keeping the same segmentation rules.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, field

TAGSET = frozenset(
    {
        "NOUN",
        "VERB",
        "AUX",
        "ADJ",
        "ADV",
        "DET",
        "ADP",
        "PRON",
        "CCONJ",
        "SCONJ",
        "NUM",
        "PART",
        "PUNCT",
        "X",
    }
)

_PUNCT_CHARS = frozenset(string.punctuation)

_DETERMINERS = (
    "the a an this these those each every some any no none another both "
    "either neither such many few several all most more less"
)
_PRONOUNS = (
    "i you he she it we they me him her us them my your his its our their "
    "mine yours hers ours theirs myself yourself himself herself itself "
    "ourselves themselves who whom whose which what someone anyone everyone "
    "nobody something anything nothing everything"
)
_PREPOSITIONS = (
    "in on at of for with by from about into over under between among "
    "through during against within without across behind beyond near off "
    "onto upon toward towards per via around along outside inside despite "
    "except after before like"
)
_COORDINATORS = "and or but nor"
_SUBORDINATORS = (
    "because although though while if since unless until whereas whether "
    "that as whenever wherever"
)
_AUXILIARIES = (
    "be am is are was were been being have has had having do does did "
    "will would can could shall should may might must cannot "
    "isn't aren't wasn't weren't don't doesn't didn't won't wouldn't "
    "can't couldn't shouldn't hasn't haven't hadn't mustn't"
)
_ADVERBS = (
    "not very too also just only so then now here there when where why how "
    "never always often sometimes usually really quite rather almost "
    "already still yet again ever soon fast well even perhaps maybe "
    "instead together away back"
)
_PARTICLES = "to"
_NUMBER_WORDS = (
    "zero one two three four five six seven eight nine ten eleven twelve "
    "twenty thirty forty fifty hundred thousand million billion"
)
# The suffix rules cannot see uninflected or irregular verbs ("ran",
# "left", "jumps"), so frequent verbs and their inflections are carried
# in the lexicon alongside the closed classes.
_COMMON_VERBS = (
    "go goes went gone run runs ran running make makes made take takes took "
    "taken get gets got gotten see sees saw seen know knows knew known "
    "think thinks come comes came give gives gave given find finds tell "
    "tells told become becomes became show shows shown leave leaves left "
    "feel feels felt put puts bring brings begin begins began begun keep "
    "keeps kept hold holds held write writes wrote written stand stands "
    "stood hear hears let lets mean means set sets meet meets met pay pays "
    "paid sit sits sat speak speaks spoke spoken lead leads led read reads "
    "grow grows grew grown lose loses fall falls fell fallen send sends "
    "sent build builds built understand understands understood draw draws "
    "drew drawn break breaks broke broken spend spends spent cut cuts rise "
    "rises rose risen drive drives drove driven buy buys bought wear wears "
    "wore worn choose chooses chose chosen eat eats ate eaten win wins won "
    "teach teaches taught catch catches caught sell sells sold fight fights "
    "fought throw throws threw thrown fly flies flew flown say says said "
    "ask asks work works use uses want wants need needs seem seems help "
    "helps play plays move moves live believe believes happen happens "
    "include includes cause causes remain remains argue argues jump jumps "
    "bark barks sing sings sang sung sleep sleeps slept stop stops"
)
_COMMON_ADJECTIVES = (
    "good best better bad worse worst new old big small large great high "
    "low long short quick slow easy hard early young important public "
    "different popular common free full hot cold strong weak rich poor "
    "safe clear dark deep flat fair fine warm wide narrow cheap main "
    "single whole certain recent major minor simple complex reliable "
    "unstable other same own"
)


def _build_lexicon() -> dict[str, str]:
    lex: dict[str, str] = {}
    groups = (
        (_COMMON_ADJECTIVES, "ADJ"),
        (_COMMON_VERBS, "VERB"),
        (_NUMBER_WORDS, "NUM"),
        (_ADVERBS, "ADV"),
        (_PARTICLES, "PART"),
        (_AUXILIARIES, "AUX"),
        (_SUBORDINATORS, "SCONJ"),
        (_COORDINATORS, "CCONJ"),
        (_PREPOSITIONS, "ADP"),
        (_PRONOUNS, "PRON"),
        (_DETERMINERS, "DET"),
    )
    # Later groups win: true closed classes take precedence over the
    # open-class (verb/adjective) entries.
    for words, tag in groups:
        for w in words.split():
            lex[w] = tag
    return lex


_LEXICON = _build_lexicon()

# (suffix, tag), applied in order; a suffix fires only when at least two
# characters of stem remain, which keeps "red" out of the -ed rule.
_SUFFIX_RULES = (
    ("ly", "ADV"),
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ize", "VERB"),
    ("ate", "VERB"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("ive", "ADJ"),
    ("able", "ADJ"),
    ("tion", "NOUN"),
    ("ment", "NOUN"),
    ("ness", "NOUN"),
    ("ity", "NOUN"),
)

_NUMERAL_RE = re.compile(r"\d+(?:[.,:/-]\d+)*")

_SENTENCE_TERMINATORS = frozenset({".", "!", "?"})

_ABBREVIATIONS = frozenset(
    "dr mr mrs ms prof sr jr st no vs etc fig al inc ltd co ca approx "
    "e.g i.e cf dept est".split()
)

# Relative markers that introduce a dependent clause when tagged as
# PRON or SCONJ.
_RELATIVE_MARKERS = frozenset({"who", "which", "that", "whose", "whom", "where", "when"})


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    pos: str


@dataclass(frozen=True)
class TaggedText:
    """Tokens plus sentence boundaries as half-open [start, end) ranges."""

    tokens: tuple[Token, ...]
    sentence_bounds: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class SyntacticUnits:
    """Counts of the shallow syntactic units used by the complexity ratios."""

    clauses: int
    t_units: int
    complex_t_units: int
    dependent_clauses: int
    coordinate_phrases: int
    complex_nominals: int
    verb_phrases: int
    sentences: int
    noun_phrase_spans: tuple[tuple[int, int], ...] = field(default=())


def tokenize(text: str) -> list[str]:
    """Split on whitespace, then peel leading/trailing punctuation into
    their own tokens. Intra-word hyphens and apostrophes are preserved.
    """
    tokens: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        while chunk and chunk[0] in _PUNCT_CHARS:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and chunk[-1] in _PUNCT_CHARS:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def _tag_one(surface: str) -> str:
    lower = surface.lower()
    if all(c in _PUNCT_CHARS for c in lower):
        return "PUNCT"
    tag = _LEXICON.get(lower)
    if tag is not None:
        return tag
    for suffix, stag in _SUFFIX_RULES:
        if len(lower) >= len(suffix) + 2 and lower.endswith(suffix):
            return stag
    if _NUMERAL_RE.fullmatch(lower):
        return "NUM"
    return "NOUN"


def _sentence_bounds(tokens: list[Token]) -> tuple[tuple[int, int], ...]:
    bounds: list[tuple[int, int]] = []
    start = 0
    n = len(tokens)
    for i, tok in enumerate(tokens):
        if tok.surface not in _SENTENCE_TERMINATORS:
            continue
        if tok.surface == "." and i > 0:
            prev = tokens[i - 1]
            if prev.pos != "PUNCT" and prev.lower in _ABBREVIATIONS:
                continue
        nxt = tokens[i + 1] if i + 1 < n else None
        if nxt is None or nxt.surface[0].isupper():
            bounds.append((start, i + 1))
            start = i + 1
    if start < n:
        bounds.append((start, n))
    return tuple(bounds)


def pos_tag(tokens: list[str]) -> TaggedText:
    """Tag a token sequence and mark sentence boundaries.

    Boundaries fall after ``.``/``!``/``?`` when followed by a
    capitalized token or end of input, with an abbreviation guard on
    the period.
    """
    tagged = tuple(Token(t, t.lower(), _tag_one(t)) for t in tokens)
    return TaggedText(tagged, _sentence_bounds(list(tagged)))


def load_pretagged(path) -> TaggedText:
    """Read `surface<TAB>TAG` lines; a blank line separates sentences."""
    tokens: list[Token] = []
    bounds: list[tuple[int, int]] = []
    start = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                if len(tokens) > start:
                    bounds.append((start, len(tokens)))
                    start = len(tokens)
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise ValueError(f"line {lineno}: expected surface<TAB>tag")
            surface, tag = parts
            if tag not in TAGSET:
                raise ValueError(f"line {lineno}: unknown tag {tag}")
            tokens.append(Token(surface, surface.lower(), tag))
    if len(tokens) > start:
        bounds.append((start, len(tokens)))
    return TaggedText(tuple(tokens), tuple(bounds))


def _is_verbal(tok: Token) -> bool:
    return tok.pos in ("AUX", "VERB")


def _verb_groups(tokens, start: int, end: int) -> list[tuple[int, int, bool]]:
    """Maximal verb groups in [start, end) as (begin, stop, finite).

    A group is an optional infinitive "to" followed by a run of
    AUX/VERB tokens. Groups opened by "to" are non-finite.
    """
    groups: list[tuple[int, int, bool]] = []
    i = start
    while i < end:
        tok = tokens[i]
        opens_infinitive = (
            tok.pos == "PART"
            and tok.lower == "to"
            and i + 1 < end
            and _is_verbal(tokens[i + 1])
        )
        if _is_verbal(tok) or opens_infinitive:
            begin = i
            if opens_infinitive:
                i += 1
            while i < end and _is_verbal(tokens[i]):
                i += 1
            groups.append((begin, i, not opens_infinitive))
        else:
            i += 1
    return groups


def _noun_phrase_spans(tokens, start: int, end: int) -> list[tuple[int, int]]:
    """Maximal DET? NUM? ADJ* NOUN+ spans within one sentence."""
    spans: list[tuple[int, int]] = []
    i = start
    while i < end:
        j = i
        if j < end and tokens[j].pos == "DET":
            j += 1
        if j < end and tokens[j].pos == "NUM":
            j += 1
        while j < end and tokens[j].pos == "ADJ":
            j += 1
        k = j
        while k < end and tokens[k].pos == "NOUN":
            k += 1
        if k > j:
            spans.append((i, k))
            i = k
        else:
            i += 1
    return spans


def _neighbor_class(tokens, idx: int | None, np_spans) -> str | None:
    if idx is None:
        return None
    for a, b in np_spans:
        if a <= idx < b:
            return "NOUN"
    pos = tokens[idx].pos
    if pos in ("VERB", "AUX"):
        return "VERB"
    return pos


def segment_units(t: TaggedText) -> SyntacticUnits:
    """Count clauses, T-units, dependent clauses, coordinate phrases,
    complex nominals, and verb phrases with fixed heuristics:

    - clause: verb group not opened by infinitive "to"
    - dependent clause: clause preceded (after the previous clause, in
      the same sentence) by an SCONJ or a relative marker tagged
      PRON/SCONJ
    - T-units per sentence: 1 + number of CCONJ joining finite clauses
    - complex T-unit: T-unit segment containing a dependent clause
    - coordinate phrase: CCONJ not joining finite clauses whose
      neighboring phrase heads share a POS class
    - complex nominal: noun phrase with an ADJ or at least two NOUNs
    """
    tokens = t.tokens
    clauses = 0
    t_units = 0
    complex_t_units = 0
    dependent = 0
    coord_phrases = 0
    complex_nominals = 0
    verb_phrases = 0
    all_np_spans: list[tuple[int, int]] = []

    for start, end in t.sentence_bounds:
        groups = _verb_groups(tokens, start, end)
        finite = [(a, b) for a, b, fin in groups if fin]
        verb_phrases += len(groups)
        clauses += len(finite)

        # Which finite clauses are dependent: look for a subordinator or
        # relative marker between the previous clause and this one.
        dep_flags: list[bool] = []
        prev_end = start
        for a, b in finite:
            window = tokens[prev_end:a]
            is_dep = any(
                tok.pos == "SCONJ"
                or (tok.lower in _RELATIVE_MARKERS and tok.pos in ("PRON", "SCONJ"))
                for tok in window
            )
            dep_flags.append(is_dep)
            prev_end = b
        dependent += sum(dep_flags)

        # CCONJ tokens that join two finite clauses mark T-unit breaks.
        joining: list[int] = []
        for i in range(start, end):
            if tokens[i].pos != "CCONJ":
                continue
            before = any(b <= i for _, b in finite)
            after = any(a > i for a, _ in finite)
            if before and after:
                joining.append(i)
        t_units += 1 + len(joining)

        # Complex T-units: segments between joining CCONJs holding a
        # dependent clause.
        seg_edges = [start] + [i for i in joining] + [end]
        for si in range(len(seg_edges) - 1):
            lo = seg_edges[si]
            hi = seg_edges[si + 1]
            has_dep = any(
                dep_flags[ci] for ci, (a, _) in enumerate(finite) if lo <= a < hi
            )
            if has_dep:
                complex_t_units += 1

        np_spans = _noun_phrase_spans(tokens, start, end)
        all_np_spans.extend(np_spans)
        for a, b in np_spans:
            n_nouns = sum(1 for i in range(a, b) if tokens[i].pos == "NOUN")
            n_adjs = sum(1 for i in range(a, b) if tokens[i].pos == "ADJ")
            if n_adjs >= 1 or n_nouns >= 2:
                complex_nominals += 1

        joining_set = set(joining)
        for i in range(start, end):
            if tokens[i].pos != "CCONJ" or i in joining_set:
                continue
            left = next(
                (j for j in range(i - 1, start - 1, -1) if tokens[j].pos != "PUNCT"),
                None,
            )
            right = next(
                (j for j in range(i + 1, end) if tokens[j].pos != "PUNCT"), None
            )
            lc = _neighbor_class(tokens, left, np_spans)
            rc = _neighbor_class(tokens, right, np_spans)
            if lc is not None and lc == rc:
                coord_phrases += 1

    return SyntacticUnits(
        clauses=clauses,
        t_units=t_units,
        complex_t_units=complex_t_units,
        dependent_clauses=dependent,
        coordinate_phrases=coord_phrases,
        complex_nominals=complex_nominals,
        verb_phrases=verb_phrases,
        sentences=len(t.sentence_bounds),
        noun_phrase_spans=tuple(all_np_spans),
    )


def amplify_noun_phrases(text: str, repetitions: int = 1) -> str:
    """Repeat every maximal noun phrase `repetitions` extra times in place.

    Text without any noun phrase is returned re-joined but otherwise
    unchanged.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    tokens = tokenize(text)
    tagged = pos_tag(tokens)
    spans = segment_units(tagged).noun_phrase_spans
    out: list[str] = []
    starts = {a: b for a, b in spans}
    i = 0
    while i < len(tokens):
        if i in starts:
            b = starts[i]
            phrase = tokens[i:b]
            for _ in range(repetitions + 1):
                out.extend(phrase)
            i = b
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)
