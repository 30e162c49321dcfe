"""A tiny controlled natural language for binary claims.

A pattern pairs a sentence template such as ``"{S} is transmitted by {O}"``
with a predicate IRI. Templates are read word by word: the two slots are
whole words, and the fixed text around them is split into a prefix, a
middle (required) and a suffix.

Slot phrases may not contain, as a run of words, any fixed segment of any
pattern in the grammar (compared case-insensitively). With that rule the
grammar can decide at registration time whether some sentence would match
two patterns, or one pattern in two ways, and refuse the pattern with a
witness sentence. Parsing is therefore unique whenever it succeeds.

Term phrases resolve through a :class:`TermLexicon`; unknown phrases get an
IRI minted under a namespace by slug encoding (case kept, spaces to ``_``,
everything outside ``A-Za-z0-9-.~`` percent-encoded).
"""

from __future__ import annotations

import importlib.resources
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from unano.errors import AlreadyFormalized, AmbiguousPattern, InvalidPattern, LexiconConflict, SentenceError
from unano.nanopub import FormalizationStatus, Nanopub, formalization_status, formalize, sentence_of
from unano.rdf import DEFAULT_GRAPH, XSD_BOOLEAN, Dataset, Iri, Literal
from unano.statements import normalize_sentence
from unano.trig import parse_trig
from unano.vocab import (
    ALT_LABEL,
    CASE_INSENSITIVE,
    DEFAULT_MINT_NAMESPACE,
    PATTERN_ID,
    PREDICATE,
    PREF_LABEL,
    TEMPLATE,
)

SUBJECT_SLOT = "{S}"
OBJECT_SLOT = "{O}"


class _NotCovered:
    """Returned when no pattern covers a sentence or triple."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "NOT_COVERED"


NOT_COVERED = _NotCovered()


def _fold(word: str) -> str:
    return word.casefold()


@dataclass(frozen=True)
class CnlPattern:
    id: str
    sentence_template: str
    predicate: Iri
    slot_kinds: tuple = ("term", "term")
    case_insensitive_match: bool = False
    # derived from the template
    prefix: tuple = field(init=False, repr=False, compare=False)
    middle: tuple = field(init=False, repr=False, compare=False)
    suffix: tuple = field(init=False, repr=False, compare=False)
    subject_first: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.id:
            raise InvalidPattern("pattern id must be non-empty")
        if not isinstance(self.predicate, Iri):
            object.__setattr__(self, "predicate", Iri(str(self.predicate)))
        if tuple(self.slot_kinds) != ("term", "term"):
            raise InvalidPattern(f"{self.id}: only term-phrase slots are supported")
        words = self.sentence_template.split()
        if " ".join(words) != self.sentence_template:
            raise InvalidPattern(f"{self.id}: template must be single-space separated without padding")
        slots = [i for i, w in enumerate(words) if "{" in w or "}" in w]
        if [words[i] for i in slots] not in ([SUBJECT_SLOT, OBJECT_SLOT], [OBJECT_SLOT, SUBJECT_SLOT]):
            raise InvalidPattern(
                f"{self.id}: template needs exactly one {SUBJECT_SLOT} and one {OBJECT_SLOT}, each a whole word"
            )
        a, b = slots
        middle = tuple(words[a + 1 : b])
        if not middle:
            raise InvalidPattern(f"{self.id}: slots must be separated by fixed text")
        object.__setattr__(self, "prefix", tuple(words[:a]))
        object.__setattr__(self, "middle", middle)
        object.__setattr__(self, "suffix", tuple(words[b + 1 :]))
        object.__setattr__(self, "subject_first", words[a] == SUBJECT_SLOT)

    def segments(self) -> list[tuple]:
        return [seg for seg in (self.prefix, self.middle, self.suffix) if seg]

    def fill(self, subject_phrase: str, object_phrase: str) -> str:
        first, second = (subject_phrase, object_phrase) if self.subject_first else (object_phrase, subject_phrase)
        return " ".join([*self.prefix, first, *self.middle, second, *self.suffix])

    def _eq_words(self, got: list[str], want: tuple) -> bool:
        if self.case_insensitive_match:
            return [_fold(w) for w in got] == [_fold(w) for w in want]
        return list(got) == list(want)

    def splits(self, words: list[str], forbidden: "_Forbidden") -> list[tuple[str, str]]:
        """Every way ``words`` matches this pattern, as (subject phrase, object phrase)."""
        np_, nm, nq = len(self.prefix), len(self.middle), len(self.suffix)
        if len(words) < np_ + nm + nq + 2:
            return []
        if not self._eq_words(words[:np_], self.prefix):
            return []
        if nq and not self._eq_words(words[len(words) - nq :], self.suffix):
            return []
        inner = words[np_ : len(words) - nq]
        out = []
        for i in range(1, len(inner) - nm):
            if not self._eq_words(inner[i : i + nm], self.middle):
                continue
            first, second = inner[:i], inner[i + nm :]
            if forbidden.admits(first) and forbidden.admits(second):
                a, b = " ".join(first), " ".join(second)
                out.append((a, b) if self.subject_first else (b, a))
        return out


class _Forbidden:
    """Aho-Corasick automaton over words for the forbidden slot factors."""

    OTHER = None

    def __init__(self, segments: Iterable[tuple]):
        self.goto: list[dict] = [{}]
        self.dead: list[bool] = [False]
        for seg in segments:
            node = 0
            for w in seg:
                w = _fold(w)
                if w not in self.goto[node]:
                    self.goto.append({})
                    self.dead.append(False)
                    self.goto[node][w] = len(self.goto) - 1
                node = self.goto[node][w]
            self.dead[node] = True
        self.fail = [0] * len(self.goto)
        queue = deque(self.goto[0].values())
        while queue:
            node = queue.popleft()
            for w, child in self.goto[node].items():
                f = self.fail[node]
                while f and w not in self.goto[f]:
                    f = self.fail[f]
                self.fail[child] = self.goto[f].get(w, 0) if self.goto[f].get(w) != child else 0
                self.dead[child] = self.dead[child] or self.dead[self.fail[child]]
                queue.append(child)
        self.alphabet = sorted({w for g in self.goto for w in g})

    def step(self, state: int, word) -> int:
        if word is None:
            return 0
        w = _fold(word)
        while state and w not in self.goto[state]:
            state = self.fail[state]
        return self.goto[state].get(w, 0)

    def admits(self, words: list[str]) -> bool:
        if not words:
            return False
        state = 0
        for w in words:
            state = self.step(state, w)
            if self.dead[state]:
                return False
        return True


class _PatternNfa:
    """NFA over folded words (``None`` = any other word) accepting one pattern.

    Each accepting run corresponds to exactly one split of the sentence.
    """

    def __init__(self, pattern: CnlPattern, forbidden: _Forbidden):
        self.p = tuple(_fold(w) for w in pattern.prefix)
        self.m = tuple(_fold(w) for w in pattern.middle)
        self.q = tuple(_fold(w) for w in pattern.suffix)
        self.fb = forbidden
        self.start = ("P", 0)

    def accepting(self, state) -> bool:
        phase, i = state
        if self.q:
            return phase == "Q" and i == len(self.q)
        return phase == "S2"

    def _slot_step(self, ac: int, word, phase: str):
        nxt = self.fb.step(ac, word)
        return None if self.fb.dead[nxt] else (phase, nxt)

    def step(self, state, word) -> list:
        phase, i = state
        out = []
        if phase == "P":
            if i < len(self.p):
                if word == self.p[i]:
                    out.append(("P", i + 1))
            else:
                s = self._slot_step(0, word, "S1")
                if s:
                    out.append(s)
        elif phase == "S1":
            s = self._slot_step(i, word, "S1")
            if s:
                out.append(s)
            if word == self.m[0]:
                out.append(("M", 1))
        elif phase == "M":
            if i < len(self.m):
                if word == self.m[i]:
                    out.append(("M", i + 1))
            else:
                s = self._slot_step(0, word, "S2")
                if s:
                    out.append(s)
        elif phase == "S2":
            s = self._slot_step(i, word, "S2")
            if s:
                out.append(s)
            if self.q and word == self.q[0]:
                out.append(("Q", 1))
        elif phase == "Q":
            if i < len(self.q) and word == self.q[i]:
                out.append(("Q", i + 1))
        return out


def _filler(alphabet: Iterable[str]) -> str:
    taken = set(alphabet)
    for cand in ("x", "y", "z", "w", "q"):
        if cand not in taken:
            return cand
    n = 0
    while f"x{n}" in taken:
        n += 1
    return f"x{n}"


def _find_common_sentence(a: _PatternNfa, b: _PatternNfa, alphabet: list, need_divergence: bool) -> list | None:
    """BFS over the product automaton; returns a word list accepted by both, or None.

    With ``need_divergence`` the two runs must differ somewhere (two parses by
    the same pattern).
    """
    symbols = [*alphabet, None]
    start = (a.start, b.start, False)
    parent = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        sa, sb, div = cur
        if a.accepting(sa) and b.accepting(sb) and (div or not need_divergence):
            words = []
            while parent[cur] is not None:
                cur, w = parent[cur]
                words.append(w)
            return words[::-1]
        for w in symbols:
            for ta in a.step(sa, w):
                for tb in b.step(sb, w):
                    nxt = (ta, tb, div or ta != tb)
                    if nxt not in parent:
                        parent[nxt] = (cur, w)
                        queue.append(nxt)
    return None


@dataclass(frozen=True)
class Grammar:
    patterns: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "patterns", tuple(self.patterns))
        object.__setattr__(self, "_forbidden", _Forbidden(seg for p in self.patterns for seg in p.segments()))

    @property
    def forbidden(self) -> _Forbidden:
        return self._forbidden

    def pattern_for(self, predicate: Iri) -> CnlPattern | None:
        for p in self.patterns:
            if p.predicate == predicate:
                return p
        return None

    def matches(self, sentence: str) -> list[tuple[CnlPattern, str, str]]:
        words = sentence.split(" ")
        return [(p, s, o) for p in self.patterns for s, o in p.splits(words, self._forbidden)]


def register_pattern(grammar: Grammar, pattern: CnlPattern) -> Grammar:
    """Return ``grammar`` extended by ``pattern``.

    Raises :class:`AmbiguousPattern` with a witness if some sentence would be
    matched by two patterns, or by ``pattern`` in two different ways.
    """
    if any(p.id == pattern.id for p in grammar.patterns):
        dup = next(p for p in grammar.patterns if p.id == pattern.id)
        raise AmbiguousPattern(f"pattern id {pattern.id!r} already registered", dup.sentence_template)
    extended = Grammar((*grammar.patterns, pattern))
    fb = extended.forbidden
    filler = _filler(fb.alphabet)
    new = _PatternNfa(pattern, fb)

    def witness(words):
        return " ".join(filler if w is None else w for w in words)

    found = _find_common_sentence(new, new, fb.alphabet, need_divergence=True)
    if found is not None:
        raise AmbiguousPattern(f"pattern {pattern.id!r} can match one sentence in two ways", witness(found))
    for other in grammar.patterns:
        found = _find_common_sentence(new, _PatternNfa(other, fb), fb.alphabet, need_divergence=False)
        if found is not None:
            raise AmbiguousPattern(f"patterns {pattern.id!r} and {other.id!r} overlap", witness(found))
    return extended


# -- lexicon -----------------------------------------------------------------

_SLUG_SAFE = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-.~")


def slug_encode(phrase: str) -> str:
    out = []
    for ch in phrase:
        if ch == " ":
            out.append("_")
        elif ch in _SLUG_SAFE:
            out.append(ch)
        else:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
    return "".join(out)


def slug_decode(slug: str) -> str | None:
    """Inverse of :func:`slug_encode`; None for anything it would not produce."""
    buf = bytearray()
    i = 0
    while i < len(slug):
        ch = slug[i]
        if ch == "%":
            pair = slug[i + 1 : i + 3]
            if len(pair) != 2 or not all(c in "0123456789ABCDEF" for c in pair):
                return None
            buf.append(int(pair, 16))
            i += 3
        elif ch == "_":
            buf.append(0x20)
            i += 1
        elif ch in _SLUG_SAFE:
            buf.append(ord(ch))
            i += 1
        else:
            return None
    try:
        phrase = buf.decode("utf-8")
    except UnicodeDecodeError:
        return None
    return phrase if slug_encode(phrase) == slug else None


def _phrase_key(phrase: str) -> str:
    return _fold(normalize_sentence(phrase))


@dataclass(frozen=True)
class TermLexicon:
    mint_namespace: str = DEFAULT_MINT_NAMESPACE
    by_phrase: Mapping[str, Iri] = field(default_factory=dict)
    preferred: Mapping[Iri, str] = field(default_factory=dict)

    def __post_init__(self):
        Iri(self.mint_namespace)
        object.__setattr__(self, "by_phrase", MappingProxyType(dict(self.by_phrase)))
        object.__setattr__(self, "preferred", MappingProxyType(dict(self.preferred)))

    def add(self, phrase: str, iri, preferred: bool = False) -> "TermLexicon":
        """Map ``phrase`` to ``iri``. The first phrase of an IRI is its preferred one."""
        iri = iri if isinstance(iri, Iri) else Iri(str(iri))
        phrase = normalize_sentence(phrase)
        key = _fold(phrase)
        existing = self.by_phrase.get(key)
        if existing is not None and existing != iri:
            raise LexiconConflict(f"phrase {phrase!r} already denotes {existing}")
        by_phrase = {**self.by_phrase, key: iri}
        pref = dict(self.preferred)
        if preferred or iri not in pref:
            pref[iri] = phrase
        return TermLexicon(self.mint_namespace, by_phrase, pref)

    def mint(self, phrase: str) -> Iri:
        return Iri(self.mint_namespace + slug_encode(phrase))

    def resolve(self, phrase: str) -> Iri:
        return self.by_phrase.get(_phrase_key(phrase)) or self.mint(phrase)

    def phrase_for(self, iri: Iri) -> str | None:
        if iri in self.preferred:
            return self.preferred[iri]
        if isinstance(iri, Iri) and iri.value.startswith(self.mint_namespace):
            phrase = slug_decode(iri.value[len(self.mint_namespace) :])
            if phrase:
                try:
                    if normalize_sentence(phrase) == phrase:
                        return phrase
                except SentenceError:
                    return None
        return None


# -- parse / verbalize -------------------------------------------------------


def parse_cnl(grammar: Grammar, lexicon: TermLexicon, sentence: str):
    """Parse a normalized sentence into one triple, or return ``NOT_COVERED``.

    Raises :class:`SentenceError` when ``sentence`` is not normalized.
    """
    if normalize_sentence(sentence, max_length=max(len(sentence), 1)) != sentence:
        raise SentenceError(f"sentence is not normalized: {sentence!r}")
    found = grammar.matches(sentence)
    if len(found) != 1:
        return NOT_COVERED
    pattern, subj, obj = found[0]
    return (lexicon.resolve(subj), pattern.predicate, lexicon.resolve(obj))


def verbalize(grammar: Grammar, lexicon: TermLexicon, triple):
    """Render ``triple`` with the first pattern registered for its predicate.

    Only sentences that parse back to ``triple`` are returned; anything else
    is ``NOT_COVERED``.
    """
    s, p, o = triple
    pattern = grammar.pattern_for(p)
    if pattern is None or not isinstance(s, Iri) or not isinstance(o, Iri):
        return NOT_COVERED
    sp, op = lexicon.phrase_for(s), lexicon.phrase_for(o)
    if sp is None or op is None:
        return NOT_COVERED
    sentence = pattern.fill(sp, op)
    try:
        back = parse_cnl(grammar, lexicon, sentence)
    except SentenceError:
        return NOT_COVERED
    return sentence if back == (s, p, o) else NOT_COVERED


def auto_formalize(np: Nanopub, grammar: Grammar, lexicon: TermLexicon) -> Nanopub:
    """Formalize ``np`` from its sentence when the grammar covers it; otherwise return it unchanged."""
    if formalization_status(np) is not FormalizationStatus.UNFORMALIZED:
        raise AlreadyFormalized(f"{np.pub_id} already has a formal body")
    triple = parse_cnl(grammar, lexicon, sentence_of(np).sentence)
    if triple is NOT_COVERED:
        return np
    return formalize(np, [triple], partial=False)


# -- grammar files -----------------------------------------------------------


def grammar_from_dataset(dataset: Dataset, mint_namespace: str = DEFAULT_MINT_NAMESPACE) -> tuple[Grammar, TermLexicon]:
    """Read patterns and lexicon entries from the default graph of ``dataset``.

    Patterns register in order of their id; lexicon preferred labels are added
    before alternative labels.
    """
    triples = dataset.triples(DEFAULT_GRAPH)
    subjects: dict = {}
    for s, p, o in triples:
        subjects.setdefault(s, {}).setdefault(p, []).append(o)

    def single(props, pred, subject):
        vals = props.get(pred, [])
        if len(vals) != 1:
            raise InvalidPattern(f"{subject}: expected exactly one {pred}, found {len(vals)}")
        return vals[0]

    patterns = []
    for subject, props in subjects.items():
        if PATTERN_ID not in props:
            continue
        pid = single(props, PATTERN_ID, subject)
        template = single(props, TEMPLATE, subject)
        predicate = single(props, PREDICATE, subject)
        if not isinstance(pid, Literal) or not isinstance(template, Literal) or not isinstance(predicate, Iri):
            raise InvalidPattern(f"{subject}: pattern id and template must be literals, predicate an IRI")
        ci = props.get(CASE_INSENSITIVE, [])
        case_insensitive = bool(ci) and ci[0] == Literal("true", XSD_BOOLEAN)
        patterns.append(CnlPattern(pid.lexical, template.lexical, predicate, case_insensitive_match=case_insensitive))

    grammar = Grammar()
    for pattern in sorted(patterns, key=lambda p: p.id):
        grammar = register_pattern(grammar, pattern)

    lexicon = TermLexicon(mint_namespace)
    for label_pred in (PREF_LABEL, ALT_LABEL):
        for s, p, o in triples:
            if p == label_pred and isinstance(s, Iri) and isinstance(o, Literal):
                lexicon = lexicon.add(o.lexical, s, preferred=label_pred == PREF_LABEL)
    return grammar, lexicon


def load_grammar(path=None, mint_namespace: str = DEFAULT_MINT_NAMESPACE) -> tuple[Grammar, TermLexicon]:
    """Load a grammar file, or the bundled default grammar when ``path`` is None."""
    if path is None:
        text = importlib.resources.files("unano").joinpath("data/default_grammar.trig").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return grammar_from_dataset(parse_trig(text), mint_namespace)
