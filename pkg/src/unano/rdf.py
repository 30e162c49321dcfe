"""Minimal RDF data model with named graphs.

Terms, triples and quads are immutable values. A :class:`Dataset` is a set
of quads plus a prefix map; every operation returns a new dataset.
"""

from __future__ import annotations

import re
import types
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from unano.errors import InvalidIri, InvalidTerm, LiteralSubject, TooManyBlankNodes

_SCHEME_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")
# Characters that may not appear raw inside an IRI. Beyond whitespace and
# controls this excludes the delimiters that cannot be written inside <...>.
_FORBIDDEN_IRI_CHARS = frozenset('<>"{}|^`\\')
_BNODE_LABEL_RE = re.compile(r"[A-Za-z0-9_]+")

DEFAULT_BLANK_NODE_BOUND = 32


def _iri_error(text: str) -> tuple[int, str] | None:
    if not _SCHEME_RE.match(text):
        return 0, "missing scheme"
    for i, ch in enumerate(text):
        code = ord(ch)
        if ch.isspace():
            return i, "unescaped whitespace"
        if code < 0x20 or 0x7F <= code <= 0x9F:
            return i, "unescaped control character"
        if ch in _FORBIDDEN_IRI_CHARS:
            return i, f"character {ch!r} not allowed"
    return None


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self):
        if not isinstance(self.value, str):
            raise InvalidTerm(f"IRI text must be str, got {type(self.value).__name__}")
        err = _iri_error(self.value)
        if err is not None:
            raise InvalidIri(self.value, *err)

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __post_init__(self):
        if not isinstance(self.label, str) or not _BNODE_LABEL_RE.fullmatch(self.label):
            raise InvalidTerm(f"invalid blank node label {self.label!r}")

    def __str__(self) -> str:
        return "_:" + self.label


XSD_STRING = Iri("http://www.w3.org/2001/XMLSchema#string")
XSD_INTEGER = Iri("http://www.w3.org/2001/XMLSchema#integer")
XSD_BOOLEAN = Iri("http://www.w3.org/2001/XMLSchema#boolean")
RDF_LANG_STRING = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#langString")

_LANG_RE = re.compile(r"[A-Za-z]+(-[A-Za-z0-9]+)*")


@dataclass(frozen=True, slots=True)
class Literal:
    """A literal. Passing ``language`` implies the language-string datatype."""

    lexical: str
    datatype: Iri = XSD_STRING
    language: str | None = None

    def __post_init__(self):
        if not isinstance(self.lexical, str):
            raise InvalidTerm("literal lexical form must be str")
        if not isinstance(self.datatype, Iri):
            raise InvalidTerm("literal datatype must be an Iri")
        if self.language is not None:
            if not _LANG_RE.fullmatch(self.language):
                raise InvalidTerm(f"invalid language tag {self.language!r}")
            if self.datatype == XSD_STRING:
                object.__setattr__(self, "datatype", RDF_LANG_STRING)
            elif self.datatype != RDF_LANG_STRING:
                raise InvalidTerm("language tag requires the language-string datatype")
        elif self.datatype == RDF_LANG_STRING:
            raise InvalidTerm("language-string literal without a language tag")

    def __str__(self) -> str:
        return self.lexical


class DefaultGraph:
    """The distinguished name of the default graph."""

    _instance = None
    __slots__ = ()

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DEFAULT_GRAPH"

    def __reduce__(self):
        return (DefaultGraph, ())


DEFAULT_GRAPH = DefaultGraph()

Term = Union[Iri, BlankNode, Literal]
GraphName = Union[Iri, BlankNode, DefaultGraph]
Triple = tuple  # (subject, predicate, object)


def make_iri(text: str) -> Iri:
    """Return an :class:`Iri` or raise :class:`InvalidIri` with the offending position."""
    return Iri(text)


def term_key(term) -> tuple:
    """Total order over terms: default graph < IRIs < blank nodes < literals."""
    if isinstance(term, Iri):
        return (1, term.value)
    if isinstance(term, BlankNode):
        return (2, term.label)
    if isinstance(term, Literal):
        return (3, term.lexical, term.datatype.value, term.language or "")
    if term is DEFAULT_GRAPH:
        return (0,)
    raise TypeError(f"not an RDF term: {term!r}")


def triple_key(triple) -> tuple:
    s, p, o = triple
    return (term_key(s), term_key(p), term_key(o))


@dataclass(frozen=True, slots=True)
class Quad:
    subject: Iri | BlankNode
    predicate: Iri
    object: Term
    graph: GraphName = DEFAULT_GRAPH

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise LiteralSubject(f"literal {self.subject.lexical!r} cannot be a subject")
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise InvalidTerm(f"invalid subject {self.subject!r}")
        if not isinstance(self.predicate, Iri):
            raise InvalidTerm(f"predicate must be an IRI, got {self.predicate!r}")
        if not isinstance(self.object, (Iri, BlankNode, Literal)):
            raise InvalidTerm(f"invalid object {self.object!r}")
        if not (self.graph is DEFAULT_GRAPH or isinstance(self.graph, (Iri, BlankNode))):
            raise InvalidTerm(f"invalid graph name {self.graph!r}")

    @property
    def triple(self) -> tuple:
        return (self.subject, self.predicate, self.object)

    def sort_key(self) -> tuple:
        return (term_key(self.graph), *triple_key(self.triple))


@dataclass(frozen=True)
class Dataset:
    quads: frozenset = frozenset()
    prefixes: Mapping[str, Iri] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        quads = self.quads if isinstance(self.quads, frozenset) else frozenset(self.quads)
        for q in quads:
            if not isinstance(q, Quad):
                raise InvalidTerm(f"not a quad: {q!r}")
        prefixes = {}
        for label, ns in dict(self.prefixes).items():
            prefixes[label] = ns if isinstance(ns, Iri) else Iri(ns)
        object.__setattr__(self, "quads", quads)
        object.__setattr__(self, "prefixes", types.MappingProxyType(prefixes))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.quads == other.quads and dict(self.prefixes) == dict(other.prefixes)

    def __hash__(self):
        return hash(self.quads)

    def __len__(self) -> int:
        return len(self.quads)

    def __iter__(self) -> Iterator[Quad]:
        return iter(self.quads)

    def __contains__(self, quad) -> bool:
        return quad in self.quads

    def graph_names(self) -> list:
        """Distinct graph names in canonical order, default graph first."""
        return sorted({q.graph for q in self.quads}, key=term_key)

    def with_quads(self, quads: Iterable[Quad]) -> "Dataset":
        return Dataset(self.quads | frozenset(quads), self.prefixes)

    def without_quads(self, quads: Iterable[Quad]) -> "Dataset":
        return Dataset(self.quads - frozenset(quads), self.prefixes)

    def with_prefixes(self, prefixes: Mapping[str, Iri]) -> "Dataset":
        merged = dict(self.prefixes)
        merged.update(prefixes)
        return Dataset(self.quads, merged)

    def triples(self, graph=DEFAULT_GRAPH, subject=None, predicate=None, obj=None) -> list:
        """Sorted triples of one graph matching the given pattern (None is a wildcard)."""
        out = [
            q.triple
            for q in self.quads
            if q.graph == graph
            and (subject is None or q.subject == subject)
            and (predicate is None or q.predicate == predicate)
            and (obj is None or q.object == obj)
        ]
        out.sort(key=triple_key)
        return out

    def blank_nodes(self) -> set:
        found = set()
        for q in self.quads:
            for t in (q.subject, q.object, q.graph):
                if isinstance(t, BlankNode):
                    found.add(t)
        return found


def add_quad(dataset: Dataset, quad: Quad) -> Dataset:
    if isinstance(quad.subject, Literal):  # only reachable via object.__setattr__ tricks
        raise LiteralSubject("literal subject")
    if quad in dataset.quads:
        return dataset
    return Dataset(dataset.quads | {quad}, dataset.prefixes)


def graph_of(dataset: Dataset, name) -> set:
    """All triples in the graph called ``name`` (``DEFAULT_GRAPH`` for the default graph)."""
    return {q.triple for q in dataset.quads if q.graph == name}


# -- isomorphism -------------------------------------------------------------


def _positions(quad: Quad) -> tuple:
    return (quad.subject, quad.predicate, quad.object, quad.graph)


def _blank_signatures(quads) -> dict:
    """Per blank node: multiset of (position, ground part of the quad)."""
    sig = defaultdict(Counter)
    for q in quads:
        terms = _positions(q)
        shape = tuple(None if isinstance(t, BlankNode) else t for t in terms)
        for i, t in enumerate(terms):
            if isinstance(t, BlankNode):
                sig[t][(i, shape)] += 1
    return {b: frozenset(c.items()) for b, c in sig.items()}


def datasets_isomorphic(a: Dataset, b: Dataset, max_blank_nodes: int = DEFAULT_BLANK_NODE_BOUND) -> bool:
    """True iff some bijection of blank nodes maps the quads of ``a`` onto ``b``.

    Exhaustive backtracking search, pruned by per-node signatures. Prefix maps
    are not compared.
    """
    blanks_a, blanks_b = a.blank_nodes(), b.blank_nodes()
    for name, blanks in (("first", blanks_a), ("second", blanks_b)):
        if len(blanks) > max_blank_nodes:
            raise TooManyBlankNodes(
                f"{name} dataset has {len(blanks)} blank nodes (bound {max_blank_nodes})"
            )
    if len(a) != len(b) or len(blanks_a) != len(blanks_b):
        return False

    def has_blank(q):
        return any(isinstance(t, BlankNode) for t in _positions(q))

    ground_a = {q for q in a.quads if not has_blank(q)}
    ground_b = {q for q in b.quads if not has_blank(q)}
    if ground_a != ground_b:
        return False
    open_a = [q for q in a.quads if has_blank(q)]
    open_b = {q for q in b.quads if has_blank(q)}
    if not open_a:
        return True

    sig_a, sig_b = _blank_signatures(open_a), _blank_signatures(open_b)
    if Counter(sig_a.values()) != Counter(sig_b.values()):
        return False

    # most constrained quads first: fewest candidates in b
    index_b = defaultdict(list)
    for q in open_b:
        index_b[tuple(None if isinstance(t, BlankNode) else t for t in _positions(q))].append(q)

    def shape(q):
        return tuple(None if isinstance(t, BlankNode) else t for t in _positions(q))

    open_a.sort(key=lambda q: (len(index_b.get(shape(q), ())), q.sort_key()))
    for q in open_a:
        if shape(q) not in index_b:
            return False

    mapping: dict = {}
    used: set = set()

    def extend(i: int) -> bool:
        if i == len(open_a):
            return True
        qa = open_a[i]
        for qb in index_b[shape(qa)]:
            added = []
            ok = True
            for ta, tb in zip(_positions(qa), _positions(qb)):
                if not isinstance(ta, BlankNode):
                    continue
                if ta in mapping:
                    if mapping[ta] != tb:
                        ok = False
                        break
                elif tb in used or sig_a[ta] != sig_b.get(tb):
                    ok = False
                    break
                else:
                    mapping[ta] = tb
                    used.add(tb)
                    added.append(ta)
            if ok and extend(i + 1):
                return True
            for ta in added:
                used.discard(mapping.pop(ta))
        return False

    # Each a-quad maps to a b-quad under an injective mapping; equal sizes make it onto.
    if not extend(0):
        return False
    mapped = {
        Quad(*(mapping.get(t, t) for t in _positions(q)))
        for q in open_a
    }
    return mapped == open_b
