"""Typed relations among claims (statement IRIs) and agents.

Relations are stored as default-graph triples. Symmetric relations are kept
once, smaller IRI first, and mirrored at query time.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from unano.errors import (
    EndpointKindMismatch,
    NotAStatementUri,
    SelfContradiction,
    UnknownRelationKind,
    UnknownRelationPredicate,
)
from unano.fileio import atomic_write_text
from unano.rdf import DEFAULT_GRAPH, Dataset, Iri, Quad
from unano.statements import decode_statement, is_statement_uri
from unano.trig import parse_trig, serialize_trig
from unano.vocab import AGREES_WITH, CONTRADICTS, DEFAULT_AUTHORITY, DISAGREES_WITH, ST_NS, SUPPORTS, UNANO_NS

log = logging.getLogger(__name__)

CLAIM = "claim"
AGENT = "agent"


class Direction(enum.Enum):
    OUTGOING = "Outgoing"
    INCOMING = "Incoming"
    UNDIRECTED = "Undirected"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class RelationKind:
    name: str
    predicate: Iri
    subject_kind: str = CLAIM
    object_kind: str = CLAIM
    symmetric: bool = False
    irreflexive: bool = False

    def __post_init__(self):
        for k in (self.subject_kind, self.object_kind):
            if k not in (CLAIM, AGENT):
                raise ValueError(f"endpoint kind must be {CLAIM!r} or {AGENT!r}, got {k!r}")
        if self.symmetric and self.subject_kind != self.object_kind:
            raise ValueError(f"symmetric relation {self.name} must join endpoints of the same kind")


CONTRADICTS_KIND = RelationKind("Contradicts", CONTRADICTS, CLAIM, CLAIM, symmetric=True, irreflexive=True)
SUPPORTS_KIND = RelationKind("Supports", SUPPORTS, CLAIM, CLAIM)
AGREES_WITH_KIND = RelationKind("AgreesWith", AGREES_WITH, AGENT, CLAIM)
DISAGREES_WITH_KIND = RelationKind("DisagreesWith", DISAGREES_WITH, AGENT, CLAIM)

BUILTIN_KINDS = (CONTRADICTS_KIND, SUPPORTS_KIND, AGREES_WITH_KIND, DISAGREES_WITH_KIND)
STORE_PREFIXES = {"rel": Iri(UNANO_NS), "st": Iri(ST_NS)}


def default_registry() -> dict[str, RelationKind]:
    return {k.name: k for k in BUILTIN_KINDS}


def _build_index(edges) -> dict:
    index: dict = {}
    for s, kind, o in edges:
        for node, entry in _index_entries(s, kind, o):
            index.setdefault(node, set()).add(entry)
    return {node: frozenset(entries) for node, entries in index.items()}


def _index_entries(s: Iri, kind: RelationKind, o: Iri):
    if kind.symmetric:
        yield s, (kind.name, o, Direction.UNDIRECTED)
        yield o, (kind.name, s, Direction.UNDIRECTED)
    else:
        yield s, (kind.name, o, Direction.OUTGOING)
        yield o, (kind.name, s, Direction.INCOMING)


@dataclass(frozen=True)
class ClaimStore:
    dataset: Dataset = field(default_factory=lambda: Dataset(frozenset(), STORE_PREFIXES))
    registry: Mapping[str, RelationKind] = field(default_factory=default_registry)
    known_authorities: tuple = (DEFAULT_AUTHORITY,)
    index: Mapping = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "registry", MappingProxyType(dict(self.registry)))
        object.__setattr__(self, "known_authorities", tuple(self.known_authorities))
        if self.index is None:
            object.__setattr__(self, "index", MappingProxyType(_build_index(self.edges())))

    def kind(self, name: str) -> RelationKind:
        try:
            return self.registry[name]
        except KeyError:
            raise UnknownRelationKind(name) from None

    def kind_for_predicate(self, predicate: Iri) -> RelationKind | None:
        for k in self.registry.values():
            if k.predicate == predicate:
                return k
        return None

    def edges(self) -> set:
        """Stored edges as ``(subject, kind, object)`` in storage normal form."""
        out = set()
        for q in self.dataset.quads:
            if q.graph is DEFAULT_GRAPH:
                k = self.kind_for_predicate(q.predicate)
                if k is not None:
                    out.add((q.subject, k, q.object))
        return out

    def edge_set(self) -> set:
        """Edges as plain ``(subject, kind name, object)`` tuples."""
        return {(s, k.name, o) for s, k, o in self.edges()}

    def rebuild_index(self) -> Mapping:
        return MappingProxyType(_build_index(self.edges()))

    def register_kind(self, kind: RelationKind) -> "ClaimStore":
        if kind.name in self.registry and self.registry[kind.name] != kind:
            raise ValueError(f"relation kind {kind.name} already registered differently")
        clash = self.kind_for_predicate(kind.predicate)
        if clash is not None and clash.name != kind.name:
            raise ValueError(f"predicate {kind.predicate} already used by {clash.name}")
        registry = dict(self.registry)
        registry[kind.name] = kind
        return ClaimStore(self.dataset, registry, self.known_authorities)


def _check_endpoint(store: ClaimStore, node: Iri, expected: str, kind: RelationKind):
    if expected == CLAIM:
        try:
            decode_statement(node, store.known_authorities)
        except ValueError as exc:
            if isinstance(exc, NotAStatementUri):
                raise
            raise NotAStatementUri(str(exc)) from None
    elif is_statement_uri(node, store.known_authorities):
        raise EndpointKindMismatch(f"{kind.name} expects an agent here, got statement {node}")


def assert_relation(store: ClaimStore, subject, kind, object) -> ClaimStore:
    """Add the edge ``subject kind object``; idempotent."""
    subject = subject if isinstance(subject, Iri) else Iri(str(subject))
    object = object if isinstance(object, Iri) else Iri(str(object))
    if isinstance(kind, str):
        kind = store.kind(kind)
    elif store.registry.get(kind.name) != kind:
        raise UnknownRelationKind(kind.name)
    if kind.irreflexive and subject == object:
        raise SelfContradiction(f"{kind.name} edge from {subject} to itself")
    _check_endpoint(store, subject, kind.subject_kind, kind)
    _check_endpoint(store, object, kind.object_kind, kind)
    s, o = subject, object
    if kind.symmetric and o.value < s.value:
        s, o = o, s
    quad = Quad(s, kind.predicate, o)
    if quad in store.dataset.quads:
        return store
    index = dict(store.index)
    for node, entry in _index_entries(s, kind, o):
        index[node] = index.get(node, frozenset()) | {entry}
    return ClaimStore(
        store.dataset.with_quads([quad]), store.registry, store.known_authorities, MappingProxyType(index)
    )


def relations_of(store: ClaimStore, node) -> list[tuple[str, Iri, Direction]]:
    node = node if isinstance(node, Iri) else Iri(str(node))
    entries = store.index.get(node, ())
    return sorted(entries, key=lambda e: (e[0], e[1].value, e[2].value))


def contradiction_pairs(store: ClaimStore) -> list[tuple[Iri, Iri]]:
    pairs = set()
    for s, k, o in store.edges():
        if k.name == CONTRADICTS_KIND.name:
            a, b = sorted((s, o), key=lambda t: t.value)
            pairs.add((a, b))
    return sorted(pairs, key=lambda p: (p[0].value, p[1].value))


def agreement_profile(store: ClaimStore, agent) -> tuple[list[Iri], list[Iri]]:
    agrees, disagrees = [], []
    for name, neighbor, direction in relations_of(store, agent):
        if direction is not Direction.OUTGOING:
            continue
        if name == AGREES_WITH_KIND.name:
            agrees.append(neighbor)
        elif name == DISAGREES_WITH_KIND.name:
            disagrees.append(neighbor)
    return agrees, disagrees


def endpoints(store: ClaimStore) -> list[Iri]:
    nodes = {n for s, _, o in store.edges() for n in (s, o)}
    return sorted(nodes, key=lambda t: t.value)


def load_store(
    path,
    strict: bool = True,
    registry: Mapping[str, RelationKind] | None = None,
    known_authorities: Iterable = (DEFAULT_AUTHORITY,),
) -> ClaimStore:
    """Read a store file. Unknown predicates raise in strict mode and are skipped otherwise."""
    text = Path(path).read_text(encoding="utf-8")
    dataset = parse_trig(text)
    store = ClaimStore(registry=registry or default_registry(), known_authorities=tuple(known_authorities))
    for q in sorted(dataset.quads, key=Quad.sort_key):
        if q.graph is not DEFAULT_GRAPH:
            log.warning("ignoring quad outside the default graph: %s", q)
            continue
        kind = store.kind_for_predicate(q.predicate)
        if kind is None:
            if strict:
                raise UnknownRelationPredicate(f"{path}: unregistered relation predicate {q.predicate}")
            log.warning("skipping unregistered relation predicate %s", q.predicate)
            continue
        if not isinstance(q.object, Iri):
            raise EndpointKindMismatch(f"{path}: relation object must be an IRI, got {q.object!r}")
        store = assert_relation(store, q.subject, kind, q.object)
    return store


def save_store(store: ClaimStore, path) -> None:
    dataset = Dataset(store.dataset.quads, {**STORE_PREFIXES, **store.dataset.prefixes})
    atomic_write_text(path, serialize_trig(dataset))
