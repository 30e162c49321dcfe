"""Underspecified nanopublications.

An assertion is split into a head graph and an optional body graph::

    :Pub1 np:hasAssertion :Pub1_Assertion .
    :Pub1_Assertion np:containsGraph :Pub1_Assertion_Head .
    :Pub1_Assertion np:containsGraph :Pub1_Assertion_Body .

    :Pub1_Assertion_Head {
        :Pub1_Assertion
            st:asSentence st:en/Malaria+is+transmitted+by+mosquitoes ;
            st:asFormula :Pub1_Assertion_Body .
    }

The linkage triples live in the default graph. The head names the sentence
(a statement IRI) and, when there is one, the body graph holding the formal
representation. A body may be marked partial with
``st:isPartialFormalization true`` in the head.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from unano.errors import AlreadyFormalized, InvalidNanopub, NotAStatementUri, PartialWithoutFormula
from unano.rdf import (
    DEFAULT_GRAPH,
    XSD_BOOLEAN,
    BlankNode,
    Dataset,
    Iri,
    Literal,
    Quad,
    graph_of,
)
from unano.statements import Statement, decode_statement, encode_statement
from unano.trig import LOCAL_NAME_RE
from unano.vocab import (
    AS_FORMULA,
    AS_SENTENCE,
    CONTAINS_GRAPH,
    DEFAULT_AUTHORITY,
    HAS_ASSERTION,
    IS_PARTIAL_FORMALIZATION,
    NANOPUB_PREFIXES,
)

TRUE = Literal("true", XSD_BOOLEAN)


class FormalizationStatus(enum.Enum):
    UNFORMALIZED = "Unformalized"
    PARTIAL = "Partial"
    FULL = "Full"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    message: str
    term: object = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


@dataclass(frozen=True)
class Nanopub:
    pub_id: Iri
    assertion_id: Iri
    head_id: Iri
    body_id: Iri | None
    dataset: Dataset = field(compare=False)
    known_authorities: tuple = field(default=(DEFAULT_AUTHORITY,), compare=False)

    @classmethod
    def from_dataset(cls, dataset: Dataset, pub_id, known_authorities=(DEFAULT_AUTHORITY,)) -> "Nanopub":
        """Interpret ``dataset`` as the nanopub ``pub_id``; raises :class:`InvalidNanopub`."""
        pub_id = _as_iri(pub_id)
        known_authorities = tuple(known_authorities)
        report, parts = _inspect(dataset, pub_id, known_authorities)
        if not report.valid:
            raise InvalidNanopub(report)
        return cls(pub_id, parts["assertion"], parts["head"], parts["body"], dataset, known_authorities)

    @property
    def sentence_iri(self) -> Iri:
        (s,) = [o for _, _, o in self.dataset.triples(self.head_id, self.assertion_id, AS_SENTENCE)]
        return s

    @property
    def body(self) -> set:
        return graph_of(self.dataset, self.body_id) if self.body_id is not None else set()

    @property
    def is_partial(self) -> bool:
        return (self.assertion_id, IS_PARTIAL_FORMALIZATION, TRUE) in graph_of(self.dataset, self.head_id)


def _as_iri(value) -> Iri:
    return value if isinstance(value, Iri) else Iri(str(value))


def _pub_prefixes(pub_id: Iri) -> dict:
    """Standard prefixes plus ``:`` for the namespace of ``pub_id`` when that shortens it."""
    prefixes = dict(NANOPUB_PREFIXES)
    v = pub_id.value
    cut = max(v.rfind("/"), v.rfind("#"))
    if cut > 0:
        ns, local = v[: cut + 1], v[cut + 1 :]
        if local and LOCAL_NAME_RE.fullmatch(local + "_Assertion_Head"):
            try:
                prefixes[""] = Iri(ns)
            except ValueError:
                pass
    return prefixes


def _check_formula(formula) -> list[tuple]:
    triples = []
    for t in formula:
        s, p, o = t
        Quad(s, p, o)  # validates term kinds
        triples.append((s, p, o))
    return triples


def build_nanopub(
    pub_id,
    sentence: Statement,
    formula: Iterable | None = None,
    partial: bool = False,
) -> Nanopub:
    """Build a nanopub for ``sentence`` with an optional formal body.

    Graph names are derived from ``pub_id`` by appending ``_Assertion``,
    ``_Assertion_Head`` and ``_Assertion_Body``.
    """
    pub_id = _as_iri(pub_id)
    formula = None if formula is None else _check_formula(formula)
    if partial and not formula:
        raise PartialWithoutFormula("a partial formalization needs at least one formula triple")
    assertion = Iri(pub_id.value + "_Assertion")
    head = Iri(pub_id.value + "_Assertion_Head")
    body = Iri(pub_id.value + "_Assertion_Body") if formula is not None else None

    quads = [
        Quad(pub_id, HAS_ASSERTION, assertion),
        Quad(assertion, CONTAINS_GRAPH, head),
        Quad(assertion, AS_SENTENCE, encode_statement(sentence), head),
    ]
    if body is not None:
        quads.append(Quad(assertion, CONTAINS_GRAPH, body))
        quads.append(Quad(assertion, AS_FORMULA, body, head))
        quads.extend(Quad(s, p, o, body) for s, p, o in formula)
        if partial:
            quads.append(Quad(assertion, IS_PARTIAL_FORMALIZATION, TRUE, head))
    dataset = Dataset(frozenset(quads), _pub_prefixes(pub_id))
    return Nanopub(pub_id, assertion, head, body, dataset, (sentence.authority,))


def _inspect(dataset: Dataset, pub_id: Iri, known_authorities) -> tuple[ValidationReport, dict]:
    violations = []
    parts = {"assertion": None, "head": None, "body": None}

    def fail(code, message, term=None):
        violations.append(Violation(code, message, term))

    assertions = [o for _, _, o in dataset.triples(DEFAULT_GRAPH, pub_id, HAS_ASSERTION)]
    assertions = [a for a in assertions if isinstance(a, Iri)]
    if not assertions:
        fail("MissingAssertionLink", f"no np:hasAssertion link from {pub_id} in the default graph", pub_id)
        return ValidationReport(tuple(violations)), parts
    assertion = assertions[0]
    parts["assertion"] = assertion

    contained = [
        o for _, _, o in dataset.triples(DEFAULT_GRAPH, assertion, CONTAINS_GRAPH) if isinstance(o, (Iri, BlankNode))
    ]

    def head_triples(g):
        return [t for t in dataset.triples(g, assertion) if t[1] in (AS_SENTENCE, AS_FORMULA)]

    heads = [g for g in contained if head_triples(g)]
    if not heads:
        fail("MissingHead", f"no graph contained in {assertion} carries its representations", assertion)
        return ValidationReport(tuple(violations)), parts
    conventional = Iri(assertion.value + "_Head")
    head = conventional if conventional in heads else heads[0]
    parts["head"] = head

    sentences = [o for _, _, o in dataset.triples(head, assertion, AS_SENTENCE)]
    if not sentences:
        fail("MissingSentence", f"head graph {head} has no st:asSentence triple", head)
    elif len(sentences) > 1:
        fail("MultipleSentences", f"head graph {head} has {len(sentences)} st:asSentence triples", head)
    for s in sentences:
        if not isinstance(s, Iri):
            fail("SentenceNotStatementUri", f"sentence object {s} is not an IRI", s)
            continue
        try:
            decode_statement(s, known_authorities)
        except (NotAStatementUri, ValueError) as exc:
            fail("SentenceNotStatementUri", str(exc), s)

    formulas = [o for _, _, o in dataset.triples(head, assertion, AS_FORMULA)]
    if len(formulas) > 1:
        fail("MultipleFormulas", f"head graph {head} names {len(formulas)} formula graphs", head)
    for f in formulas:
        if f not in contained:
            fail("DanglingFormula", f"formula graph {f} is not listed with np:containsGraph", f)
    for g in contained:
        if g != head and g not in formulas:
            fail("BodyWithoutFormulaLink", f"graph {g} is contained but no st:asFormula points to it", g)
    if formulas and formulas[0] in contained and isinstance(formulas[0], Iri):
        parts["body"] = formulas[0]
    return ValidationReport(tuple(violations)), parts


def validate_nanopub(dataset: Dataset, pub_id, known_authorities=(DEFAULT_AUTHORITY,)) -> ValidationReport:
    """Check the head/body structure of ``pub_id`` inside ``dataset``; never raises."""
    report, _ = _inspect(dataset, _as_iri(pub_id), tuple(known_authorities))
    return report


def formalization_status(np: Nanopub) -> FormalizationStatus:
    if np.body_id is None or not np.body:
        return FormalizationStatus.UNFORMALIZED
    if np.is_partial:
        return FormalizationStatus.PARTIAL
    return FormalizationStatus.FULL


def sentence_of(np: Nanopub, known_authorities=None) -> Statement:
    authorities = np.known_authorities if known_authorities is None else known_authorities
    return decode_statement(np.sentence_iri, authorities)


def formalize(np: Nanopub, formula: Iterable, partial: bool = False) -> Nanopub:
    """Return a copy of ``np`` whose body holds ``formula``.

    Only unformalized nanopubs can be formalized; an empty declared body is
    reused.
    """
    if formalization_status(np) is not FormalizationStatus.UNFORMALIZED:
        raise AlreadyFormalized(f"{np.pub_id} already has a formal body")
    formula = _check_formula(formula)
    if partial and not formula:
        raise PartialWithoutFormula("a partial formalization needs at least one formula triple")
    body = np.body_id or Iri(np.assertion_id.value + "_Body")
    flag = Quad(np.assertion_id, IS_PARTIAL_FORMALIZATION, TRUE, np.head_id)
    add = [
        Quad(np.assertion_id, CONTAINS_GRAPH, body),
        Quad(np.assertion_id, AS_FORMULA, body, np.head_id),
        *(Quad(s, p, o, body) for s, p, o in formula),
    ]
    dataset = np.dataset.with_quads(add)
    dataset = dataset.with_quads([flag]) if partial else dataset.without_quads([flag])
    return Nanopub(np.pub_id, np.assertion_id, np.head_id, body, dataset, np.known_authorities)

