"""Exception hierarchy shared by all unano modules."""

from __future__ import annotations


class UnanoError(Exception):
    """Base class for every error raised by the toolkit."""


# -- rdf model ---------------------------------------------------------------


class InvalidIri(UnanoError, ValueError):
    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"invalid IRI {text!r} at position {position}: {reason}")


class InvalidTerm(UnanoError, ValueError):
    pass


class LiteralSubject(UnanoError, ValueError):
    pass


class TooManyBlankNodes(UnanoError):
    pass


# -- TriG --------------------------------------------------------------------


class ParseError(UnanoError):
    """Syntax error with a 1-based line/column position."""

    def __init__(
        self,
        message: str,
        line: int,
        column: int,
        expected: list[str] | None = None,
        span: "tuple[int, int] | None" = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.expected = list(expected or [])
        self.span = span
        text = f"line {line}, column {column}: {message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        super().__init__(text)

    @property
    def offset(self) -> int:
        return self.span[0] if self.span else 0


class UnknownPrefix(ParseError):
    pass


class BaseRequired(ParseError):
    pass


# -- statement URIs ----------------------------------------------------------


class SentenceError(UnanoError, ValueError):
    pass


class EmptySentence(SentenceError):
    pass


class SentenceTooLong(SentenceError):
    pass


class InvalidLanguageTag(UnanoError, ValueError):
    pass


class NotAStatementUri(UnanoError, ValueError):
    pass


class BadPercentEscape(NotAStatementUri):
    pass


# -- nanopublications --------------------------------------------------------


class PartialWithoutFormula(UnanoError, ValueError):
    pass


class AlreadyFormalized(UnanoError):
    pass


class InvalidNanopub(UnanoError):
    def __init__(self, report):
        self.report = report
        codes = ", ".join(v.code for v in report.violations)
        super().__init__(f"structurally invalid nanopublication: {codes}")


# -- claim graph -------------------------------------------------------------


class SelfContradiction(UnanoError, ValueError):
    pass


class EndpointKindMismatch(UnanoError, ValueError):
    pass


class UnknownRelationKind(UnanoError, KeyError):
    pass


class UnknownRelationPredicate(UnanoError):
    pass


# -- CNL ---------------------------------------------------------------------


class InvalidPattern(UnanoError, ValueError):
    pass


class AmbiguousPattern(InvalidPattern):
    def __init__(self, message: str, witness: str):
        self.witness = witness
        super().__init__(f"{message}; witness: {witness!r}")


class LexiconConflict(UnanoError, ValueError):
    pass
