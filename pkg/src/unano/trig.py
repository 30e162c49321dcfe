"""Parser and serializer for the TriG subset used by nanopublication files.

Supported syntax: ``@prefix`` directives, graph blocks ``NAME { ... }`` and
``{ ... }``, top-level triples (default graph), predicate lists (``;``),
object lists (``,``), ``<IRI>`` references, prefixed names, blank node labels
``_:x``, the keyword ``a``, double-quoted strings with optional language tag
or ``^^`` datatype, integers and the booleans ``true``/``false``. Comments
run from ``#`` to end of line.

Deviations from standard TriG:

* Local parts of prefixed names may contain ``/`` and ``+`` (so
  ``st:en/Malaria+is+transmitted+by+mosquitoes`` parses as written).
  Percent escapes in local parts are kept verbatim in the expanded IRI.
* ``<>`` used as a graph label names the default graph. Anywhere else it
  denotes the base IRI, which must then be supplied by the caller.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from urllib.parse import urljoin

from unano.errors import BaseRequired, InvalidIri, InvalidTerm, ParseError, UnknownPrefix
from unano.rdf import (
    DEFAULT_GRAPH,
    RDF_LANG_STRING,
    XSD_BOOLEAN,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Dataset,
    Iri,
    Literal,
    Quad,
    term_key,
    triple_key,
)

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


@dataclass(frozen=True, slots=True)
class SourceSpan:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    span: SourceSpan
    value: object = None


# -- lexer -------------------------------------------------------------------

_PN_PREFIX = r"[A-Za-z](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?"
_PLX = r"%[0-9A-Fa-f]{2}"
_LOCAL_FIRST = rf"(?:[A-Za-z0-9_:+/]|{_PLX})"
_LOCAL_MID = rf"(?:[A-Za-z0-9_:+/.\-]|{_PLX})"
_LOCAL_LAST = rf"(?:[A-Za-z0-9_:+/\-]|{_PLX})"
_LOCAL = rf"{_LOCAL_FIRST}(?:{_LOCAL_MID}*{_LOCAL_LAST})?"

_PNAME_RE = re.compile(rf"(?P<prefix>{_PN_PREFIX})?:(?P<local>{_LOCAL})?")
LOCAL_NAME_RE = re.compile(_LOCAL)
PREFIX_LABEL_RE = re.compile(rf"(?:{_PN_PREFIX})?")
_KEYWORD_RE = re.compile(r"(a|true|false)(?![A-Za-z0-9_:\-])")
_BNODE_RE = re.compile(r"_:([A-Za-z0-9_]+)")
_INTEGER_RE = re.compile(r"[+-]?[0-9]+")
_LANGTAG_RE = re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")
_DIRECTIVE_RE = re.compile(r"@prefix(?![A-Za-z0-9\-])")
_WS_RE = re.compile(r"(?:[ \t\r\n]|#[^\n]*)*")
_IRIREF_RE = re.compile(r'<([^<>"{}|^`\\\x00-\x20]*)>')

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


class _Lexer:
    """Produces tokens on demand, so the first error in reading order wins."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: Token | None = None
        self._prev_kind: str | None = None
        # line start offsets for position reporting
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def position(self, offset: int) -> tuple[int, int]:
        lo, hi = 0, len(self._line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self._line_starts[lo] + 1

    def error(self, message: str, offset: int, expected=None, cls=ParseError, end: int | None = None):
        line, col = self.position(offset)
        return cls(message, line, col, expected, (offset, offset if end is None else end))

    def peek(self) -> Token:
        if self._peeked is None:
            self._peeked = self._scan()
        return self._peeked

    def next(self) -> Token:
        tok = self.peek()
        self._peeked = None
        self._prev_kind = tok.kind
        return tok

    def _scan(self) -> Token:
        text = self.text
        self.pos = _WS_RE.match(text, self.pos).end()
        start = self.pos
        if start >= len(text):
            return Token("EOF", "", SourceSpan(start, start))
        ch = text[start]

        def tok(kind, end, value=None):
            self.pos = end
            return Token(kind, text[start:end], SourceSpan(start, end), value)

        if ch in "{}.,;":
            return tok(ch, start + 1)
        if ch == "^":
            if text.startswith("^^", start):
                return tok("^^", start + 2)
            raise self.error("unexpected character '^'", start, ["'^^'"])
        if ch == "<":
            m = _IRIREF_RE.match(text, start)
            if not m:
                raise self.error("malformed IRI reference", start, ["'>'"])
            return tok("IRIREF", m.end(), m.group(1))
        if ch == '"':
            return self._string(start)
        if ch == "@":
            if self._prev_kind == "STRING":
                m = _LANGTAG_RE.match(text, start)
                if m:
                    return tok("LANGTAG", m.end(), m.group(1))
                raise self.error("malformed language tag", start, ["language tag"])
            m = _DIRECTIVE_RE.match(text, start)
            if m:
                return tok("PREFIX", m.end())
            raise self.error("unknown directive", start, ["'@prefix'"])
        if ch == "_" and text.startswith("_:", start):
            m = _BNODE_RE.match(text, start)
            if not m:
                raise self.error("malformed blank node label", start, ["blank node label"])
            return tok("BNODE", m.end(), m.group(1))
        if ch.isdigit() or ch in "+-":
            m = _INTEGER_RE.match(text, start)
            if m:
                return tok("INTEGER", m.end(), m.group(0))
        m = _PNAME_RE.match(text, start)
        if m:
            return tok("PNAME", m.end(), (m.group("prefix") or "", m.group("local") or ""))
        m = _KEYWORD_RE.match(text, start)
        if m:
            return tok(m.group(1), m.end())
        raise self.error(f"unexpected character {ch!r}", start)

    def _string(self, start: int) -> Token:
        text = self.text
        i = start + 1
        out = []
        while True:
            if i >= len(text):
                raise self.error("unterminated string literal", i, ["'\"'"])
            c = text[i]
            if c == '"':
                self.pos = i + 1
                return Token("STRING", text[start : i + 1], SourceSpan(start, i + 1), "".join(out))
            if c in "\n\r":
                raise self.error("line break inside string literal", i, ["'\"'"])
            if c == "\\":
                if i + 1 >= len(text):
                    raise self.error("unterminated escape", i, ["escape sequence"])
                e = text[i + 1]
                if e in _ESCAPES:
                    out.append(_ESCAPES[e])
                    i += 2
                    continue
                if e in "uU":
                    width = 4 if e == "u" else 8
                    digits = text[i + 2 : i + 2 + width]
                    if len(digits) != width or not all(d in "0123456789abcdefABCDEF" for d in digits):
                        raise self.error("malformed unicode escape", i, [f"{width} hex digits"])
                    code = int(digits, 16)
                    if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
                        raise self.error("unicode escape out of range", i)
                    out.append(chr(code))
                    i += 2 + width
                    continue
                raise self.error(f"unknown escape '\\{e}'", i, ["escape sequence"])
            out.append(c)
            i += 1


# -- parser ------------------------------------------------------------------

_TERM_START = ["IRI", "prefixed name", "blank node"]
_OBJECT_START = _TERM_START + ["literal"]


class _Parser:
    def __init__(self, text: str, base: str | None):
        self.lex = _Lexer(text)
        self.base = base
        self.prefixes: dict[str, Iri] = {}
        self.quads: set[Quad] = set()

    # raw terms are resolved once the enclosing statement is complete, so a
    # structural error inside a statement is reported before prefix errors
    def parse(self) -> Dataset:
        lex = self.lex
        while True:
            tok = lex.peek()
            if tok.kind == "EOF":
                break
            if tok.kind == "PREFIX":
                self._prefix_directive()
            elif tok.kind == "{":
                lex.next()
                self._block(DEFAULT_GRAPH, tok)
            else:
                first = self._subject_or_label()
                nxt = lex.peek()
                if nxt.kind == "{":
                    lex.next()
                    if first[0] == "IRIREF" and first[1].value == "":
                        graph = DEFAULT_GRAPH
                    elif first[0] in ("IRIREF", "PNAME", "BNODE"):
                        graph = self._resolve(first)
                    else:
                        raise lex.error("graph label must be an IRI or blank node", first[1].span.start)
                    self._block(graph, nxt)
                else:
                    raw = self._triples_after_subject(first)
                    self._expect(".", ["'.'"])
                    self._commit(raw, DEFAULT_GRAPH)
        return Dataset(frozenset(self.quads), self.prefixes)

    def _expect(self, kind: str, expected: list[str]) -> Token:
        tok = self.lex.peek()
        if tok.kind != kind:
            raise self._unexpected(tok, expected)
        return self.lex.next()

    def _unexpected(self, tok: Token, expected: list[str]) -> ParseError:
        what = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return self.lex.error(f"unexpected {what}", tok.span.start, expected, end=tok.span.end)

    def _prefix_directive(self):
        self.lex.next()
        tok = self.lex.next()
        if tok.kind != "PNAME" or tok.value[1]:
            raise self._unexpected(tok, ["prefix label"])
        iri_tok = self._expect("IRIREF", ["IRI"])
        self._expect(".", ["'.'"])
        self.prefixes[tok.value[0]] = self._resolve(("IRIREF", iri_tok))

    def _block(self, graph, open_tok: Token):
        lex = self.lex
        while True:
            tok = lex.peek()
            if tok.kind == "}":
                lex.next()
                return
            if tok.kind == "EOF":
                raise self._unexpected(tok, ["'}'"])
            first = self._subject_or_label()
            raw = self._triples_after_subject(first)
            tok = lex.peek()
            if tok.kind == ".":
                lex.next()
                self._commit(raw, graph)
            elif tok.kind == "}":
                self._commit(raw, graph)
            else:
                raise self._unexpected(tok, ["';'", "','", "'.'", "'}'"])

    def _raw_term(self, expected: list[str]) -> tuple:
        tok = self.lex.next()
        if tok.kind in ("IRIREF", "PNAME", "BNODE", "INTEGER", "true", "false"):
            return (tok.kind, tok)
        if tok.kind == "STRING":
            nxt = self.lex.peek()
            if nxt.kind == "LANGTAG":
                self.lex.next()
                return ("LANG", tok, nxt)
            if nxt.kind == "^^":
                self.lex.next()
                dt = self.lex.next()
                if dt.kind not in ("IRIREF", "PNAME"):
                    raise self._unexpected(dt, ["datatype IRI"])
                return ("TYPED", tok, dt)
            return ("STRING", tok)
        if tok.kind == "a" and expected is _VERB:
            return ("a", tok)
        raise self._unexpected(tok, expected)

    def _subject_or_label(self) -> tuple:
        raw = self._raw_term(_TERM_START + ["'{'", "'@prefix'"])
        if raw[0] not in ("IRIREF", "PNAME", "BNODE"):
            raise self.lex.error(
                "literal cannot be used as subject", raw[1].span.start, _TERM_START, end=raw[-1].span.end
            )
        return raw

    def _triples_after_subject(self, subject: tuple) -> list:
        lex = self.lex
        raw = []
        while True:
            verb = self._raw_term(_VERB)
            if verb[0] not in ("IRIREF", "PNAME", "a"):
                raise lex.error("predicate must be an IRI", verb[1].span.start, _VERB)
            while True:
                obj = self._raw_term(_OBJECT_START)
                raw.append((subject, verb, obj))
                if lex.peek().kind == ",":
                    lex.next()
                    continue
                break
            if lex.peek().kind == ";":
                while lex.peek().kind == ";":
                    lex.next()
                if lex.peek().kind in (".", "}", "EOF"):
                    break
                continue
            break
        return raw

    def _commit(self, raw: list, graph):
        for s, p, o in raw:
            self.quads.add(Quad(self._resolve(s), self._resolve(p), self._resolve(o), graph))

    def _iri(self, text: str, tok: Token) -> Iri:
        try:
            return Iri(text)
        except InvalidIri as exc:
            raise self.lex.error(exc.reason + f" in IRI {text!r}", tok.span.start, end=tok.span.end) from None

    def _resolve(self, raw: tuple):
        kind, tok = raw[0], raw[1]
        if kind == "IRIREF":
            ref = tok.value
            if ref == "" or not re.match(r"[A-Za-z][A-Za-z0-9+.\-]*:", ref):
                if self.base is None:
                    raise self.lex.error(
                        f"relative IRI <{ref}> needs a base IRI", tok.span.start, cls=BaseRequired, end=tok.span.end
                    )
                return self._iri(urljoin(self.base, ref) if ref else self.base, tok)
            return self._iri(ref, tok)
        if kind == "PNAME":
            prefix, local = tok.value
            if prefix not in self.prefixes:
                raise self.lex.error(
                    f"undeclared prefix {prefix + ':'!r}", tok.span.start, cls=UnknownPrefix, end=tok.span.end
                )
            return self._iri(self.prefixes[prefix].value + local, tok)
        if kind == "BNODE":
            return BlankNode(tok.value)
        if kind == "a":
            return Iri(RDF_TYPE)
        if kind == "INTEGER":
            return Literal(tok.value, XSD_INTEGER)
        if kind in ("true", "false"):
            return Literal(kind, XSD_BOOLEAN)
        if kind == "STRING":
            return Literal(tok.value)
        if kind == "LANG":
            return Literal(tok.value, RDF_LANG_STRING, raw[2].value)
        if kind == "TYPED":
            dt = self._resolve((raw[2].kind, raw[2]))
            try:
                return Literal(tok.value, dt)
            except InvalidTerm as exc:
                raise self.lex.error(str(exc), tok.span.start, end=raw[2].span.end) from None
        raise AssertionError(kind)


_VERB = ["IRI", "prefixed name", "'a'"]


def parse_trig(text: str, base: str | Iri | None = None) -> Dataset:
    """Parse TriG ``text`` into a :class:`Dataset`.

    Raises :class:`ParseError` (or its subclasses :class:`UnknownPrefix` and
    :class:`BaseRequired`) at the first violation.
    """
    if isinstance(base, Iri):
        base = base.value
    if base is not None:
        Iri(base)
    return _Parser(text, base).parse()


# -- serializer --------------------------------------------------------------


def _escape_string(s: str) -> str:
    out = []
    for c in s:
        if c == '"':
            out.append('\\"')
        elif c == "\\":
            out.append("\\\\")
        elif c == "\n":
            out.append("\\n")
        elif c == "\r":
            out.append("\\r")
        elif c == "\t":
            out.append("\\t")
        elif ord(c) < 0x20 or ord(c) == 0x7F or 0xD800 <= ord(c) <= 0xDFFF:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return '"' + "".join(out) + '"'


class _Writer:
    def __init__(self, prefixes):
        # longest namespace first so the most specific prefix wins; ties by label
        self.ns = sorted(prefixes.items(), key=lambda kv: (-len(kv[1].value), kv[0]))

    def iri(self, iri: Iri) -> str:
        v = iri.value
        for label, ns in self.ns:
            if v.startswith(ns.value):
                local = v[len(ns.value) :]
                if local and LOCAL_NAME_RE.fullmatch(local):
                    return f"{label}:{local}"
        return f"<{v}>"

    def term(self, t) -> str:
        if isinstance(t, Iri):
            return self.iri(t)
        if isinstance(t, BlankNode):
            return "_:" + t.label
        if t.language is not None:
            return _escape_string(t.lexical) + "@" + t.language
        if t.datatype == XSD_STRING:
            return _escape_string(t.lexical)
        if t.datatype == XSD_INTEGER and _INTEGER_RE.fullmatch(t.lexical):
            return t.lexical
        if t.datatype == XSD_BOOLEAN and t.lexical in ("true", "false"):
            return t.lexical
        return _escape_string(t.lexical) + "^^" + self.iri(t.datatype)

    def triples(self, triples: list, indent: str) -> list[str]:
        lines = []
        by_subject: dict = {}
        for s, p, o in sorted(triples, key=triple_key):
            by_subject.setdefault(s, {}).setdefault(p, []).append(o)
        for s, preds in by_subject.items():
            subj = self.term(s)
            parts = [self.term(p) + " " + ", ".join(self.term(o) for o in objs) for p, objs in preds.items()]
            if len(parts) == 1:
                lines.append(f"{indent}{subj} {parts[0]} .")
            else:
                lines.append(f"{indent}{subj}")
                for i, part in enumerate(parts):
                    end = " ." if i == len(parts) - 1 else " ;"
                    lines.append(f"{indent}    {part}{end}")
        return lines


def serialize_trig(dataset: Dataset) -> str:
    """Deterministic TriG text for ``dataset``.

    Prefixes are sorted by label, the default graph comes first as top-level
    triples, named graphs follow sorted by name, triples are sorted.
    """
    w = _Writer(dataset.prefixes)
    sections = []
    if dataset.prefixes:
        sections.append(
            "\n".join(f"@prefix {label}: <{ns.value}> ." for label, ns in sorted(dataset.prefixes.items()))
        )
    graphs: dict = {}
    for q in dataset.quads:
        graphs.setdefault(q.graph, []).append(q.triple)
    for name in sorted(graphs, key=term_key):
        if name is DEFAULT_GRAPH:
            sections.append("\n".join(w.triples(graphs[name], "")))
        else:
            body = w.triples(graphs[name], "    ")
            sections.append("\n".join([w.term(name) + " {", *body, "}"]))
    if not sections:
        return ""
    return "\n\n".join(sections) + "\n"
