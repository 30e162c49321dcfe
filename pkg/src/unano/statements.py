"""Statement URIs: natural-language sentences encoded as IRIs.

A statement IRI has the shape ``<authority>/<language>/<payload>`` where the
payload is the normalized sentence with spaces written as ``+`` and every
character outside ``A-Za-z0-9-_.~`` percent-encoded as UTF-8 octets
(uppercase hex). A literal ``+`` becomes ``%2B`` and ``%`` becomes ``%25``,
which keeps the mapping injective. Encoding is a pure function: anyone can
mint a statement IRI without asking the authority.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable

from unano.errors import (
    BadPercentEscape,
    EmptySentence,
    InvalidLanguageTag,
    NotAStatementUri,
    SentenceError,
    SentenceTooLong,
)
from unano.rdf import Iri
from unano.vocab import DEFAULT_AUTHORITY

MAX_SENTENCE_LENGTH = 500

LANGUAGE_TAG_RE = re.compile(r"[a-z]{2,3}(-[A-Za-z0-9]+)*")
_WS_RUN_RE = re.compile(r"\s+")
_UNRESERVED = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_.~")
_PAYLOAD_RE = re.compile(r"(?:[A-Za-z0-9\-_.~+]|%[0-9A-Fa-f]{2})+")


def normalize_sentence(text: str, max_length: int = MAX_SENTENCE_LENGTH) -> str:
    """NFC-normalize, strip, and collapse internal whitespace runs to one space.

    Case and punctuation are preserved.
    """
    s = unicodedata.normalize("NFC", text)
    s = _WS_RUN_RE.sub(" ", s).strip()
    if not s:
        raise EmptySentence("sentence is empty after normalization")
    if len(s) > max_length:
        raise SentenceTooLong(f"sentence has {len(s)} characters (limit {max_length})")
    return s


def _authority_text(authority) -> str:
    text = authority.value if isinstance(authority, Iri) else str(authority)
    Iri(text)
    return text.rstrip("/")


@dataclass(frozen=True, slots=True)
class Statement:
    authority: str
    language: str
    sentence: str

    def __post_init__(self):
        object.__setattr__(self, "authority", _authority_text(self.authority))
        if not isinstance(self.language, str) or not LANGUAGE_TAG_RE.fullmatch(self.language):
            raise InvalidLanguageTag(f"invalid language tag {self.language!r}")
        if not isinstance(self.sentence, str) or not self.sentence:
            raise EmptySentence("sentence is empty")
        if normalize_sentence(self.sentence, max_length=len(self.sentence)) != self.sentence:
            raise SentenceError(f"sentence is not normalized: {self.sentence!r}")

    @classmethod
    def from_text(
        cls,
        text: str,
        language: str = "en",
        authority=DEFAULT_AUTHORITY,
        max_length: int = MAX_SENTENCE_LENGTH,
    ) -> "Statement":
        """Normalize ``text`` and build a statement from it."""
        return cls(authority, language, normalize_sentence(text, max_length))

    def to_iri(self) -> Iri:
        return encode_statement(self)


def _encode_payload(sentence: str) -> str:
    out = []
    for ch in sentence:
        if ch == " ":
            out.append("+")
        elif ch in _UNRESERVED:
            out.append(ch)
        else:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
    return "".join(out)


def _decode_payload(payload: str) -> str:
    buf = bytearray()
    i = 0
    while i < len(payload):
        ch = payload[i]
        if ch == "%":
            pair = payload[i + 1 : i + 3]
            if len(pair) != 2 or not all(c in "0123456789abcdefABCDEF" for c in pair):
                raise BadPercentEscape(f"malformed percent escape at payload offset {i}")
            buf.append(int(pair, 16))
            i += 3
        elif ch == "+":
            buf.append(0x20)
            i += 1
        else:
            buf.extend(ch.encode("utf-8"))
            i += 1
    try:
        return buf.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadPercentEscape(f"percent escapes do not form UTF-8: {exc.reason}") from None


def encode_statement(s: Statement) -> Iri:
    return Iri(f"{s.authority}/{s.language}/{_encode_payload(s.sentence)}")


def decode_statement(
    iri,
    known_authorities: Iterable = (DEFAULT_AUTHORITY,),
    max_length: int = MAX_SENTENCE_LENGTH,
) -> Statement:
    """Inverse of :func:`encode_statement`.

    Only canonical encodings decode: an IRI that would not be produced by
    re-encoding its own decoded statement is rejected, so decoding is exactly
    the inverse of encoding.
    """
    text = iri.value if isinstance(iri, Iri) else str(iri)
    authorities = sorted((_authority_text(a) for a in known_authorities), key=len, reverse=True)
    for authority in authorities:
        if text.startswith(authority + "/"):
            break
    else:
        raise NotAStatementUri(f"{text} does not start with a known statement authority")
    rest = text[len(authority) + 1 :]
    lang, slash, payload = rest.partition("/")
    if not slash or not payload or not lang:
        raise NotAStatementUri(f"{text} lacks a /<language>/<sentence> path")
    if not LANGUAGE_TAG_RE.fullmatch(lang):
        raise InvalidLanguageTag(f"invalid language tag {lang!r} in {text}")
    if "%" in payload:
        # validate escapes before the character check so truncated escapes get the precise error
        for m in re.finditer("%", payload):
            pair = payload[m.start() + 1 : m.start() + 3]
            if len(pair) != 2 or not all(c in "0123456789abcdefABCDEF" for c in pair):
                raise BadPercentEscape(f"malformed percent escape in {text}")
    if not _PAYLOAD_RE.fullmatch(payload):
        raise NotAStatementUri(f"{text} contains characters that are never produced by the encoder")
    sentence = _decode_payload(payload)
    try:
        statement = Statement(authority, lang, sentence)
    except SentenceError as exc:
        raise NotAStatementUri(f"{text} does not decode to a normalized sentence: {exc}") from None
    if len(sentence) > max_length:
        raise NotAStatementUri(f"{text} encodes a sentence longer than {max_length} characters")
    if _encode_payload(sentence) != payload:
        raise NotAStatementUri(f"{text} is not in canonical encoding")
    return statement


def is_statement_uri(iri, known_authorities: Iterable = (DEFAULT_AUTHORITY,)) -> bool:
    try:
        decode_statement(iri, known_authorities)
    except (NotAStatementUri, InvalidLanguageTag):
        return False
    return True
