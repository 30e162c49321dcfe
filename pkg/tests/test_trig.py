import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.generators import rand_dataset, rand_unicode_text
from unano.errors import BaseRequired, ParseError, UnknownPrefix
from unano.rdf import DEFAULT_GRAPH, XSD_BOOLEAN, XSD_INTEGER, BlankNode, Dataset, Iri, Literal, Quad, datasets_isomorphic, graph_of
from unano.trig import SourceSpan, parse_trig, serialize_trig

EX = "http://example.org/"
ST = "http://statements.org/"


def test_malaria_reference_parses(fixtures_dir):
    d = parse_trig((fixtures_dir / "malaria_reference.trig").read_text())
    assert len(d) == 5
    head = graph_of(d, Iri(EX + "Pub1_Assertion_Head"))
    assert (Iri(EX + "Pub1_Assertion"), Iri(ST + "asFormula"), Iri(EX + "Pub1_Assertion_Body")) in head
    assert (
        Iri(EX + "Pub1_Assertion"),
        Iri(ST + "asSentence"),
        Iri(ST + "en/Malaria+is+transmitted+by+mosquitoes"),
    ) in head
    assert len(graph_of(d, DEFAULT_GRAPH)) == 3


def test_verbatim_linkage_statement():
    text = "@prefix : <http://example.org/> .\n@prefix np: <http://www.nanopub.org/nschema#> .\n" \
           ":Pub1 np:hasAssertion :Pub1_Assertion ."
    d = parse_trig(text)
    assert set(d.quads) == {Quad(Iri(EX + "Pub1"), Iri("http://www.nanopub.org/nschema#hasAssertion"),
                                 Iri(EX + "Pub1_Assertion"))}


def test_empty_input():
    assert parse_trig("") == Dataset()
    assert parse_trig("  # only a comment\n") == Dataset()


def test_missing_terminator_reports_end_of_input():
    text = "@prefix : <http://example.org/> .\n:a :b :c"
    with pytest.raises(ParseError) as info:
        parse_trig(text)
    err = info.value
    assert (err.line, err.column) == (2, 9)
    assert err.offset == len(text)
    assert "'.'" in " ".join(err.expected)


def test_missing_terminator_wins_over_unknown_prefix():
    with pytest.raises(ParseError) as info:
        parse_trig(":a :b :c")
    assert not isinstance(info.value, UnknownPrefix)
    assert (info.value.line, info.value.column) == (1, 9)


def test_unknown_prefix():
    with pytest.raises(UnknownPrefix) as info:
        parse_trig("zz:a zz:b zz:c .")
    assert info.value.line == 1 and info.value.column == 1


def test_empty_iri_without_base_rejected_as_subject():
    with pytest.raises(BaseRequired):
        parse_trig("<> <http://x.org/p> <http://x.org/o> .")
    d = parse_trig("<> <http://x.org/p> <http://x.org/o> .", base="http://x.org/doc")
    assert Quad(Iri("http://x.org/doc"), Iri("http://x.org/p"), Iri("http://x.org/o")) in d.quads


def test_relative_iri_resolves_against_base():
    d = parse_trig("<a> <p> <#o> .", base="http://x.org/dir/doc")
    (q,) = d.quads
    assert q.subject == Iri("http://x.org/dir/a")
    assert q.object == Iri("http://x.org/dir/doc#o")


def test_literal_forms():
    text = (
        '@prefix x: <http://x.org/> .\n'
        'x:s x:p "plain", "hi"@en-GB, "5"^^<http://www.w3.org/2001/XMLSchema#integer>, 42, -7, true, '
        '"tab\\there \\"q\\" \\u00e9" .'
    )
    objs = {q.object for q in parse_trig(text).quads}
    assert Literal("plain") in objs
    assert Literal("hi", language="en-GB") in objs
    assert Literal("5", XSD_INTEGER) in objs
    assert Literal("42", XSD_INTEGER) in objs
    assert Literal("-7", XSD_INTEGER) in objs
    assert Literal("true", XSD_BOOLEAN) in objs
    assert Literal('tab\there "q" é') in objs


def test_a_keyword_and_blank_nodes():
    d = parse_trig("_:x a <http://x.org/C> .")
    (q,) = d.quads
    assert q.subject == BlankNode("x")
    assert q.predicate == Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


def test_trailing_semicolon_and_optional_dot_before_brace():
    d = parse_trig("<http://x.org/g> { <http://x.org/s> <http://x.org/p> <http://x.org/o> ; }")
    assert len(d) == 1
    assert next(iter(d.quads)).graph == Iri("http://x.org/g")


def test_unclosed_block_is_an_error():
    with pytest.raises(ParseError):
        parse_trig("<http://x.org/g> { <http://x.org/s> <http://x.org/p> <http://x.org/o> .")


def test_literal_subject_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_trig('"malaria" <http://x.org/p> <http://x.org/o> .')


def test_source_span_invariant():
    SourceSpan(3, 3)
    with pytest.raises(ValueError):
        SourceSpan(4, 3)


def test_serialize_empty():
    assert serialize_trig(Dataset()) == ""
    out = serialize_trig(Dataset(frozenset(), {"ex": Iri(EX)}))
    assert out.strip() == "@prefix ex: <http://example.org/> ."


def test_serialize_malaria_reference_roundtrips(fixtures_dir):
    d = parse_trig((fixtures_dir / "malaria_reference.trig").read_text())
    text = serialize_trig(d)
    again = parse_trig(text)
    assert datasets_isomorphic(again, d)
    assert again.prefixes == d.prefixes
    assert serialize_trig(again) == text


def test_serialize_is_ordered():
    g1, g2 = Iri(EX + "g1"), Iri(EX + "g2")
    s, p = Iri(EX + "s"), Iri(EX + "p")
    d = Dataset(frozenset({Quad(s, p, Literal("x"), g2), Quad(s, p, Literal("y"), g1), Quad(s, p, s)}),
                {"ex": Iri(EX), "a": Iri("urn:a:")})
    out = serialize_trig(d)
    assert out.index("@prefix a:") < out.index("@prefix ex:")
    assert out.index("ex:s ex:p ex:s .") < out.index("ex:g1 {") < out.index("ex:g2 {")


def test_serialize_deterministic_for_equal_sets():
    rng = random.Random(7)
    for _ in range(50):
        d = rand_dataset(rng)
        shuffled = list(d.quads)
        rng.shuffle(shuffled)
        other = Dataset(frozenset(shuffled), dict(reversed(list(d.prefixes.items()))))
        assert serialize_trig(other) == serialize_trig(d)


@pytest.mark.parametrize("seed", range(20))
def test_roundtrip_random(seed):
    rng = random.Random(seed)
    for _ in range(25):
        d = rand_dataset(rng)
        back = parse_trig(serialize_trig(d))
        assert datasets_isomorphic(back, d)
        assert back.prefixes == d.prefixes


@settings(max_examples=300, deadline=None)
@given(st.text())
def test_parse_is_total(text):
    try:
        result = parse_trig(text)
    except ParseError as err:
        assert err.line >= 1 and err.column >= 1
        assert 0 <= err.offset <= len(text)
    else:
        assert isinstance(result, Dataset)


def test_parse_total_on_generated_noise():
    rng = random.Random(11)
    for _ in range(500):
        text = rand_unicode_text(rng)
        try:
            parse_trig(text)
        except ParseError:
            pass


def _gaps(text: str) -> list[int]:
    """Offsets of whitespace outside IRIs, strings and comments."""
    out, i, n = [], 0, len(text)
    while i < n:
        c = text[i]
        if c == "<":
            i = text.index(">", i) + 1
        elif c == '"':
            i += 1
            while text[i] != '"':
                i += 2 if text[i] == "\\" else 1
            i += 1
        elif c == "#":
            i = text.find("\n", i)
            i = n if i < 0 else i
        else:
            if c.isspace():
                out.append(i)
            i += 1
    return out


def _last_statement_end(text: str, limit: int) -> int:
    """End of the last line before ``limit`` that closes a statement or opens/closes a block."""
    best = 0
    pos = 0
    for line in text.splitlines(keepends=True):
        end = pos + len(line.rstrip("\n"))
        if end > limit:
            break
        if line.rstrip().endswith((" .", "{", "}")):
            best = end
        pos += len(line)
    return best


@pytest.mark.parametrize("seed", range(10))
def test_error_position_accuracy(seed):
    rng = random.Random(100 + seed)
    checked = 0
    while checked < 30:
        text = serialize_trig(rand_dataset(rng))
        gaps = _gaps(text)
        if not gaps:
            continue
        at = rng.choice(gaps)
        bad = text[:at] + rng.choice("$`|)!") + text[at:]
        with pytest.raises(ParseError) as info:
            parse_trig(bad)
        assert _last_statement_end(text, at) <= info.value.offset <= at
        checked += 1
