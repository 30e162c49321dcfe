import itertools
import random
from urllib.parse import quote

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.conftest import EX, MALARIA, PMID_SENTENCES
from tests.generators import WORDS, rand_phrase, rand_unicode_text
from unano.cnl import (
    NOT_COVERED,
    CnlPattern,
    Grammar,
    TermLexicon,
    auto_formalize,
    grammar_from_dataset,
    load_grammar,
    parse_cnl,
    register_pattern,
    slug_decode,
    slug_encode,
    verbalize,
)
from unano.errors import AlreadyFormalized, AmbiguousPattern, EmptySentence, InvalidPattern, LexiconConflict, SentenceError
from unano.nanopub import FormalizationStatus, build_nanopub, formalization_status, sentence_of, validate_nanopub
from unano.rdf import Iri
from unano.statements import Statement, normalize_sentence
from unano.trig import parse_trig
from unano.vocab import DEFAULT_MINT_NAMESPACE, UNANO_NS

TERM = DEFAULT_MINT_NAMESPACE
TRANSMITTED = CnlPattern("is-transmitted-by", "{S} is transmitted by {O}", Iri(UNANO_NS + "isTransmittedBy"))
CAUSES = CnlPattern("causes", "{S} causes {O}", Iri(UNANO_NS + "causes"))
IS_A = CnlPattern("is-a", "{S} is a {O}", Iri(UNANO_NS + "isA"))


def slug_oracle(phrase: str) -> str:
    return "_".join(quote(part, safe="").replace("_", "%5F") for part in phrase.split(" "))


@pytest.fixture(scope="module")
def default():
    return load_grammar()


# -- patterns and registration -----------------------------------------------


def test_register_duplicate_template_is_ambiguous():
    g = register_pattern(Grammar(), TRANSMITTED)
    again = CnlPattern("transmitted-again", "{S} is transmitted by {O}", Iri(UNANO_NS + "other"))
    with pytest.raises(AmbiguousPattern) as info:
        register_pattern(g, again)
    assert len(g.matches(info.value.witness)) == 1
    assert len(register_pattern(Grammar(), again).matches(info.value.witness)) == 1


def test_register_disjoint_patterns():
    g = register_pattern(register_pattern(Grammar(), CAUSES), IS_A)
    assert [p.id for p in g.patterns] == ["causes", "is-a"]


def test_register_duplicate_id():
    g = register_pattern(Grammar(), CAUSES)
    with pytest.raises(AmbiguousPattern):
        register_pattern(g, CnlPattern("causes", "{S} triggers {O}", Iri(UNANO_NS + "triggers")))


def test_self_ambiguous_pattern_rejected():
    with pytest.raises(AmbiguousPattern) as info:
        register_pattern(Grammar(), CnlPattern("aa", "{S} a a {O}", Iri(EX + "aa")))
    assert brute_force_count([CnlPattern("aa", "{S} a a {O}", Iri(EX + "aa"))], info.value.witness.split(" ")) >= 2


@pytest.mark.parametrize(
    "template",
    ["{S} causes", "{S} {O}", "{S} causes {S}", "{S}causes {O}", " {S} causes {O}", "{S}  causes {O}", "{X} is {O}"],
)
def test_invalid_templates(template):
    with pytest.raises(InvalidPattern):
        CnlPattern("bad", template, Iri(EX + "p"))


def test_object_first_template():
    p = CnlPattern("caused-by", "{O} is caused by {S}", Iri(EX + "causedBy"))
    g = register_pattern(Grammar(), p)
    lex = TermLexicon()
    assert parse_cnl(g, lex, "Fever is caused by Malaria") == (Iri(TERM + "Malaria"), p.predicate, Iri(TERM + "Fever"))


def test_default_grammar_has_five_patterns(default):
    grammar, lexicon = default
    assert sorted(p.id for p in grammar.patterns) == [
        "causes", "inhibits", "is-a", "is-associated-with", "is-transmitted-by",
    ]
    assert lexicon.by_phrase == {}


# -- parse / verbalize -------------------------------------------------------


def test_parse_malaria(default):
    grammar, lexicon = default
    triple = parse_cnl(grammar, lexicon, MALARIA)
    assert triple == (
        Iri(TERM + slug_oracle("Malaria")),
        Iri(UNANO_NS + "isTransmittedBy"),
        Iri(TERM + slug_oracle("mosquitoes")),
    )
    assert verbalize(grammar, lexicon, triple) == MALARIA


@pytest.mark.parametrize("sentence", PMID_SENTENCES)
def test_pmid_sentences_not_covered(default, sentence):
    grammar, lexicon = default
    assert parse_cnl(grammar, lexicon, sentence) is NOT_COVERED
    assert not NOT_COVERED


def test_parse_requires_normalized_sentence(default):
    grammar, lexicon = default
    with pytest.raises(EmptySentence):
        parse_cnl(grammar, lexicon, "")
    with pytest.raises(SentenceError):
        parse_cnl(grammar, lexicon, " Malaria  is transmitted by mosquitoes")


def test_multiword_phrases_and_case(default):
    grammar, lexicon = default
    s, p, o = parse_cnl(grammar, lexicon, "Plasmodium falciparum causes severe malaria")
    assert s == Iri(TERM + "Plasmodium_falciparum")
    assert o == Iri(TERM + "severe_malaria")
    # fixed text is case-sensitive by default
    assert parse_cnl(grammar, lexicon, "Malaria Is Transmitted By mosquitoes") is NOT_COVERED


def test_case_insensitive_pattern():
    p = CnlPattern("inh", "{S} inhibits {O}", Iri(EX + "inh"), case_insensitive_match=True)
    g = register_pattern(Grammar(), p)
    assert parse_cnl(g, TermLexicon(), "Aspirin INHIBITS COX") == (Iri(TERM + "Aspirin"), p.predicate, Iri(TERM + "COX"))


def test_slot_may_not_contain_fixed_text(default):
    grammar, lexicon = default
    # "X causes Y causes Z" has two splits; the grammar refuses to guess
    assert parse_cnl(grammar, lexicon, "smoking causes cancer causes death") is NOT_COVERED


def test_verbalize_unregistered_predicate(default):
    grammar, lexicon = default
    assert verbalize(grammar, lexicon, (Iri(TERM + "a"), Iri(EX + "unknown"), Iri(TERM + "b"))) is NOT_COVERED


def test_verbalize_needs_phrases(default):
    grammar, lexicon = default
    pred = Iri(UNANO_NS + "causes")
    assert verbalize(grammar, lexicon, (Iri("http://purl.obolibrary.org/obo/X"), pred, Iri(TERM + "b"))) is NOT_COVERED
    lex = lexicon.add("Zika virus", "http://purl.obolibrary.org/obo/X")
    assert verbalize(grammar, lex, (Iri("http://purl.obolibrary.org/obo/X"), pred, Iri(TERM + "b"))) == "Zika virus causes b"


def test_verbalize_refuses_phrases_that_would_not_parse_back(default):
    grammar, lexicon = default
    triple = (Iri(TERM + "smoking_causes_cancer"), Iri(UNANO_NS + "causes"), Iri(TERM + "death"))
    assert verbalize(grammar, lexicon, triple) is NOT_COVERED


# -- lexicon -----------------------------------------------------------------


def test_lexicon_resolution_and_preferred_phrase():
    doid = Iri("http://purl.obolibrary.org/obo/DOID_12365")
    lex = TermLexicon().add("malaria", doid).add("Paludism", doid).add("Malaria", doid, preferred=True)
    assert lex.resolve("MALARIA") == doid
    assert lex.resolve("paludism") == doid
    assert lex.phrase_for(doid) == "Malaria"
    with pytest.raises(LexiconConflict):
        lex.add("malaria", Iri(EX + "other"))


def test_lexicon_grounds_parse(default):
    grammar, _ = default
    doid = Iri("http://purl.obolibrary.org/obo/DOID_12365")
    lex = TermLexicon().add("Malaria", doid)
    s, _, _ = parse_cnl(grammar, lex, MALARIA)
    assert s == doid


def test_grammar_file_with_lexicon(tmp_path):
    text = """
@prefix unano: <https://unano.example.org/vocab#> .
@prefix skos: <http://www.w3.org/2004/02/skos/core#> .
<urn:p:1> unano:patternId "treats" ; unano:template "{S} treats {O}" ; unano:predicate unano:treats ;
    unano:caseInsensitive true .
<http://purl.obolibrary.org/obo/CHEBI_15365> skos:prefLabel "aspirin" ; skos:altLabel "ASA" .
"""
    path = tmp_path / "g.trig"
    path.write_text(text)
    grammar, lexicon = load_grammar(path, mint_namespace="http://example.org/t/")
    s, p, o = parse_cnl(grammar, lexicon, "ASA TREATS headache")
    assert s == Iri("http://purl.obolibrary.org/obo/CHEBI_15365")
    assert o == Iri("http://example.org/t/headache")
    assert verbalize(grammar, lexicon, (s, p, o)) == "aspirin treats headache"


def test_grammar_file_ambiguity_is_reported():
    text = """@prefix unano: <https://unano.example.org/vocab#> .
<urn:p:1> unano:patternId "is" ; unano:template "{S} is {O}" ; unano:predicate unano:is .
<urn:p:2> unano:patternId "is-a" ; unano:template "{S} is a {O}" ; unano:predicate unano:isA .
"""
    with pytest.raises(AmbiguousPattern):
        grammar_from_dataset(parse_trig(text))


@pytest.mark.parametrize("phrase", ["Malaria", "mosquitoes", "severe malaria", "snake_case", "100%", "café au lait", "漢字", "a/b"])
def test_slug_encoding_matches_oracle(phrase):
    assert slug_encode(phrase) == slug_oracle(phrase)
    assert slug_decode(slug_encode(phrase)) == phrase


@pytest.mark.parametrize("slug", ["a%2", "a%2b", "a b", "%FF", "a%41"])
def test_slug_decode_rejects_non_canonical(slug):
    assert slug_decode(slug) is None


@settings(max_examples=300, deadline=None)
@given(st.text(min_size=1))
def test_slug_roundtrip_property(phrase):
    assert slug_encode(phrase) == slug_oracle(phrase)
    assert slug_decode(slug_encode(phrase)) == phrase


# -- auto formalization ------------------------------------------------------


def test_auto_formalize_malaria(default, pub1, malaria):
    grammar, lexicon = default
    np = build_nanopub(pub1, malaria)
    full = auto_formalize(np, grammar, lexicon)
    assert formalization_status(full) is FormalizationStatus.FULL
    assert len(full.body) == 1
    assert validate_nanopub(full.dataset, pub1).valid
    assert sentence_of(full) == malaria
    with pytest.raises(AlreadyFormalized):
        auto_formalize(full, grammar, lexicon)


@pytest.mark.parametrize("sentence", PMID_SENTENCES)
def test_auto_formalize_leaves_vague_claims(default, sentence):
    grammar, lexicon = default
    np = build_nanopub(Iri(EX + "PMID19109537_1"), Statement.from_text(sentence))
    assert auto_formalize(np, grammar, lexicon) is np


# -- properties --------------------------------------------------------------


def brute_force_count(patterns, words) -> int:
    """Count (pattern, split) matches by direct enumeration, without the automaton."""
    segments = [list(seg) for p in patterns for seg in (p.prefix, p.middle, p.suffix) if seg]

    def eq(p, got, want):
        if p.case_insensitive_match:
            return [w.casefold() for w in got] == [w.casefold() for w in want]
        return list(got) == list(want)

    def clean(phrase):
        for seg in segments:
            for i in range(len(phrase) - len(seg) + 1):
                if [w.casefold() for w in phrase[i : i + len(seg)]] == [w.casefold() for w in seg]:
                    return False
        return bool(phrase)

    count = 0
    n = len(words)
    for p in patterns:
        a, m, z = len(p.prefix), len(p.middle), len(p.suffix)
        if n < a + m + z + 2 or not eq(p, words[:a], p.prefix) or not eq(p, words[n - z :], p.suffix):
            continue
        for i in range(a + 1, n - z - m):
            if eq(p, words[i : i + m], p.middle) and clean(words[a:i]) and clean(words[i + m : n - z]):
                count += 1
    return count


def test_brute_force_counter_sanity():
    assert brute_force_count([CAUSES], "a causes b".split()) == 1
    assert brute_force_count([CAUSES], "a causes b causes c".split()) == 0
    assert brute_force_count([CAUSES, IS_A], "a is a b".split()) == 1


def _rand_template(rng, vocab):
    def seg(lo):
        return [rng.choice(vocab) for _ in range(rng.randint(lo, 2))]

    slots = ["{S}", "{O}"] if rng.random() < 0.7 else ["{O}", "{S}"]
    return " ".join([*seg(0), slots[0], *seg(1), slots[1], *seg(0)])


@pytest.mark.parametrize("seed", range(40))
def test_ambiguity_check_against_exhaustive_enumeration(seed):
    rng = random.Random(seed)
    vocab = ["a", "b", "c"]
    grammar = Grammar()
    for k in range(rng.randint(1, 3)):
        pattern = CnlPattern(f"p{k}", _rand_template(rng, vocab), Iri(f"{EX}p{k}"),
                             case_insensitive_match=rng.random() < 0.3)
        try:
            grammar = register_pattern(grammar, pattern)
        except AmbiguousPattern as exc:
            # completeness of the witness: it really is matched twice
            words = exc.witness.split(" ")
            assert brute_force_count([*grammar.patterns, pattern], words) >= 2
    # soundness: no sentence over the alphabet (plus a filler and a case variant) matches twice
    alphabet = [*vocab, "A", "x"]
    for n in range(3, 7):
        for words in itertools.product(alphabet, repeat=n):
            words = list(words)
            count = brute_force_count(grammar.patterns, words)
            assert count <= 1, (words, [p.sentence_template for p in grammar.patterns])
            assert len(grammar.matches(" ".join(words))) == count


def test_generated_sentences_match_at_most_once(default):
    grammar, lexicon = default
    rng = random.Random(17)
    vocab = [*WORDS, "causes", "inhibits", "transmitted", "associated"]
    for _ in range(500):
        p = rng.choice(grammar.patterns)
        sentence = p.fill(rand_phrase(rng, vocab), rand_phrase(rng, vocab))
        words = sentence.split(" ")
        count = brute_force_count(grammar.patterns, words)
        assert count <= 1
        result = parse_cnl(grammar, lexicon, sentence)
        assert (result is NOT_COVERED) == (count == 0)


def _random_lexicon(rng, grammar):
    lex = TermLexicon()
    entries = []
    for i in range(rng.randint(1, 6)):
        phrase = rand_phrase(rng)
        iri = Iri(f"http://purl.example.org/T{i}")
        try:
            lex = lex.add(phrase, iri)
        except LexiconConflict:
            continue
        entries.append(iri)
    return lex, entries


@pytest.mark.parametrize("seed", range(30))
def test_roundtrip_over_random_lexicons(default, seed):
    grammar, _ = default
    rng = random.Random(seed)
    lex, iris = _random_lexicon(rng, grammar)
    for _ in range(20):
        s, o = rng.choice(iris), rng.choice(iris)
        p = rng.choice(grammar.patterns)
        t = (s, p.predicate, o)
        text = verbalize(grammar, lex, t)
        sp, op = lex.phrase_for(s), lex.phrase_for(o)
        words_ok = grammar.forbidden.admits(sp.split(" ")) and grammar.forbidden.admits(op.split(" "))
        assert (text is not NOT_COVERED) == words_ok
        if text is not NOT_COVERED:
            assert parse_cnl(grammar, lex, text) == t
            assert verbalize(grammar, lex, parse_cnl(grammar, lex, text)) == text


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parse_verbalize_roundtrip_on_generated_sentences(seed):
    grammar, lexicon = load_grammar()
    rng = random.Random(seed)
    p = rng.choice(grammar.patterns)
    sentence = p.fill(rand_phrase(rng), rand_phrase(rng))
    t = parse_cnl(grammar, lexicon, sentence)
    if t is not NOT_COVERED:
        assert verbalize(grammar, lexicon, t) == sentence


def test_parse_cnl_total_on_noise(default):
    grammar, lexicon = default
    rng = random.Random(23)
    for _ in range(1000):
        text = rand_unicode_text(rng)
        try:
            text = normalize_sentence(text, max_length=10_000)
        except EmptySentence:
            continue
        result = parse_cnl(grammar, lexicon, text)
        assert result is NOT_COVERED or len(result) == 3
