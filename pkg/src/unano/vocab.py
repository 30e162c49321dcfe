"""Namespaces and vocabulary terms used throughout the toolkit."""

from __future__ import annotations

from unano.rdf import Iri

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

# Standard nanopublication schema namespace.
NP_NS = "http://www.nanopub.org/nschema#"
# Statement vocabulary. Shares its base with the default statement authority,
# so that `st:en/...` prefixed names in nanopub files are statement URIs.
ST_NS = "http://statements.org/"
# Toolkit-owned namespace for relations, CNL predicates and config/grammar files.
UNANO_NS = "https://unano.example.org/vocab#"

DEFAULT_AUTHORITY = "http://statements.org"
DEFAULT_MINT_NAMESPACE = "https://unano.example.org/term/"

RDF_TYPE = Iri(RDF_NS + "type")

HAS_ASSERTION = Iri(NP_NS + "hasAssertion")
CONTAINS_GRAPH = Iri(NP_NS + "containsGraph")

AS_SENTENCE = Iri(ST_NS + "asSentence")
AS_FORMULA = Iri(ST_NS + "asFormula")
IS_PARTIAL_FORMALIZATION = Iri(ST_NS + "isPartialFormalization")

# relation predicates
CONTRADICTS = Iri(UNANO_NS + "contradicts")
SUPPORTS = Iri(UNANO_NS + "supports")
AGREES_WITH = Iri(UNANO_NS + "agreesWith")
DISAGREES_WITH = Iri(UNANO_NS + "disagreesWith")

# grammar / lexicon / config files
CNL_PATTERN = Iri(UNANO_NS + "CnlPattern")
PATTERN_ID = Iri(UNANO_NS + "patternId")
TEMPLATE = Iri(UNANO_NS + "template")
PREDICATE = Iri(UNANO_NS + "predicate")
CASE_INSENSITIVE = Iri(UNANO_NS + "caseInsensitive")
SKOS_NS = "http://www.w3.org/2004/02/skos/core#"
PREF_LABEL = Iri(SKOS_NS + "prefLabel")
ALT_LABEL = Iri(SKOS_NS + "altLabel")

CFG_AUTHORITY = Iri(UNANO_NS + "authority")
CFG_MINT_NAMESPACE = Iri(UNANO_NS + "mintNamespace")
CFG_LOAD_MODE = Iri(UNANO_NS + "loadMode")
CFG_GRAMMAR = Iri(UNANO_NS + "grammar")
CFG_STORE = Iri(UNANO_NS + "store")

NANOPUB_PREFIXES = {"np": Iri(NP_NS), "st": Iri(ST_NS)}
