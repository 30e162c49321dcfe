"""Underspecified nanopublications: sentence-level scientific claims on RDF."""

__version__ = "0.1.0"
