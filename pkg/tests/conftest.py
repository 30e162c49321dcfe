from pathlib import Path

import pytest

from unano.rdf import Iri
from unano.statements import Statement

FIXTURES = Path(__file__).parent / "fixtures"

MALARIA = "Malaria is transmitted by mosquitoes"
MALARIA_IRI = "http://statements.org/en/Malaria+is+transmitted+by+mosquitoes"
PMID_SENTENCES = [
    "The risk of developing neurodegenerative disease in idiopathic REM sleep behavior disorder is substantial.",
    "The majority of patients with idiopathic REM sleep behavior disorder who develop a neurodegenerative "
    "disease develop Parkinson disease and Lewy body dementia.",
]
EX = "http://example.org/"

# verdict lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def malaria():
    return Statement.from_text(MALARIA)


@pytest.fixture
def pub1():
    return Iri(EX + "Pub1")


@pytest.fixture
def malaria_triple():
    return (Iri(EX + "Malaria"), Iri(EX + "isTransmittedBy"), Iri(EX + "Mosquito"))
