from fractions import Fraction

import pytest

from vecdecomp.patterns import ANTISYMMETRIC, BICOLORED, UNDIRECTED, WeightVector, build_catalog


@pytest.fixture(scope="session")
def t3_vector():
    cat = build_catalog(3, ANTISYMMETRIC)
    return WeightVector(cat, {cat.alias("T3").id: Fraction(1), cat.alias("C3").id: Fraction(0)})


@pytest.fixture(scope="session")
def graph_vector():
    def make(kind, values):
        cat = build_catalog(3, kind)
        return WeightVector(cat, {cat.alias(name).id: Fraction(val) for name, val in values.items()})
    return make


@pytest.fixture(scope="session")
def k3_i3_bicolored(graph_vector):
    return graph_vector(BICOLORED, {"K3": 1, "P3": 0, "Q3": 0, "I3": 1})


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
