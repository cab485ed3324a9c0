from importlib import resources

import pytest

from typesim.structures import StructurePair, parse_structure_file

SAMPLES = ("tri", "hom", "chain", "nat4_pow2", "word4")


def load_sample(name: str):
    return parse_structure_file((resources.files("typesim") / "data" / f"{name}.struct").read_text())


@pytest.fixture(scope="session")
def samples():
    return {n: load_sample(n) for n in SAMPLES}


@pytest.fixture(scope="session")
def tri():
    return load_sample("tri")


@pytest.fixture(scope="session")
def hom():
    return load_sample("hom")


@pytest.fixture(scope="session")
def chain():
    return load_sample("chain")


@pytest.fixture(scope="session")
def nat4():
    return load_sample("nat4_pow2")


def pair_of(sf, left, right, identity=True):
    return StructurePair(sf[left], sf[right], identity=identity)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record (and print) one PASS/FAIL line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str):
        line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
