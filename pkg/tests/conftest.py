from pathlib import Path

import pytest

from tdtsynth import automata
from tdtsynth.automata import load_automaton
from tdtsynth.transducers import load_transducer

SPECS = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture(autouse=True)
def check_witnesses(monkeypatch):
    monkeypatch.setattr(automata, "CHECK_WITNESSES", True)


@pytest.fixture(scope="session")
def specs_dir():
    return SPECS


def load_spec(name):
    return load_automaton((SPECS / name).read_text())


@pytest.fixture(scope="session")
def spec1():
    return load_spec("spec1.tap")


@pytest.fixture(scope="session")
def par():
    return load_spec("par.tap")


@pytest.fixture(scope="session")
def hb():
    return load_spec("hb.tap")


@pytest.fixture(scope="session")
def ident():
    return load_spec("id.tap")


@pytest.fixture(scope="session")
def ex5():
    return load_spec("ex5.tap")


@pytest.fixture(scope="session")
def ex5_dom():
    return load_spec("ex5_dom.ta")


@pytest.fixture(scope="session")
def delg():
    return load_transducer((SPECS / "delg.tdt").read_text())
