import pytest

from subquest.corpus import load_default_corpus
from subquest.demo import DEMO_CASES, DEMO_STORE_ROWS
from subquest.kb import TripleStore


@pytest.fixture(scope="session")
def corpus():
    return load_default_corpus()


@pytest.fixture(scope="session")
def demo_cases():
    return DEMO_CASES


@pytest.fixture()
def demo_store():
    store = TripleStore()
    for s, p, o in DEMO_STORE_ROWS:
        store.add(s, p, o)
    return store
