from __future__ import annotations

import pytest

from clearbench.entities import default_lexicon
from clearbench.generator import build_default_corpus
from clearbench.providers import HashingEmbedder


@pytest.fixture(scope="session")
def default_corpus():
    return build_default_corpus(42)


@pytest.fixture(scope="session")
def embedder():
    return HashingEmbedder()


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()
