from __future__ import annotations

import numpy as np
import pytest

from greenrisk.corpus import Document
from greenrisk.lexicon import default_lexicon


@pytest.fixture(scope="session")
def deflection():
    return default_lexicon()


@pytest.fixture
def write(tmp_path):
    def _write(name: str, content: str | bytes):
        path = tmp_path / name
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            path.write_text(content, encoding="utf-8")
        return path

    return _write


WORDS = "emissions energy plant water site fleet supplier target region report".split()


def random_sentence(rng: np.random.Generator, n_words: int) -> str:
    words = [WORDS[int(i)] for i in rng.integers(len(WORDS), size=n_words)]
    return words[0].capitalize() + " " + " ".join(words[1:]) + "."


def random_document(rng: np.random.Generator, doc_id: str = "doc") -> Document:
    """Paragraphs of 1-12 sentences; some sentences are long enough to overflow a chunk."""
    paragraphs = []
    for _ in range(int(rng.integers(0, 15))):
        sentences = []
        for _ in range(int(rng.integers(1, 13))):
            n_words = int(rng.integers(2, 120)) if rng.random() < 0.1 else int(rng.integers(2, 25))
            sentences.append(random_sentence(rng, n_words))
        paragraphs.append(" ".join(sentences))
    return Document(doc_id, "Acme", "tech", 2022, tuple(paragraphs))


FILLER = "The facility continued normal operations through the reporting cycle with no further changes to note here"


def report_fixture(gold_pattern=(1, 1, 0, 0, 0), pred_pattern=(1, 0, 0, 0, 0), company="Acme"):
    """A report whose chunks have controlled gold (eq2) labels and model predictions.

    Each paragraph is long enough to be its own chunk at max_chars=300. Gold
    labels come from external scores keyed by chunk id; the model predicts 1
    exactly for chunks containing the token "risky".
    """
    from greenrisk.classifier import HashedLogisticClassifier, fnv1a_64
    from greenrisk.lexicon import AttributeScorer, default_lexicon

    doc_id = company.lower()
    paragraphs = []
    external = {}
    for i, (gold, pred) in enumerate(zip(gold_pattern, pred_pattern)):
        marker = "risky" if pred else "plain"
        paragraphs.append(f"Section {i} is {marker}. {FILLER} {FILLER}.")
        # eq2: sentiment only -> 1, commitment only -> 0
        external[f"{doc_id}:{i}"] = {"sentiment": int(gold), "commitment": int(not gold), "specificity": 0}
    doc = Document(doc_id, company, "tech", 2022, tuple(paragraphs))
    dim = 2**18
    model = HashedLogisticClassifier(ngram_orders=(1,), hash_dimension=dim)
    model.coef_ = np.zeros(dim)
    slot = fnv1a_64(b"risky") % dim
    assert all(fnv1a_64(t.encode()) % dim != slot for p in paragraphs for t in p.lower().replace(".", "").split() if t != "risky")
    model.coef_[slot] = 5.0
    model.intercept_ = -2.5
    model.classes_ = np.array([0, 1])
    scorer = AttributeScorer(default_lexicon(), external, {})
    return doc, scorer, model


ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, title = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title}")
