"""Synthetic labeled corpora for smoke runs and protocol tests.

Each chunk is a shuffled mix of neutral filler sentences and, for every
attribute switched on, one sentence that trips the matching shipped lexicon.
Attributes are then re-derived from the text with the shipped lexicons, so
labels are a function of the text alone.
"""

from __future__ import annotations

import numpy as np

from greenrisk.corpus import Chunk, LabeledDataset, records_from_labeled
from greenrisk.labeling import EQ2, RiskCoefficients, generate_labels
from greenrisk.lexicon import ATTRIBUTES, AttributeScorer, default_fallbacks, default_lexicon

FILLER = (
    "The company operates facilities in several regions.",
    "This section describes our operations during the year.",
    "The board reviewed the annual report in March.",
    "Our teams manage logistics across the network.",
    "The facility was inspected during the reporting cycle.",
    "Customers are served through regional offices.",
    "The group publishes this report every year.",
    "Suppliers are selected through a formal process.",
    "Our headquarters moved to a new building.",
    "Data in this section covers all subsidiaries.",
    "Management meets with investors each quarter.",
    "The audit committee oversees internal controls.",
)

ATTRIBUTE_SENTENCES = {
    "sentiment": (
        "We are proud of what our people achieved.",
        "We are pleased with the progress of our programs.",
        "It was an outstanding year for our community work.",
        "Our staff delivered excellent service to local partners.",
        "We celebrate the dedication of our employees.",
        "We are delighted to share these highlights.",
    ),
    "commitment": (
        "We will expand recycling at all sites.",
        "We are committed to reducing waste across our operations.",
        "We pledge to restore local habitats.",
        "Our goal is net zero operations.",
        "We commit to sourcing renewable electricity.",
        "We aim to electrify the vehicle fleet.",
    ),
    "specificity": (
        "Emissions fell to 120 thousand tonnes of CO2e.",
        "Energy use dropped 12 percent against the prior year.",
        "Scope 2 emissions were measured at every site.",
        "We consumed 450 MWh of electricity at the main plant.",
        "Water withdrawal was reduced by 8 per cent.",
        "Fleet fuel use reached 35 metric tons last year.",
    ),
    "hedging": (
        "These results are potentially subject to revision.",
        "The savings were reportedly significant.",
        "Impacts are possibly lower than expected.",
        "Some benefits are presumably modest.",
        "The improvement is arguably small.",
        "The figures are preliminarily reviewed.",
    ),
}


def make_synthetic_corpus(
    n_chunks: int = 500,
    coeffs: RiskCoefficients = EQ2,
    seed: int = 0,
    attribute_rate: float = 0.5,
) -> LabeledDataset:
    """Generate ``n_chunks`` labeled chunks; ids are ``syn-0000`` onwards."""
    rng = np.random.default_rng(seed)
    chunks = []
    for i in range(n_chunks):
        sentences = list(rng.choice(FILLER, size=int(rng.integers(2, 5)), replace=False))
        for attr in ATTRIBUTES:
            if rng.random() < attribute_rate:
                pool = ATTRIBUTE_SENTENCES[attr]
                sentences.append(pool[int(rng.integers(len(pool)))])
        order = rng.permutation(len(sentences))
        text = " ".join(sentences[j] for j in order)
        chunks.append(Chunk(id=f"syn-{i:04d}", document_id="synthetic", index=i, text=text))
    scorer = AttributeScorer(default_lexicon(), fallbacks=default_fallbacks())
    labeled = generate_labels([(c, scorer.score(c)[0]) for c in chunks], coeffs)
    return records_from_labeled(labeled)
