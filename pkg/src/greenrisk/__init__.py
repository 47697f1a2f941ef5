"""Greenwashing-risk labeling and classification for sustainability-report text."""

from greenrisk.exceptions import GreenRiskError
from greenrisk.lexicon import (
    AttributeScorer,
    AttributeSource,
    AttributeVector,
    HedgingDetector,
    Lexicon,
    detect_hedging,
    load_external_scores,
    load_lexicon,
    score_attributes,
)
from greenrisk.labeling import (
    EQ2,
    DEFAULT_COEFFICIENTS,
    FitResult,
    LeastSquaresRiskModel,
    RiskCoefficients,
    fit_coefficients,
    generate_labels,
    label_eq1,
    label_eq2,
    raw_score_eq1,
    sigmoid,
)
from greenrisk.classifier import (
    FeatureConfig,
    HashedLogisticClassifier,
    HashedNgramVectorizer,
    RunResult,
    TrainConfig,
    featurize,
    predict,
    run_experiment,
    select_run,
    train,
)
from greenrisk.corpus import (
    Chunk,
    Document,
    LabeledDataset,
    chunk_document,
    ingest_report,
    split_dataset,
)
from greenrisk.evaluation import aggregate_runs, company_table, evaluate_report, majority_vote
from greenrisk.emissions import EmissionsRecord, flag_outliers, load_emissions_csv, relative_emissions
from greenrisk.datasets import make_synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "AttributeScorer",
    "AttributeSource",
    "AttributeVector",
    "Chunk",
    "Document",
    "EQ2",
    "EmissionsRecord",
    "FeatureConfig",
    "FitResult",
    "GreenRiskError",
    "HashedLogisticClassifier",
    "HashedNgramVectorizer",
    "HedgingDetector",
    "LabeledDataset",
    "LeastSquaresRiskModel",
    "Lexicon",
    "DEFAULT_COEFFICIENTS",
    "RiskCoefficients",
    "RunResult",
    "TrainConfig",
    "aggregate_runs",
    "chunk_document",
    "company_table",
    "detect_hedging",
    "evaluate_report",
    "featurize",
    "fit_coefficients",
    "flag_outliers",
    "generate_labels",
    "ingest_report",
    "label_eq1",
    "label_eq2",
    "load_emissions_csv",
    "load_external_scores",
    "load_lexicon",
    "majority_vote",
    "make_synthetic_corpus",
    "predict",
    "raw_score_eq1",
    "relative_emissions",
    "run_experiment",
    "score_attributes",
    "select_run",
    "sigmoid",
    "split_dataset",
    "train",
]
