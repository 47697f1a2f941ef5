"""Ground-truth greenwashing-risk labels from attribute vectors.

Two schemes are supported:

``eq1``
    A weighted sum of the four attributes (weights fitted by least squares on
    expert-labeled exemplars), squashed by a sigmoid and thresholded.
``eq2``
    The hand-built rule ``x = -sentiment + commitment + specificity + hedging``,
    label 1 iff ``x <= 0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from greenrisk._validation import check_attribute_matrix, check_binary, check_fraction
from greenrisk.exceptions import GreenRiskError
from greenrisk.lexicon import ATTRIBUTES, AttributeVector

SCHEMES = ("eq1", "eq2")
DEFAULT_THRESHOLD = 0.67
MIN_EXEMPLARS = 4


@dataclass(frozen=True)
class RiskCoefficients:
    w_sentiment: float = 0.0
    w_commitment: float = 0.0
    w_specificity: float = 0.0
    w_hedging: float = 0.0
    threshold: float = DEFAULT_THRESHOLD
    scheme: str = "eq1"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise GreenRiskError(f"unknown labeling scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme == "eq1":
            check_fraction(self.threshold, "threshold")
        for name in ("w_sentiment", "w_commitment", "w_specificity", "w_hedging", "threshold"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise GreenRiskError(f"{name} must be finite")
            object.__setattr__(self, name, float(value))

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.w_sentiment, self.w_commitment, self.w_specificity, self.w_hedging])

    @classmethod
    def from_weights(cls, weights, threshold: float = DEFAULT_THRESHOLD) -> "RiskCoefficients":
        ws, wc, wsp, wh = (float(w) for w in weights)
        return cls(ws, wc, wsp, wh, threshold=threshold, scheme="eq1")

    def label(self, attrs: AttributeVector) -> tuple[int, float | None]:
        if self.scheme == "eq2":
            return label_eq2(attrs), None
        return label_eq1(attrs, self)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RiskCoefficients":
        known = {"w_sentiment", "w_commitment", "w_specificity", "w_hedging", "threshold", "scheme"}
        unknown = set(data) - known
        if unknown:
            raise GreenRiskError(f"unknown coefficient keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise GreenRiskError(f"bad coefficients: {exc}") from exc


DEFAULT_COEFFICIENTS = RiskCoefficients(0.71, 0.14, -0.86, -0.71, threshold=0.67, scheme="eq1")
EQ2 = RiskCoefficients(scheme="eq2")


def load_coefficients(path) -> RiskCoefficients:
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"coefficients file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GreenRiskError(f"{path}: malformed JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise GreenRiskError(f"{path}: expected a JSON object")
    return RiskCoefficients.from_dict(data)


def save_coefficients(coeffs: RiskCoefficients, path) -> None:
    Path(path).write_text(json.dumps(coeffs.to_dict(), indent=2) + "\n", encoding="utf-8")


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def raw_score_eq1(attrs: AttributeVector, coeffs: RiskCoefficients) -> float:
    return (
        coeffs.w_sentiment * attrs.sentiment
        + coeffs.w_commitment * attrs.commitment
        + coeffs.w_specificity * attrs.specificity
        + coeffs.w_hedging * attrs.hedging
    )


def label_eq1(attrs: AttributeVector, coeffs: RiskCoefficients = DEFAULT_COEFFICIENTS) -> tuple[int, float]:
    """Return ``(label, probability)``; the threshold comparison is inclusive."""
    if coeffs.scheme != "eq1":
        raise GreenRiskError("label_eq1 needs eq1 coefficients")
    prob = sigmoid(raw_score_eq1(attrs, coeffs))
    return int(prob >= coeffs.threshold), prob


def label_eq2(attrs: AttributeVector) -> int:
    x = -attrs.sentiment + attrs.commitment + attrs.specificity + attrs.hedging
    return int(x <= 0)


def least_squares(A, y) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of ``A @ w = y`` and its residual norm."""
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w, *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.linalg.norm(A @ w - y))
    # round-off floor: an exactly solvable system reports 0
    if residual <= 1e-12 * max(1.0, float(np.linalg.norm(y))):
        residual = 0.0
    return w, residual


@dataclass(frozen=True)
class AnnotatedExemplar:
    text: str
    attributes: AttributeVector
    expert_label: int

    def __post_init__(self):
        object.__setattr__(self, "expert_label", check_binary(self.expert_label, "expert_label"))


@dataclass(frozen=True)
class FitResult:
    coefficients: RiskCoefficients
    residual_norm: float
    n_exemplars: int


def fit_coefficients(
    exemplars: Sequence[AnnotatedExemplar], threshold: float = DEFAULT_THRESHOLD
) -> FitResult:
    """Fit eq1 weights to expert labels; no intercept, minimum norm when rank-deficient."""
    if len(exemplars) < MIN_EXEMPLARS:
        raise GreenRiskError(
            f"underdetermined fit: need at least {MIN_EXEMPLARS} exemplars, got {len(exemplars)}"
        )
    A = np.array([ex.attributes.as_tuple() for ex in exemplars], dtype=np.float64)
    y = np.array([ex.expert_label for ex in exemplars], dtype=np.float64)
    w, residual = least_squares(A, y)
    return FitResult(RiskCoefficients.from_weights(w, threshold), residual, len(exemplars))


def load_exemplars(path) -> list[AnnotatedExemplar]:
    """JSONL exemplars: ``text`` (optional), the four attributes, and ``label``."""
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"exemplar file not found: {path}")
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                attrs = rec.get("attributes", rec)
                out.append(
                    AnnotatedExemplar(rec.get("text", ""), AttributeVector.from_mapping(attrs), rec["label"])
                )
            except (json.JSONDecodeError, KeyError, AttributeError, GreenRiskError) as exc:
                raise GreenRiskError(f"{path}:{lineno}: bad exemplar ({exc})") from exc
    return out


class Labeled(NamedTuple):
    chunk: object
    attributes: AttributeVector
    label: int
    probability: float | None


def generate_labels(dataset, coeffs: RiskCoefficients = DEFAULT_COEFFICIENTS) -> list[Labeled]:
    """Attach a label (and for eq1 a probability) to every ``(chunk, attributes)`` pair."""
    out = []
    for chunk, attrs in dataset:
        label, prob = coeffs.label(attrs)
        out.append(Labeled(chunk, attrs, label, prob))
    return out


class LeastSquaresRiskModel(ClassifierMixin, BaseEstimator):
    """Estimator form of the eq1 pipeline: fit weights by least squares, then
    label with sigmoid + threshold.

    ``X`` is an (n, 4) binary matrix in the column order sentiment,
    commitment, specificity, hedging. ``y`` may be real-valued during ``fit``
    (the regression target); predictions are always 0/1.

    Attributes
    ----------
    coef_ : ndarray of shape (4,)
    residual_norm_ : float
        Euclidean norm of ``X @ coef_ - y`` on the training data.
    """

    def __init__(self, threshold: float = DEFAULT_THRESHOLD):
        self.threshold = threshold

    def fit(self, X, y):
        X = check_attribute_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (X.shape[0],):
            raise GreenRiskError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        if X.shape[0] < MIN_EXEMPLARS:
            raise GreenRiskError(
                f"underdetermined fit: need at least {MIN_EXEMPLARS} exemplars, got {X.shape[0]}"
            )
        check_fraction(self.threshold, "threshold")
        self.coef_, self.residual_norm_ = least_squares(X, y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = 4
        return self

    @property
    def coefficients_(self) -> RiskCoefficients:
        check_is_fitted(self, "coef_")
        return RiskCoefficients.from_weights(self.coef_, self.threshold)

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        return check_attribute_matrix(X) @ self.coef_

    def predict_proba(self, X) -> np.ndarray:
        p = np.array([sigmoid(s) for s in self.decision_function(X)])
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(np.int64)


def attribute_matrix(vectors: Sequence[AttributeVector]) -> np.ndarray:
    return np.array([v.as_tuple() for v in vectors], dtype=np.int64).reshape(len(vectors), len(ATTRIBUTES))
