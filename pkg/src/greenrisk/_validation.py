"""Input checks shared by the estimators and pipeline functions."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.utils.validation import check_array

from greenrisk.exceptions import GreenRiskError


def check_binary(value, name: str) -> int:
    # bool is an int subclass; accept it, reject 1.0 / "1"
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)) and value in (0, 1):
        return int(value)
    raise GreenRiskError(f"{name} must be 0 or 1, got {value!r}")


def check_binary_labels(labels: Iterable, name: str = "labels") -> np.ndarray:
    arr = np.asarray(list(labels))
    if arr.ndim != 1:
        raise GreenRiskError(f"{name} must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise GreenRiskError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def check_attribute_matrix(X) -> np.ndarray:
    """Coerce ``X`` to an (n, 4) float array of binary attribute values."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 4:
        raise GreenRiskError(
            f"expected 4 attribute columns (sentiment, commitment, specificity, hedging), got {X.shape[1]}"
        )
    if not np.isin(X, (0.0, 1.0)).all():
        raise GreenRiskError("attribute values must be 0 or 1")
    return X


def check_paired(preds: Sequence, golds: Sequence) -> tuple[np.ndarray, np.ndarray]:
    p = check_binary_labels(preds, "predictions")
    g = check_binary_labels(golds, "gold labels")
    if p.shape != g.shape:
        raise GreenRiskError(f"length mismatch: {p.size} predictions vs {g.size} gold labels")
    if p.size == 0:
        raise GreenRiskError("cannot score an empty prediction list")
    return p, g


def check_fraction(value: float, name: str) -> float:
    if not 0.0 < value < 1.0:
        raise GreenRiskError(f"{name} must lie strictly between 0 and 1, got {value}")
    return float(value)
