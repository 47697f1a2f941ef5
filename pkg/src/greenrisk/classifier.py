"""Hashed n-gram logistic regression trained on generated risk labels.

Features are n-gram counts hashed with 64-bit FNV-1a into a fixed number of
slots, so featurization needs no vocabulary and is identical on every
platform. Training is mini-batch gradient descent on L2-penalised log loss.
``frozen_features=True`` keeps the feature weights at their (all-zero)
initialisation and trains the bias alone.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from greenrisk._validation import check_binary_labels
from greenrisk.evaluation import accuracy, f1
from greenrisk.exceptions import GreenRiskError

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

MODEL_FORMAT = "greenrisk-linear-text-model"
MODEL_VERSION = 1

_WORD_RE = re.compile(r"\w+")


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class FeatureConfig:
    ngram_orders: tuple[int, ...] = (1, 2)
    hash_dimension: int = 2**18
    lowercase: bool = True

    def __post_init__(self):
        orders = tuple(sorted(set(self.ngram_orders)))
        if not orders or not set(orders) <= {1, 2}:
            raise GreenRiskError(f"ngram_orders must be a non-empty subset of {{1, 2}}, got {self.ngram_orders}")
        object.__setattr__(self, "ngram_orders", orders)
        d = self.hash_dimension
        if d < 2**10 or d & (d - 1):
            raise GreenRiskError(f"hash_dimension must be a power of two >= 1024, got {d}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 70
    l2: float = 1e-4
    seed: int = 0
    frozen_features: bool = False
    batch_size: int = 32

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise GreenRiskError("learning_rate must be > 0")
        if self.epochs < 1:
            raise GreenRiskError("epochs must be >= 1")
        if self.l2 < 0:
            raise GreenRiskError("l2 must be >= 0")
        if self.batch_size < 1:
            raise GreenRiskError("batch_size must be >= 1")


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    return _WORD_RE.findall(text.lower() if lowercase else text)


def featurize(text: str, config: FeatureConfig = FeatureConfig()) -> dict[int, int]:
    """Sparse ``{slot: count}`` map of the hashed n-grams in ``text``.

    An n-gram is its tokens joined by single spaces, encoded as UTF-8 and
    hashed with FNV-1a (64-bit), then reduced modulo ``hash_dimension``.
    """
    tokens = tokenize(text, config.lowercase)
    grams: Counter = Counter()
    for n in config.ngram_orders:
        for i in range(len(tokens) - n + 1):
            grams[" ".join(tokens[i : i + n])] += 1
    counts: dict[int, int] = {}
    for gram, c in grams.items():
        slot = fnv1a_64(gram.encode("utf-8")) % config.hash_dimension
        counts[slot] = counts.get(slot, 0) + c
    return counts


class HashedNgramVectorizer(TransformerMixin, BaseEstimator):
    """Stateless texts-to-CSR transformer around :func:`featurize`."""

    def __init__(self, ngram_orders=(1, 2), hash_dimension: int = 2**18, lowercase: bool = True):
        self.ngram_orders = ngram_orders
        self.hash_dimension = hash_dimension
        self.lowercase = lowercase

    @property
    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(tuple(self.ngram_orders), self.hash_dimension, self.lowercase)

    def fit(self, X, y=None):
        self.feature_config  # validates
        return self

    def transform(self, X) -> sp.csr_matrix:
        if isinstance(X, str):
            raise GreenRiskError("expected an iterable of texts, got a single string")
        config = self.feature_config
        indptr, indices, data = [0], [], []
        for text in X:
            row = featurize(text, config)
            slots = sorted(row)
            indices.extend(slots)
            data.extend(row[s] for s in slots)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), indptr),
            shape=(len(indptr) - 1, config.hash_dimension),
        )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _objective(X, y, w, b, l2) -> float:
    z = X @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))


class HashedLogisticClassifier(ClassifierMixin, BaseEstimator):
    """Logistic regression over hashed n-gram counts of raw texts.

    ``fit`` and ``predict`` take sequences of strings. Parameters mirror
    :class:`FeatureConfig` and :class:`TrainConfig`; ``random_state`` seeds
    the per-epoch shuffle.

    Attributes
    ----------
    coef_ : ndarray of shape (hash_dimension,)
    intercept_ : float
    initial_coef_ : ndarray
        Weights before the first update (all zeros); equal to ``coef_`` when
        ``frozen_features`` is set.
    loss_history_ : list of float
        Penalised training loss before training and after each epoch.
    """

    def __init__(
        self,
        ngram_orders=(1, 2),
        hash_dimension: int = 2**18,
        lowercase: bool = True,
        learning_rate: float = 0.1,
        epochs: int = 70,
        l2: float = 1e-4,
        batch_size: int = 32,
        frozen_features: bool = False,
        random_state: int = 0,
    ):
        self.ngram_orders = ngram_orders
        self.hash_dimension = hash_dimension
        self.lowercase = lowercase
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.batch_size = batch_size
        self.frozen_features = frozen_features
        self.random_state = random_state

    @classmethod
    def from_configs(cls, fc: FeatureConfig, tc: TrainConfig) -> "HashedLogisticClassifier":
        return cls(
            ngram_orders=fc.ngram_orders,
            hash_dimension=fc.hash_dimension,
            lowercase=fc.lowercase,
            learning_rate=tc.learning_rate,
            epochs=tc.epochs,
            l2=tc.l2,
            batch_size=tc.batch_size,
            frozen_features=tc.frozen_features,
            random_state=tc.seed,
        )

    @property
    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(tuple(self.ngram_orders), self.hash_dimension, self.lowercase)

    @property
    def train_config(self) -> TrainConfig:
        return TrainConfig(
            self.learning_rate, self.epochs, self.l2, self.random_state, self.frozen_features, self.batch_size
        )

    def _vectorizer(self) -> HashedNgramVectorizer:
        fc = self.feature_config
        return HashedNgramVectorizer(fc.ngram_orders, fc.hash_dimension, fc.lowercase)

    def fit(self, X, y):
        texts = list(X)
        y = check_binary_labels(y, "y")
        if len(texts) != y.size:
            raise GreenRiskError(f"{len(texts)} texts but {y.size} labels")
        if y.size == 0 or np.unique(y).size < 2:
            raise GreenRiskError("degenerate training set: both classes must be present")
        return self._fit_matrix(self._vectorizer().transform(texts), y)

    def _fit_matrix(self, Xs: sp.csr_matrix, y: np.ndarray):
        fc, tc = self.feature_config, self.train_config
        yf = y.astype(np.float64)
        n = Xs.shape[0]
        rng = np.random.default_rng(tc.seed)
        # weights are scale * v so the L2 shrink is one multiply per batch
        v = np.zeros(fc.hash_dimension)
        scale = 1.0
        b = 0.0
        self.initial_coef_ = v.copy()
        history = [_objective(Xs, yf, v, b, tc.l2)]
        lr = tc.learning_rate
        for _ in range(tc.epochs):
            order = rng.permutation(n)
            for start in range(0, n, tc.batch_size):
                idx = order[start : start + tc.batch_size]
                Xb = Xs[idx]
                err = _sigmoid(scale * (Xb @ v) + b) - yf[idx]
                if not tc.frozen_features:
                    cols, inverse = np.unique(Xb.indices, return_inverse=True)
                    contrib = Xb.data * np.repeat(err, np.diff(Xb.indptr))
                    grad = np.bincount(inverse, weights=contrib, minlength=cols.size) / idx.size
                    scale *= 1.0 - lr * tc.l2
                    v[cols] -= lr * grad / scale
                b -= lr * float(err.mean())
            if scale < 1e-6:
                v *= scale
                scale = 1.0
            history.append(_objective(Xs, yf, scale * v, b, tc.l2))
        w = v * scale if scale != 1.0 else v

        self.coef_ = w
        self.intercept_ = b
        self.loss_history_ = history
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        if isinstance(X, str):
            raise GreenRiskError("expected an iterable of texts, got a single string")
        return self._vectorizer().transform(list(X)) @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        p = _sigmoid(np.asarray(self.decision_function(X), dtype=np.float64))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    # persistence -----------------------------------------------------------

    def to_dict(self) -> dict:
        check_is_fitted(self, "coef_")
        nz = np.flatnonzero(self.coef_)
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "feature_config": asdict(self.feature_config),
            "train_config": asdict(self.train_config),
            "bias": float(self.intercept_),
            "weights": {"indices": nz.tolist(), "values": self.coef_[nz].tolist()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HashedLogisticClassifier":
        if data.get("format") != MODEL_FORMAT:
            raise GreenRiskError("not a greenrisk model file")
        if data.get("version") != MODEL_VERSION:
            raise GreenRiskError(f"unsupported model version {data.get('version')}")
        fc = FeatureConfig(**{**data["feature_config"], "ngram_orders": tuple(data["feature_config"]["ngram_orders"])})
        tc = TrainConfig(**data["train_config"])
        model = cls.from_configs(fc, tc)
        w = np.zeros(fc.hash_dimension)
        idx = np.asarray(data["weights"]["indices"], dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= fc.hash_dimension):
            raise GreenRiskError("weight index out of range")
        w[idx] = np.asarray(data["weights"]["values"], dtype=np.float64)
        if not np.isfinite(w).all() or not np.isfinite(data["bias"]):
            raise GreenRiskError("model has non-finite weights")
        model.coef_ = w
        model.intercept_ = float(data["bias"])
        model.classes_ = np.array([0, 1])
        return model


def save_model(model: HashedLogisticClassifier, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict()) + "\n", encoding="utf-8")


def load_model(path) -> HashedLogisticClassifier:
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"model file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GreenRiskError(f"{path}: malformed JSON ({exc.msg})") from exc
    return HashedLogisticClassifier.from_dict(data)


def train(train_set, fc: FeatureConfig = FeatureConfig(), tc: TrainConfig = TrainConfig()) -> HashedLogisticClassifier:
    """Fit a classifier on a labeled dataset (anything with ``texts`` and ``labels``)."""
    return HashedLogisticClassifier.from_configs(fc, tc).fit(train_set.texts, train_set.labels)


def predict(model: HashedLogisticClassifier, text: str) -> tuple[int, float]:
    prob = float(model.predict_proba([text])[0, 1])
    return int(prob >= 0.5), prob


@dataclass(frozen=True)
class RunResult:
    seed: int
    validation_accuracy: float
    validation_f1: float
    model: HashedLogisticClassifier | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "validation_accuracy": self.validation_accuracy, "validation_f1": self.validation_f1}


def run_experiment(
    train_set, validation_set, fc: FeatureConfig, tc: TrainConfig, seeds: Sequence[int]
) -> list[RunResult]:
    """One model per seed, scored on ``validation_set``; results follow ``seeds`` order."""
    if not seeds:
        raise GreenRiskError("run_experiment needs at least one seed")
    golds = validation_set.labels
    labels = train_set.labels
    if labels.size == 0 or np.unique(labels).size < 2:
        raise GreenRiskError("degenerate training set: both classes must be present")
    vectorizer = HashedNgramVectorizer(fc.ngram_orders, fc.hash_dimension, fc.lowercase)
    X_train = vectorizer.transform(train_set.texts)
    X_val = vectorizer.transform(validation_set.texts)
    results = []
    for seed in seeds:
        model = HashedLogisticClassifier.from_configs(fc, replace(tc, seed=int(seed)))
        model._fit_matrix(X_train, labels)
        preds = (_sigmoid(X_val @ model.coef_ + model.intercept_) >= 0.5).astype(np.int64)
        results.append(RunResult(int(seed), accuracy(preds, golds), f1(preds, golds), model))
    return results


def select_run(runs: Sequence[RunResult]) -> RunResult:
    """Pick the final run: highest F1 among runs whose 2-decimal accuracy repeats.

    Falls back to the highest F1 overall when no accuracy repeats. F1 ties go
    to the lowest seed.
    """
    if not runs:
        raise GreenRiskError("select_run needs at least one run")
    rounded = [round(r.validation_accuracy, 2) for r in runs]
    counts = Counter(rounded)
    pool = [r for r, acc in zip(runs, rounded) if counts[acc] >= 2] or list(runs)
    return min(pool, key=lambda r: (-r.validation_f1, r.seed))
