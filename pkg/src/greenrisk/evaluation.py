"""Chunk-level metrics, multi-seed aggregation and report-level majority voting."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from greenrisk._validation import check_binary_labels, check_paired
from greenrisk.exceptions import GreenRiskError

TABLE_COLUMNS = ("Company", "Accuracy", "F1", "ReportLabelPred", "ReportLabelGold")


def accuracy(preds, golds) -> float:
    p, g = check_paired(preds, golds)
    return float((p == g).mean())


def f1(preds, golds, positive_class: int = 1) -> float:
    """Binary F1 for ``positive_class``; 0.0 when there are no true positives."""
    p, g = check_paired(preds, golds)
    tp = int(((p == positive_class) & (g == positive_class)).sum())
    fp = int(((p == positive_class) & (g != positive_class)).sum())
    fn = int(((p != positive_class) & (g == positive_class)).sum())
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


@dataclass(frozen=True)
class MetricPair:
    accuracy: float
    f1: float

    def __post_init__(self):
        for name in ("accuracy", "f1"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise GreenRiskError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class AggregateStats:
    mean_accuracy: float
    std_accuracy: float
    mean_f1: float
    std_f1: float


def aggregate_runs(runs) -> AggregateStats:
    """Mean and population standard deviation of validation accuracy and F1."""
    runs = list(runs)
    if not runs:
        raise GreenRiskError("cannot aggregate zero runs")
    acc_mean, acc_std = _mean_std([r.validation_accuracy for r in runs])
    f1_mean, f1_std = _mean_std([r.validation_f1 for r in runs])
    return AggregateStats(acc_mean, acc_std, f1_mean, f1_std)


def _mean_std(values: list[float]) -> tuple[float, float]:
    if all(v == values[0] for v in values):
        return float(values[0]), 0.0
    mean = math.fsum(values) / len(values)
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def majority_vote(chunk_labels: Sequence[int], tie: int = 1) -> int:
    labels = check_binary_labels(chunk_labels, "chunk labels")
    if labels.size == 0:
        raise GreenRiskError("no climate-related chunks")
    ones = int(labels.sum())
    zeros = labels.size - ones
    if ones == zeros:
        return int(tie)
    return int(ones > zeros)


@dataclass(frozen=True)
class CompanyEval:
    company: str
    chunk_ids: tuple[str, ...]
    predictions: tuple[int, ...]
    golds: tuple[int, ...]
    metrics: MetricPair
    report_label_predicted: int
    report_label_gold: int

    def __post_init__(self):
        if len(self.predictions) != len(self.golds) or not self.predictions:
            raise GreenRiskError(f"{self.company}: predictions and gold labels must be equal-length and non-empty")

    @classmethod
    def from_labels(cls, company: str, predictions, golds, chunk_ids=None, tie: int = 1) -> "CompanyEval":
        p, g = check_paired(predictions, golds)
        ids = tuple(chunk_ids) if chunk_ids is not None else tuple(str(i) for i in range(p.size))
        return cls(
            company=company,
            chunk_ids=ids,
            predictions=tuple(int(v) for v in p),
            golds=tuple(int(v) for v in g),
            metrics=MetricPair(accuracy(p, g), f1(p, g)),
            report_label_predicted=majority_vote(p, tie),
            report_label_gold=majority_vote(g, tie),
        )


def evaluate_report(model, doc, gold_labeler, max_chars: int, scorer, climate_lexicon=None, tie: int = 1) -> CompanyEval:
    """Chunk ``doc``, label each climate-related chunk two ways, and vote per stream.

    ``model`` is any fitted classifier whose ``predict`` takes a list of texts;
    ``scorer`` supplies attribute vectors (see :class:`greenrisk.lexicon.AttributeScorer`)
    and ``gold_labeler`` the risk coefficients used for the gold stream.
    """
    from greenrisk.corpus import chunk_document

    chunks = [c for c in chunk_document(doc, max_chars, climate_lexicon) if c.climate_related]
    if not chunks:
        raise GreenRiskError(f"no climate-related chunks in report {doc.id}")
    golds = [gold_labeler.label(scorer.score(c)[0])[0] for c in chunks]
    preds = [int(v) for v in model.predict([c.text for c in chunks])]
    return CompanyEval.from_labels(doc.company, preds, golds, [c.id for c in chunks], tie)


def round_half_up(value: float, places: int = 2) -> float:
    # repr() first so 0.665 stays 0.665 instead of its binary expansion
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class CompanyTable:
    rows: tuple[tuple[str, float, float, int | None, int | None], ...]
    mean_accuracy: float
    mean_f1: float

    def display_rows(self) -> list[list[str]]:
        def fmt_label(v):
            return "" if v is None else str(v)

        out = [
            [c, f"{round_half_up(a * 100):.2f}", f"{round_half_up(f):.2f}", fmt_label(p), fmt_label(g)]
            for c, a, f, p, g in self.rows
        ]
        out.append(
            ["Mean", f"{round_half_up(self.mean_accuracy * 100):.2f}", f"{round_half_up(self.mean_f1):.2f}", "", ""]
        )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        writer.writerows(self.display_rows())
        return buf.getvalue()

    def to_text(self) -> str:
        rows = [list(TABLE_COLUMNS), *self.display_rows()]
        widths = [max(len(r[i]) for r in rows) for i in range(len(TABLE_COLUMNS))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.insert(len(lines) - 1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def company_table(evals: Iterable, sort: bool = True) -> CompanyTable:
    """Per-company accuracy/F1 rows plus unweighted means across companies.

    Items are :class:`CompanyEval` objects or ``(company, MetricPair)`` pairs
    (the latter for tabulating published per-company numbers). Accuracies are
    fractions in [0, 1]; the display form shows percentages.
    """
    rows = []
    for item in evals:
        if isinstance(item, CompanyEval):
            m = item.metrics
            rows.append((item.company, m.accuracy, m.f1, item.report_label_predicted, item.report_label_gold))
        else:
            company, m = item
            rows.append((company, m.accuracy, m.f1, None, None))
    if not rows:
        raise GreenRiskError("company table needs at least one company")
    if sort:
        rows.sort(key=lambda r: r[0])
    mean_acc = math.fsum(r[1] for r in rows) / len(rows)
    mean_f1 = math.fsum(r[2] for r in rows) / len(rows)
    return CompanyTable(tuple(rows), mean_acc, mean_f1)
