import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import report_fixture
from greenrisk.classifier import RunResult
from greenrisk.corpus import chunk_document
from greenrisk.evaluation import (
    CompanyEval,
    MetricPair,
    accuracy,
    aggregate_runs,
    company_table,
    evaluate_report,
    f1,
    majority_vote,
    round_half_up,
)
from greenrisk.exceptions import GreenRiskError
from greenrisk.labeling import EQ2
from greenrisk.lexicon import Lexicon

binary_pairs = st.integers(1, 12).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n), st.lists(st.integers(0, 1), min_size=n, max_size=n))
)


def confusion(preds, golds):
    tp = sum(p == 1 and g == 1 for p, g in zip(preds, golds))
    fp = sum(p == 1 and g == 0 for p, g in zip(preds, golds))
    fn = sum(p == 0 and g == 1 for p, g in zip(preds, golds))
    return tp, fp, fn


class TestAccuracy:
    def test_perfect(self):
        assert accuracy([1, 0, 1], [1, 0, 1]) == 1.0

    def test_55_of_57(self):
        golds = [1] * 10 + [0] * 47
        preds = golds[:]
        preds[0], preds[20] = 0, 1
        assert accuracy(preds, golds) == pytest.approx(55 / 57)
        assert f"{55 / 57 * 100:.2f}" == "96.49"

    def test_complement(self):
        assert accuracy([0, 1, 1], [1, 0, 0]) == 0.0

    @pytest.mark.parametrize("p, g", [([], []), ([1], [1, 0])])
    def test_errors(self, p, g):
        with pytest.raises(GreenRiskError):
            accuracy(p, g)


class TestF1:
    def test_perfect(self):
        assert f1([1, 0, 1], [1, 0, 1]) == 1.0

    def test_hand_example(self):
        # precision 2/3, recall 1
        assert f1([1, 1, 1, 0], [1, 0, 1, 0]) == pytest.approx(0.8)

    def test_no_positives(self):
        assert f1([0, 0], [0, 0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(GreenRiskError):
            f1([1], [1, 0])

    @given(binary_pairs)
    def test_confusion_oracle(self, pair):
        preds, golds = pair
        tp, fp, fn = confusion(preds, golds)
        expected = 0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn)
        assert f1(preds, golds) == pytest.approx(expected)
        # same thing via precision/recall
        if tp:
            p, r = tp / (tp + fp), tp / (tp + fn)
            assert f1(preds, golds) == pytest.approx(2 * p * r / (p + r))

    @given(binary_pairs, st.randoms())
    def test_permutation_invariant(self, pair, rnd):
        preds, golds = pair
        idx = list(range(len(preds)))
        rnd.shuffle(idx)
        assert accuracy([preds[i] for i in idx], [golds[i] for i in idx]) == accuracy(preds, golds)
        assert f1([preds[i] for i in idx], [golds[i] for i in idx]) == f1(preds, golds)


def _runs(accs, f1s=None):
    f1s = f1s or accs
    return [RunResult(i, a, f) for i, (a, f) in enumerate(zip(accs, f1s))]


class TestAggregate:
    def test_identical(self):
        stats = aggregate_runs(_runs([0.7, 0.7, 0.7]))
        assert stats.std_accuracy == 0.0 and stats.std_f1 == 0.0

    def test_population_std(self):
        stats = aggregate_runs(_runs([0.6, 0.8]))
        assert stats.mean_accuracy == pytest.approx(0.7)
        assert stats.std_accuracy == pytest.approx(0.1)

    def test_single(self):
        stats = aggregate_runs(_runs([0.42], [0.3]))
        assert (stats.mean_accuracy, stats.std_accuracy, stats.mean_f1, stats.std_f1) == (0.42, 0.0, 0.3, 0.0)

    def test_empty(self):
        with pytest.raises(GreenRiskError):
            aggregate_runs([])

    @given(st.lists(st.integers(0, 100).map(lambda k: k / 100), min_size=1, max_size=20))
    def test_properties(self, values):
        stats = aggregate_runs(_runs(values))
        assert min(values) - 1e-12 <= stats.mean_accuracy <= max(values) + 1e-12
        assert stats.std_accuracy >= 0
        if len(set(values)) == 1:
            assert stats.std_accuracy == pytest.approx(0.0, abs=1e-12)
        else:
            assert stats.std_accuracy > 0


class TestMajorityVote:
    @pytest.mark.parametrize("labels, expected", [([0, 0, 0], 0), ([1, 1, 0], 1), ([1, 0], 1)])
    def test_examples(self, labels, expected):
        assert majority_vote(labels) == expected

    def test_configurable_tie(self):
        assert majority_vote([0, 1], tie=0) == 0

    def test_empty(self):
        with pytest.raises(GreenRiskError, match="no climate-related chunks"):
            majority_vote([])

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=15), st.randoms())
    def test_properties(self, labels, rnd):
        shuffled = labels[:]
        rnd.shuffle(shuffled)
        assert majority_vote(shuffled) == majority_vote(labels)
        ones = sum(labels)
        if 2 * ones != len(labels):
            assert majority_vote([1 - v for v in labels]) == 1 - majority_vote(labels)


class TestEvaluateReport:
    def test_self_consistent(self):
        doc, scorer, model = report_fixture(gold_pattern=(1, 0, 0, 1, 0), pred_pattern=(1, 0, 0, 1, 0))
        ev = evaluate_report(model, doc, EQ2, 300, scorer)
        assert len(chunk_document(doc, 300)) == 5
        assert ev.metrics == MetricPair(1.0, 1.0)
        assert ev.report_label_predicted == ev.report_label_gold == 0

    def test_hand_computed(self):
        doc, scorer, model = report_fixture()
        ev = evaluate_report(model, doc, EQ2, 300, scorer)
        assert ev.predictions == (1, 0, 0, 0, 0)
        assert ev.golds == (1, 1, 0, 0, 0)
        assert ev.metrics.accuracy == pytest.approx(0.8)
        assert ev.metrics.f1 == pytest.approx(2 / 3)
        assert (ev.report_label_predicted, ev.report_label_gold) == (0, 0)
        assert ev.chunk_ids == tuple(f"acme:{i}" for i in range(5))

    def test_tie(self):
        doc, scorer, model = report_fixture(gold_pattern=(1, 1, 0, 0), pred_pattern=(1, 0, 1, 0))
        ev = evaluate_report(model, doc, EQ2, 300, scorer)
        assert (ev.report_label_predicted, ev.report_label_gold) == (1, 1)

    def test_all_gated_out(self):
        doc, scorer, model = report_fixture()
        with pytest.raises(GreenRiskError, match="no climate-related chunks"):
            evaluate_report(model, doc, EQ2, 300, scorer, climate_lexicon=Lexicon.from_phrases(["biodiversity"]))

    def test_gate_drops_chunks(self):
        doc, scorer, model = report_fixture()
        ev = evaluate_report(model, doc, EQ2, 300, scorer, climate_lexicon=Lexicon.from_phrases(["risky"]))
        assert ev.predictions == (1,)


SIX_COMPANIES = [
    ("DiamondBack", 82.46, 0.67),
    ("Devon", 83.33, 0.63),
    ("APA", 85.14, 0.74),
    ("Autodesk", 85.96, 0.56),
    ("ServiceNow", 89.47, 0.67),
    ("NVIDIA", 91.67, 0.72),
]


class TestCompanyTable:
    def test_six_company_means(self):
        table = company_table([(c, MetricPair(a / 100, f)) for c, a, f in SIX_COMPANIES])
        assert table.mean_accuracy * 100 == pytest.approx(86.34, abs=0.01)
        assert round_half_up(table.mean_f1) == 0.67
        assert table.display_rows()[-1][:3] == ["Mean", "86.34", "0.67"]

    def test_single(self):
        ev = CompanyEval.from_labels("Solo", [1, 0, 1], [1, 1, 1])
        table = company_table([ev])
        assert table.mean_accuracy == ev.metrics.accuracy and table.mean_f1 == ev.metrics.f1

    def test_sorted_by_company(self):
        table = company_table([(c, MetricPair(a / 100, f)) for c, a, f in SIX_COMPANIES])
        assert [r[0] for r in table.rows] == sorted(c for c, _, _ in SIX_COMPANIES)

    def test_csv_columns(self):
        table = company_table([CompanyEval.from_labels("A", [1, 0], [1, 0])])
        lines = table.to_csv().splitlines()
        assert lines[0] == "Company,Accuracy,F1,ReportLabelPred,ReportLabelGold"
        assert lines[1] == "A,100.00,1.00,1,1"
        assert lines[-1] == "Mean,100.00,1.00,,"
        assert "Mean" in table.to_text()

    def test_empty(self):
        with pytest.raises(GreenRiskError):
            company_table([])

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=10))
    def test_mean_of_display_rows(self, rows):
        table = company_table([(f"c{i}", MetricPair(a, f)) for i, (a, f) in enumerate(rows)])
        shown = [float(r[1]) for r in table.display_rows()[:-1]]
        assert abs(sum(shown) / len(shown) - table.mean_accuracy * 100) <= 0.005 + 1e-9
        assert abs(float(table.display_rows()[-1][1]) - table.mean_accuracy * 100) <= 0.005 + 1e-9


def test_round_half_up():
    assert round_half_up(0.665) == 0.67
    assert round_half_up(0.6649) == 0.66
    assert round_half_up(86.335) == 86.34
