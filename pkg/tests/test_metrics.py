import json

import numpy as np
import pytest
from conftest import pairwise_auc, threshold_ap
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import average_precision_score, roc_auc_score

from qipf.exceptions import UndefinedMetricError
from qipf.metrics import EvalReport, evaluate, histogram, point_biserial, pr_auc, roc_auc, roc_curve


def instances(min_size=2, max_size=100):
    """Score/error pairs with both classes and plenty of ties."""
    return st.integers(min_size, max_size).flatmap(
        lambda n: st.tuples(
            st.lists(st.integers(0, 12).map(lambda v: v / 4), min_size=n, max_size=n),
            st.lists(st.integers(0, 1), min_size=n, max_size=n),
        )
    ).filter(lambda t: 0 < sum(t[1]) < len(t[1]))


class TestRocAuc:
    def test_perfect(self):
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_tie(self):
        assert roc_auc([0.5, 0.5, 0.3], [1, 0, 0]) == 0.75

    def test_single_class(self):
        with pytest.raises(UndefinedMetricError):
            roc_auc([0.1, 0.2], [0, 0])

    @settings(max_examples=200, deadline=None)
    @given(instances())
    def test_pairwise_oracle(self, inst):
        s, e = inst
        assert roc_auc(s, e) == pairwise_auc(s, e)

    @settings(max_examples=50, deadline=None)
    @given(instances())
    def test_monotone_transform(self, inst):
        s, e = inst
        assert roc_auc(np.exp(3 * np.array(s)) - 7, e) == roc_auc(s, e)

    @settings(max_examples=50, deadline=None)
    @given(instances())
    def test_complement(self, inst):
        s, e = inst
        assert roc_auc(s, e) + roc_auc(s, 1 - np.array(e)) == pytest.approx(1.0, abs=1e-12)

    def test_sklearn_agrees(self, rng):
        s = rng.normal(size=300)
        e = rng.integers(0, 2, 300)
        assert roc_auc(s, e) == pytest.approx(roc_auc_score(e, s), abs=1e-14)

    def test_curve_endpoints(self, rng):
        fpr, tpr = roc_curve(rng.normal(size=30), np.r_[np.ones(10), np.zeros(20)])
        assert (fpr[0], tpr[0], fpr[-1], tpr[-1]) == (0.0, 0.0, 1.0, 1.0)


class TestPrAuc:
    def test_perfect(self):
        assert pr_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_all_tied(self):
        assert pr_auc([0.4] * 8, [1, 0, 0, 1, 0, 0, 0, 0]) == 0.25

    def test_no_positives(self):
        with pytest.raises(UndefinedMetricError):
            pr_auc([0.1, 0.2], [0, 0])

    def test_fifty_point_oracle(self, rng):
        s = rng.integers(0, 20, 50) / 3
        e = rng.integers(0, 2, 50)
        assert pr_auc(s, e) == pytest.approx(threshold_ap(s, e), abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(instances())
    def test_threshold_oracle(self, inst):
        s, e = inst
        assert pr_auc(s, e) == pytest.approx(threshold_ap(s, e), abs=1e-12)

    def test_sklearn_agrees_without_ties(self, rng):
        s = rng.normal(size=300)
        e = rng.integers(0, 2, 300)
        assert pr_auc(s, e) == pytest.approx(average_precision_score(e, s), abs=1e-12)


class TestPointBiserial:
    def test_example(self):
        assert point_biserial([1, 2, 3, 4], [0, 0, 1, 1]) == pytest.approx(0.894427, abs=1e-6)

    def test_perfect(self):
        assert point_biserial([0.0, 1.0, 1.0, 0.0], [0, 1, 1, 0]) == pytest.approx(1.0, abs=1e-15)

    def test_zero_variance(self):
        with pytest.raises(UndefinedMetricError):
            point_biserial([2.0, 2.0, 2.0], [0, 1, 0])

    @settings(max_examples=100, deadline=None)
    @given(instances(3), st.floats(-100, 100))
    def test_pearson_and_shift(self, inst, c):
        s, e = inst
        s = np.array(s) + np.linspace(0, 1e-3, len(s))
        r = point_biserial(s, e)
        assert r == pytest.approx(np.corrcoef(s, e)[0, 1], abs=1e-12)
        assert point_biserial(s + c, e) == pytest.approx(r, abs=1e-9)
        assert -1 - 1e-12 <= r <= 1 + 1e-12


class TestHistogram:
    def test_single_score(self):
        _, correct, wrong = histogram([0.3], [1], bins=1)
        assert correct.tolist() == [0] and wrong.tolist() == [1]

    def test_counts_sum(self, rng):
        s = rng.normal(size=77)
        e = rng.integers(0, 2, 77)
        edges, correct, wrong = histogram(s, e, bins=9)
        assert correct.sum() == np.sum(e == 0) and wrong.sum() == np.sum(e == 1)
        assert edges[0] == s.min() and edges[-1] == s.max()

    def test_uniform(self):
        s = np.random.default_rng(1).uniform(size=10_000)
        _, correct, wrong = histogram(s, np.zeros(10_000, dtype=int), bins=10)
        assert np.all(np.abs(correct - 1000) <= 120) and wrong.sum() == 0


class TestReport:
    def test_undefined_become_null(self, tmp_path):
        report = evaluate([0.1, 0.2, 0.3], [0, 0, 0], method="x")
        data = json.loads(report.to_json(tmp_path / "r.json"))
        assert data["roc_auc"] is None and data["pr_auc"] is None
        assert data["metadata"]["method"] == "x"

    def test_round_trip(self, rng):
        report = evaluate(rng.normal(size=40), rng.integers(0, 2, 40), severity=3)
        back = EvalReport.from_dict(json.loads(report.to_json()))
        assert back.roc_auc == report.roc_auc and back.histogram == report.histogram

    def test_ranges(self, rng):
        r = evaluate(rng.normal(size=60), rng.integers(0, 2, 60))
        assert 0 <= r.roc_auc <= 1 and 0 <= r.pr_auc <= 1 and -1 <= r.point_biserial <= 1

    def test_curves_csv(self, tmp_path, rng):
        r = evaluate(rng.normal(size=20), np.r_[np.ones(5), np.zeros(15)].astype(int))
        r.write_curves(tmp_path / "roc.csv", tmp_path / "pr.csv")
        lines = (tmp_path / "roc.csv").read_text().splitlines()
        assert lines[0] == "fpr,tpr" and len(lines) == len(r.roc_points) + 1
