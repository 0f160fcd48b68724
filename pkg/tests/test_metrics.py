import numpy as np
import pytest

from ldpfair.errors import ParameterError
from ldpfair.metrics import confusion_rates, disparity, group_rates

from _oracle import oracle_disparities, oracle_rates


class TestGroupRates:
    def test_hand_counted_confusion_table(self):
        rates = confusion_rates([1, 1, 0, 0], [1, 0, 1, 0])
        assert rates.tpr == 0.5
        assert rates.fpr == 0.5
        assert rates.accuracy == 0.5
        assert rates.ppv == 0.5
        assert rates.selection_rate == 0.5
        assert (rates.tp, rates.fp, rates.tn, rates.fn) == (1, 1, 1, 1)

    def test_perfect_predictor(self):
        y = [1, 0, 1, 1, 0]
        rates = confusion_rates(y, y)
        assert rates.tpr == 1.0
        assert rates.fpr == 0.0
        assert rates.accuracy == 1.0

    def test_tpr_undefined_without_positives(self):
        rates = confusion_rates([0, 0, 0], [1, 0, 1])
        assert rates.tpr is None
        assert rates.fpr is not None

    def test_counts_partition_group(self):
        rng = np.random.default_rng(0)
        y_true = rng.integers(0, 2, 40)
        y_pred = rng.integers(0, 2, 40)
        rates = confusion_rates(y_true, y_pred)
        assert rates.tp + rates.fp + rates.tn + rates.fn == rates.n == 40

    def test_errors(self):
        with pytest.raises(ParameterError):
            confusion_rates([0, 1], [0])
        with pytest.raises(ParameterError):
            confusion_rates([0, 2], [0, 1])
        with pytest.raises(ParameterError):
            group_rates([0, 1], [0, 1], [0, 3])

    def test_group_split(self):
        out = group_rates([1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 0, 0])
        assert out[1].n == 2 and out[0].n == 2
        assert out[1].selection_rate == 0.5


class TestDisparity:
    def test_toy_selection_gap(self):
        # privileged selects 3 of 4, unprivileged 1 of 4
        y_true = [1, 1, 0, 0, 1, 1, 0, 0]
        y_pred = [1, 1, 1, 0, 1, 0, 0, 0]
        groups = [1, 1, 1, 1, 0, 0, 0, 0]
        rates = group_rates(y_true, y_pred, groups)
        report = disparity(rates[1], rates[0])
        assert report.sd == 0.75 - 0.25
        assert report.as_dict() == oracle_disparities(y_true, y_pred, groups)

    def test_identical_groups_have_zero_disparity(self):
        rates = confusion_rates([1, 0, 1, 0], [1, 1, 0, 0])
        report = disparity(rates, rates)
        assert set(report.as_dict().values()) == {0.0}

    def test_antisymmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            y_true = rng.integers(0, 2, n)
            y_pred = rng.integers(0, 2, n)
            a = confusion_rates(y_true, y_pred)
            b = confusion_rates(y_pred, y_true)
            fwd = disparity(a, b).as_dict()
            rev = disparity(b, a).as_dict()
            for name, value in fwd.items():
                if value is None:
                    assert rev[name] is None
                else:
                    assert rev[name] == -value

    def test_empty_group_is_an_error(self):
        full = confusion_rates([1, 0], [1, 0])
        empty = confusion_rates([], [])
        with pytest.raises(ParameterError):
            disparity(full, empty)

    def test_undefined_propagates_not_zero(self):
        priv = confusion_rates([0, 0], [1, 0])   # no positives: tpr None
        unpriv = confusion_rates([1, 0], [1, 0])
        report = disparity(priv, unpriv)
        assert report.eod is None
        assert report.sd is not None


class TestOracleEquivalence:
    def test_thousand_random_datasets_match_oracle_exactly(self):
        rng = np.random.default_rng(20_24)
        for _ in range(1000):
            n = int(rng.integers(1, 51))
            y_true = rng.integers(0, 2, n)
            y_pred = rng.integers(0, 2, n)
            groups = rng.integers(0, 2, n)
            rates = group_rates(y_true, y_pred, groups)
            for g in (0, 1):
                expected = oracle_rates(y_true[groups == g], y_pred[groups == g])
                for name in ("selection_rate", "tpr", "fpr", "accuracy", "ppv"):
                    assert getattr(rates[g], name) == expected[name]
            if rates[0].n and rates[1].n:
                assert disparity(rates[1], rates[0]).as_dict() == oracle_disparities(y_true, y_pred, groups)

    def test_boundedness_and_permutation_invariance(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            n = int(rng.integers(2, 60))
            y_true = rng.integers(0, 2, n)
            y_pred = rng.integers(0, 2, n)
            groups = rng.integers(0, 2, n)
            rates = group_rates(y_true, y_pred, groups)
            if not (rates[0].n and rates[1].n):
                continue
            report = disparity(rates[1], rates[0]).as_dict()
            for value in report.values():
                if value is not None:
                    assert -1.0 <= value <= 1.0
            perm = rng.permutation(n)
            shuffled = group_rates(y_true[perm], y_pred[perm], groups[perm])
            assert disparity(shuffled[1], shuffled[0]).as_dict() == report
