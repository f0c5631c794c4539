"""
Test cases for src/engine/soft_sensor.py
"""

import numpy as np
import pytest
from scipy.stats import chisquare

from src.engine.soft_sensor import (
    STREAM_DOMAIN,
    ErrorNormalizer,
    HistoryStore,
    SoftSensorRecord,
    build_soft_sensor,
    evaluate,
    explanatory_count,
    fit_local,
    knn,
    normalized_error,
    refit_soft_sensor,
    select_explanatory,
    soft_reliability,
    soft_sensor_rng,
)
from src.errors import ConfigError, FitError, InsufficientHistoryError
from src.model import Topology


def _record(weights, explanatory, norm_error=0.0, process=0):
    return SoftSensorRecord(
        t=0,
        process=process,
        index=1,
        explanatory=np.asarray(explanatory),
        weights=np.asarray(weights, dtype=float),
        bias=0.0,
        fit_error=0.0,
        output=0.0,
        neighbors=np.arange(3),
        norm_error=norm_error,
    )


class TestFitLocal:
    """Test the local least-squares fit against closed-form solutions"""

    def test_matches_normal_equations(self):
        """Test 1000 random well-conditioned instances against the normal equations"""
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(8, 40))
            d = int(rng.integers(1, 6))
            X = rng.normal(size=(n, d))
            y = X @ rng.normal(size=d) + rng.normal() + rng.normal(scale=0.3, size=n)
            A = np.hstack([X, np.ones((n, 1))])
            beta = np.linalg.solve(A.T @ A, A.T @ y)
            fit = fit_local(X, y)
            np.testing.assert_allclose(fit.weights, beta[:d], atol=1e-8)
            assert fit.bias == pytest.approx(beta[d], abs=1e-8)
            residual = y - A @ beta
            assert fit.fit_error == pytest.approx(residual @ residual / n, abs=1e-8)

    def test_exact_plane_has_zero_error(self):
        """Test that points on a plane are fitted exactly"""
        rng = np.random.default_rng(1)
        for _ in range(50):
            X = rng.uniform(size=(20, 3))
            y = X @ np.array([0.5, -1.0, 2.0]) + 0.25
            assert fit_local(X, y).fit_error < 1e-12

    def test_rank_deficient_design(self):
        """Test that duplicated columns still give finite weights reproducing the fit"""
        rng = np.random.default_rng(2)
        col = rng.uniform(size=15)
        X = np.column_stack([col, col])
        y = 3 * col + 1
        fit = fit_local(X, y)
        assert np.all(np.isfinite(fit.weights))
        np.testing.assert_allclose(X @ fit.weights + fit.bias, y, atol=1e-6)

    def test_constant_targets(self):
        """Test that a flat target gives zero weights and the mean as bias"""
        X = np.random.default_rng(3).uniform(size=(10, 2))
        fit = fit_local(X, np.full(10, 0.4))
        np.testing.assert_allclose(fit.weights, 0.0, atol=1e-10)
        assert fit.bias == pytest.approx(0.4)

    def test_non_finite_input_rejected(self):
        """Test that NaN in the design is a fit error"""
        X = np.ones((4, 1))
        X[2, 0] = np.nan
        with pytest.raises(FitError):
            fit_local(X, np.zeros(4))


class TestExplanatorySelection:
    """Test the random explanatory subset"""

    @pytest.mark.parametrize(
        "r,n,expected", [(0.7, 10, 7), (0.7, 11, 8), (0.1, 3, 1), (1.0, 4, 4), (0.01, 1, 1)]
    )
    def test_explanatory_count(self, r, n, expected):
        """Test ceil(r * n) clamped to [1, n]"""
        assert explanatory_count(r, n) == expected

    def test_subset_is_outside_process_and_sorted(self, small_topology):
        """Test that selected sensors never monitor the target process"""
        rng = np.random.default_rng(4)
        for _ in range(20):
            chosen = select_explanatory(small_topology, 0, 0.6, rng)
            assert chosen.size == 2
            assert np.all(np.diff(chosen) > 0)
            assert set(chosen.tolist()) <= {2, 3, 4}

    def test_subsets_are_uniform(self):
        """Test 1000 draws against the uniform law over all 2-of-5 subsets"""
        topology = Topology.from_groups({"A": ["a1"], "B": ["b1", "b2"], "C": ["c1", "c2", "c3"]})
        rng = np.random.default_rng(5)
        counts = {}
        inclusion = np.zeros(topology.n_sensors)
        for _ in range(1000):
            chosen = select_explanatory(topology, 0, 0.4, rng)
            counts[tuple(chosen.tolist())] = counts.get(tuple(chosen.tolist()), 0) + 1
            inclusion[chosen] += 1
        assert len(counts) == 10
        assert chisquare(list(counts.values())).pvalue > 1e-3
        assert inclusion[0] == 0
        # each outside sensor is picked with probability 2/5
        np.testing.assert_allclose(inclusion[1:] / 1000, 0.4, atol=4 * np.sqrt(0.24 / 1000))

    def test_no_outside_sensor(self):
        """Test that a single-process topology has no candidates"""
        topology = Topology.from_groups({"A": ["a1", "a2"]})
        with pytest.raises(ConfigError):
            select_explanatory(topology, 0, 0.5, np.random.default_rng(0))

    def test_rng_independent_of_call_order(self):
        """Test that each (step, process, index) cell has its own stream"""
        a = soft_sensor_rng(7, STREAM_DOMAIN, 3, 1, 2).random(4)
        soft_sensor_rng(7, STREAM_DOMAIN, 3, 0, 1).random(10)
        b = soft_sensor_rng(7, STREAM_DOMAIN, 3, 1, 2).random(4)
        c = soft_sensor_rng(7, STREAM_DOMAIN, 3, 1, 3).random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.allclose(a, c)


class TestHistoryStore:
    """Test the reservoir history and neighbor search"""

    def test_knn_on_explanatory_projection(self):
        """Test that distances only use the explanatory sensors"""
        X = np.array([[0.0, 100.0], [1.0, -50.0], [2.0, 0.0], [3.0, 0.0]])
        store = HistoryStore.from_arrays([10, 11, 12, 13], X, np.zeros((4, 1)))
        slots = knn(store, np.array([0.9]), np.array([0]), 2)
        assert slots.tolist() == [1, 0]

    def test_ties_prefer_older_rows(self):
        """Test that equal distances rank by timestamp"""
        X = np.array([[1.0], [-1.0], [1.0]])
        store = HistoryStore.from_arrays([5, 3, 4], X, np.zeros((3, 1)))
        slots = store.knn(np.array([0.0]), np.array([0]), 2)
        assert store.ts[slots].tolist() == [3, 4]

    def test_exclude_t(self):
        """Test that the query step can be left out"""
        X = np.array([[0.0], [1.0], [2.0]])
        store = HistoryStore.from_arrays([0, 1, 2], X, np.zeros((3, 1)))
        slots = store.knn(np.array([0.0]), np.array([0]), 2, exclude_t=0)
        assert store.ts[slots].tolist() == [1, 2]

    def test_insufficient_history(self):
        """Test that asking for more neighbors than rows fails"""
        store = HistoryStore(5, 1, 1)
        store.add(0, np.zeros(1), np.zeros(1))
        with pytest.raises(InsufficientHistoryError):
            store.knn(np.zeros(1), np.array([0]), 2)

    def test_reservoir_keeps_capacity(self):
        """Test bounded size and the count of offered rows"""
        store = HistoryStore(10, 2, 1, rng=np.random.default_rng(0))
        for t in range(100):
            store.add(t, np.full(2, t), np.full(1, t))
        assert len(store) == 10
        assert store.seen == 100
        np.testing.assert_array_equal(store.X[:, 0], store.ts)
        assert len(set(store.ts.tolist())) == 10

    def test_reservoir_is_uniform(self):
        """Test that every offered step survives with probability capacity / n"""
        counts = np.zeros(40)
        for seed in range(2000):
            store = HistoryStore(10, 1, 1, rng=np.random.default_rng(seed))
            for t in range(40):
                store.add(t, np.zeros(1), np.zeros(1))
            counts[store.ts] += 1
        np.testing.assert_allclose(counts / 2000, 0.25, atol=0.05)


class TestErrorsAndReliability:
    """Test error normalization and the soft sensor reliability"""

    def test_normalized_error_range(self):
        """Test min-max normalization of fitting errors"""
        errors = ErrorNormalizer()
        errors.insert_many([0.2, 0.6, 1.0])
        assert normalized_error(0.2, errors) == 0.0
        assert normalized_error(0.6, errors) == pytest.approx(0.5)
        assert normalized_error(1.0, errors) == 1.0

    def test_equal_errors_normalize_to_zero(self):
        """Test the degenerate range"""
        errors = ErrorNormalizer()
        errors.insert_many([0.3, 0.3])
        assert normalized_error(0.3, errors) == 0.0

    def test_copy_is_independent(self):
        """Test that copies do not share state"""
        errors = ErrorNormalizer()
        errors.insert(1.0)
        other = errors.copy()
        other.insert(5.0)
        assert errors.maximum == 1.0
        assert other.maximum == 5.0

    def test_soft_reliability_weighted_mean(self):
        """Test c = sum|w| c_s / sum|w| * (1 - e)"""
        record = _record([1.0, -3.0], [0, 2], norm_error=0.5)
        scores = np.array([2.0, 9.0, 4.0])
        assert soft_reliability(record, scores) == pytest.approx((1 * 2 + 3 * 4) / 4 * 0.5)

    def test_zero_weights_dropped(self):
        """Test that an all-zero weight vector has no reliability"""
        assert soft_reliability(_record([0.0, 0.0], [0, 1]), np.ones(3)) is None
        np.testing.assert_array_equal(_record([0.0], [0]).attribution(), [0.0])

    def test_attribution_shares(self):
        """Test g = |w| / sum|w| * (1 - e)"""
        record = _record([2.0, -6.0], [1, 3], norm_error=0.25)
        np.testing.assert_allclose(record.attribution(), [0.25 * 0.75, 0.75 * 0.75])


class TestBuildSoftSensor:
    """Test soft sensor construction on a history"""

    def test_recovers_linear_relation(self):
        """Test that a process linear in the other sensors is predicted exactly"""
        topology = Topology.from_groups({"A": ["a"], "B": ["b1", "b2"]})
        rng = np.random.default_rng(5)
        X = rng.uniform(size=(60, 3))
        X[:, 0] = 0.3 * X[:, 1] + 0.5 * X[:, 2] + 0.1
        Z = np.column_stack([X[:, 0], X[:, 1:].mean(axis=1)])
        store = HistoryStore.from_arrays(np.arange(60), X, Z)
        x = np.array([0.0, 0.4, 0.6])
        record = build_soft_sensor(
            store, x, topology, 0, 1, r=1.0, k=20, rng=np.random.default_rng(0), t=60
        )
        assert record.explanatory.tolist() == [1, 2]
        assert record.output == pytest.approx(0.3 * 0.4 + 0.5 * 0.6 + 0.1, abs=1e-9)
        assert record.fit_error < 1e-12
        assert record.neighbors.size == 20
        assert evaluate(record, x) == record.output

    def test_refit_keeps_explanatory_set(self):
        """Test refitting on new targets"""
        topology = Topology.from_groups({"A": ["a"], "B": ["b1", "b2"]})
        rng = np.random.default_rng(6)
        X = rng.uniform(size=(30, 3))
        store = HistoryStore.from_arrays(np.arange(30), X, rng.uniform(size=(30, 2)))
        x = X[0]
        record = build_soft_sensor(
            store, x, topology, 0, 1, r=1.0, k=10, rng=np.random.default_rng(1), t=30
        )
        rows = X[record.neighbors]
        targets = rows[:, 1] * 2.0
        refit = refit_soft_sensor(record, rows, targets, x)
        np.testing.assert_array_equal(refit.explanatory, record.explanatory)
        np.testing.assert_allclose(refit.weights, [2.0, 0.0], atol=1e-8)
        assert refit.output == pytest.approx(2.0 * x[1])
