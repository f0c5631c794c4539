"""
Test cases for src/engine/cleaning.py
"""

import numpy as np
import pytest
from scipy.optimize import minimize

from src.engine.cleaning import estimate_states, l1_objective
from src.engine.soft_sensor import SoftSensorRecord
from src.errors import EstimationError
from src.model import MeasurementFrame, Topology


def _soft(process, reliability, output):
    return SoftSensorRecord(
        t=0,
        process=process,
        index=1,
        explanatory=np.array([0]),
        weights=np.array([1.0]),
        bias=0.0,
        fit_error=0.0,
        output=output,
        neighbors=np.array([0]),
        reliability=reliability,
    )


def _random_instance(rng):
    sizes = rng.integers(1, 6, size=3)
    topology = Topology.from_groups(
        {f"P{p}": [f"s{p}_{i}" for i in range(n)] for p, n in enumerate(sizes)}
    )
    frame = MeasurementFrame(t=1, values=rng.uniform(size=topology.n_sensors))
    scores = rng.uniform(0.1, 3.0, size=topology.n_sensors)
    softs = [
        _soft(p, rng.uniform(0.1, 3.0), rng.uniform())
        for p in range(3)
        for _ in range(int(rng.integers(0, 4)))
    ]
    gamma = np.full(3, float(rng.integers(0, 2)))
    z_prev = rng.uniform(size=3)
    return topology, frame, softs, scores, z_prev, gamma


class TestEstimateStates:
    """Test the closed-form state estimate"""

    def test_matches_generic_minimizer(self):
        """Test 100 random instances against scipy.optimize.minimize"""
        rng = np.random.default_rng(11)
        for _ in range(100):
            topology, frame, softs, scores, z_prev, gamma = _random_instance(rng)
            estimate = estimate_states(frame, softs, scores, z_prev, gamma, topology)

            def loss(z):
                return l1_objective(z, frame, softs, scores, z_prev, gamma, topology)

            result = minimize(loss, np.full(3, 0.5), method="BFGS", options={"gtol": 1e-12})
            np.testing.assert_allclose(estimate.states, result.x, atol=1e-6)
            assert loss(estimate.states) <= result.fun + 1e-12

    def test_weighted_mean_by_hand(self):
        """Test one process with two sensors, one soft sensor and a previous state"""
        topology = Topology.from_groups({"A": ["a1", "a2"]})
        frame = MeasurementFrame(t=5, values=[0.2, 0.6])
        estimate = estimate_states(
            frame, [_soft(0, 2.0, 0.9)], np.array([1.0, 3.0]), np.array([0.0]),
            np.array([0.5]), topology,
        )
        expected = (1 * 0.2 + 3 * 0.6 + 2 * 0.9 + 0.5 * 0.0) / (1 + 3 + 2 + 0.5)
        assert estimate.t == 5
        assert estimate.states[0] == pytest.approx(expected)

    def test_no_previous_state(self):
        """Test that z_prev=None drops the smoothness term"""
        topology = Topology.from_groups({"A": ["a1", "a2"]})
        frame = MeasurementFrame(t=0, values=[0.0, 1.0])
        estimate = estimate_states(frame, [], np.array([1.0, 1.0]), None, np.array([10.0]), topology)
        assert estimate.states[0] == pytest.approx(0.5)

    def test_zero_denominator(self):
        """Test that a process with no weight on any source is an error"""
        topology = Topology.from_groups({"A": ["a1"], "B": ["b1"]})
        frame = MeasurementFrame(t=0, values=[0.0, 1.0])
        with pytest.raises(EstimationError, match="'B'"):
            estimate_states(
                frame, [], np.array([1.0, 0.0]), np.zeros(2), np.zeros(2), topology
            )


class TestEstimateProperties:
    """Test the properties every estimate satisfies"""

    def test_inside_hull_of_sources(self):
        """Test that each state lies between its smallest and largest source"""
        rng = np.random.default_rng(12)
        for _ in range(200):
            topology, frame, softs, scores, z_prev, gamma = _random_instance(rng)
            states = estimate_states(frame, softs, scores, z_prev, gamma, topology).states
            for p, members in enumerate(topology.members):
                sources = list(frame.values[list(members)])
                sources += [r.output for r in softs if r.process == p]
                if gamma[p] > 0:
                    sources.append(z_prev[p])
                assert min(sources) - 1e-12 <= states[p] <= max(sources) + 1e-12

    def test_moves_toward_more_reliable_sensor(self):
        """Test that raising one score pulls its process state toward that sensor"""
        rng = np.random.default_rng(13)
        for _ in range(50):
            topology, frame, softs, scores, z_prev, gamma = _random_instance(rng)
            s = int(rng.integers(topology.n_sensors))
            p = int(topology.sensor_process[s])
            distances = []
            for c in (0.1, 0.5, 1.0, 5.0, 50.0, 500.0):
                bumped = scores.copy()
                bumped[s] = c
                z = estimate_states(frame, softs, bumped, z_prev, gamma, topology).states[p]
                distances.append(abs(z - frame.values[s]))
            assert all(b <= a + 1e-12 for a, b in zip(distances, distances[1:]))

    def test_gradient_vanishes(self):
        """Test a central finite difference of the loss at the estimate"""
        rng = np.random.default_rng(14)
        h = 1e-3
        for _ in range(100):
            topology, frame, softs, scores, z_prev, gamma = _random_instance(rng)
            z = estimate_states(frame, softs, scores, z_prev, gamma, topology).states
            for p in range(topology.n_processes):
                step = np.zeros_like(z)
                step[p] = h
                up = l1_objective(z + step, frame, softs, scores, z_prev, gamma, topology)
                down = l1_objective(z - step, frame, softs, scores, z_prev, gamma, topology)
                assert abs(up - down) / (2 * h) < 1e-9

    def test_common_weight_scale_cancels(self):
        """Test that scaling every score, soft reliability and gamma leaves states unchanged"""
        rng = np.random.default_rng(15)
        for _ in range(100):
            topology, frame, softs, scores, z_prev, gamma = _random_instance(rng)
            k = float(rng.uniform(0.01, 100.0))
            base = estimate_states(frame, softs, scores, z_prev, gamma, topology).states
            scaled_softs = [r.with_reliability(k * r.reliability) for r in softs]
            scaled = estimate_states(
                frame, scaled_softs, k * scores, z_prev, k * gamma, topology
            ).states
            np.testing.assert_allclose(scaled, base, rtol=0, atol=1e-12)
