"""
Test cases for src/engine/warmup.py
"""

import logging

import numpy as np
import pytest

from src.config import Config
from src.engine.soft_sensor import SoftSensorRecord
from src.engine.warmup import (
    WarmupProblem,
    init_states,
    joint_objective,
    run_warmup,
    solve_states,
    update_scores_warmup,
)
from src.errors import ConfigError, EstimationError
from src.model import MeasurementFrame, Topology


def _config(topology, T=50, **changes):
    fields = dict(
        r=0.7,
        n_neighbors=10,
        soft_sensors={p: 1 for p in topology.processes},
        gamma={p: 1.0 for p in topology.processes},
        window=5,
        warmup_length=T,
        rng_seed=0,
    )
    fields.update(changes)
    return Config(**fields).validate(topology)


def _random_problem(rng, T=50, **changes):
    sizes = rng.integers(1, 4, size=3)
    topology = Topology.from_groups(
        {f"P{p}": [f"s{p}_{i}" for i in range(n)] for p, n in enumerate(sizes)}
    )
    t = np.arange(T, dtype=float)
    phase = rng.uniform(0, 2 * np.pi, size=2)
    drivers = np.vstack([np.sin(t / 6 + phase[0]), np.cos(t / 9 + phase[1])])
    mixing = rng.uniform(-1, 1, size=(3, 2))
    signals = 0.5 + 0.2 * (mixing @ drivers)
    noise = rng.uniform(0.01, 0.1, size=topology.n_sensors)
    values = signals[topology.sensor_process] + noise[:, None] * rng.normal(
        size=(topology.n_sensors, T)
    )
    frames = [MeasurementFrame(t=100 + k, values=values[:, k]) for k in range(T)]
    return WarmupProblem(frames, topology, _config(topology, T=T, **changes))


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


class TestWarmupSteps:
    """Test the two coordinate-descent steps"""

    def test_init_states_are_process_means(self, small_topology):
        """Test the starting point"""
        values = np.array([[0.1, 0.3, 0.2, 0.6, 0.9], [0.0, 1.0, 0.5, 0.5, 0.4]])
        np.testing.assert_allclose(
            init_states(values, small_topology), [[0.2, 0.4, 0.9], [0.5, 0.5, 0.4]]
        )

    def test_solve_states_matches_dense_system(self, small_topology):
        """Test the banded solve against numpy.linalg.solve on the full matrix"""
        rng = np.random.default_rng(31)
        T, P = 12, small_topology.n_processes
        values = rng.uniform(size=(T, small_topology.n_sensors))
        scores = rng.uniform(0.5, 2.0, size=small_topology.n_sensors)
        gamma = np.array([0.5, 1.0, 2.0])
        softs = [
            tuple(_soft(int(p), rng.uniform(0.1, 1.0), rng.uniform()) for p in rng.integers(0, P, size=2))
            for _ in range(T)
        ]
        states = solve_states(scores, softs, values, gamma, small_topology)

        for p in range(P):
            members = list(small_topology.members[p])
            weight = np.full(T, scores[members].sum())
            rhs = values[:, members] @ scores[members]
            for t, step in enumerate(softs):
                for record in step:
                    if record.process == p:
                        weight[t] += record.reliability
                        rhs[t] += record.reliability * record.output
            laplacian = np.diag(np.r_[1.0, np.full(T - 2, 2.0), 1.0])
            laplacian -= np.eye(T, k=1) + np.eye(T, k=-1)
            expected = np.linalg.solve(np.diag(weight) + gamma[p] * laplacian, rhs)
            np.testing.assert_allclose(states[:, p], expected, atol=1e-10)

    def test_solve_states_singular(self, small_topology):
        """Test that zero gamma with zero weight has no unique solution"""
        values = np.zeros((3, small_topology.n_sensors))
        scores = np.array([1.0, 1.0, 1.0, 1.0, 0.0])
        with pytest.raises(EstimationError, match="'C'"):
            solve_states(scores, [(), (), ()], values, np.array([1.0, 1.0, 0.0]), small_topology)

    def test_scores_step_minimizes_for_fixed_states(self):
        """Test that perturbing the closed-form scores along the constraint never helps"""
        rng = np.random.default_rng(32)
        problem = _random_problem(rng)
        values = problem.values
        states = init_states(values, problem.topology)
        gamma = problem.config.gamma_vector(problem.topology)
        scores = update_scores_warmup(states, [], values, problem.topology)
        best = joint_objective(scores, states, [], values, gamma, problem.topology)
        for _ in range(20):
            other = scores + rng.normal(scale=0.3, size=scores.size)
            other += np.log(np.exp(-other).sum())
            assert joint_objective(other, states, [], values, gamma, problem.topology) >= best - 1e-12


class TestRunWarmup:
    """Test the full warm-up solve"""

    def test_objective_non_increasing_and_converges(self):
        """Test 20 random problems: monotone objective, stop rule within 500 iterations"""
        rng = np.random.default_rng(33)
        for _ in range(20):
            problem = _random_problem(rng, epsilon=1e-5, max_iterations=500)
            result = run_warmup(problem)
            assert result.converged
            assert result.iterations <= 500
            assert len(result.objective) == result.iterations
            assert np.all(np.diff(result.objective) <= 1e-10)
            assert abs(np.exp(-result.scores).sum() - 1.0) < 1e-9

    def test_result_shapes_and_summary(self):
        """Test the result fields and the ranked summary"""
        problem = _random_problem(np.random.default_rng(34))
        result = run_warmup(problem)
        T = problem.config.warmup_length
        assert result.states.shape == (T, problem.topology.n_processes)
        assert result.timestamps.tolist() == list(range(100, 100 + T))
        assert len(result.softs) == T
        for step in result.softs:
            for record in step:
                assert record.reliability >= 0
        summary = result.summary(problem.topology)
        ranked = [score for _, score in summary["ranked"]]
        assert ranked == sorted(ranked)
        assert summary["final_objective"] == result.objective[-1]
        assert set(summary["scores"]) == set(problem.topology.sensors)

    def test_iteration_cap_reported(self, caplog):
        """Test that hitting the cap logs a warning and flags non-convergence"""
        problem = _random_problem(np.random.default_rng(35), epsilon=1e-300, max_iterations=2)
        with caplog.at_level(logging.WARNING):
            result = run_warmup(problem)
        assert not result.converged
        assert result.iterations == 2
        assert any("iteration cap" in r.getMessage() for r in caplog.records)

    def test_refit_variant_runs(self):
        """Test the per-iteration refit switch"""
        problem = _random_problem(np.random.default_rng(36), warmup_refit=True, max_iterations=50)
        result = run_warmup(problem)
        assert np.all(np.isfinite(result.states))
        assert result.errors.count > 0

    def test_deterministic(self):
        """Test that the same seed gives the same warm-up"""
        a = run_warmup(_random_problem(np.random.default_rng(37)))
        b = run_warmup(_random_problem(np.random.default_rng(37)))
        np.testing.assert_array_equal(a.scores, b.scores)
        np.testing.assert_array_equal(a.states, b.states)

    def test_frame_count_must_match_t(self, small_topology, small_frames):
        """Test that the problem needs exactly T frames"""
        config = _config(small_topology, T=30)
        with pytest.raises(ConfigError):
            WarmupProblem(small_frames[:29], small_topology, config)
