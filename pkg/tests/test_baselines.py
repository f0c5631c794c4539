"""
Test cases for src/cleaners/
"""

import numpy as np
import pytest

from src.cleaners import (
    SUPPORTED_METHODS,
    ImcCleaner,
    ImcState,
    MeanCleaner,
    MedianCleaner,
    RelSenCleaner,
    get_cleaner,
    imc_step,
    mean_clean,
    median_clean,
    run_cleaner,
)
from src.config import Config
from src.errors import CalibrationError, StreamError
from src.model import MeasurementFrame, Topology

T = 30


@pytest.fixture
def config(small_topology):
    return Config(
        r=0.7,
        n_neighbors=10,
        soft_sensors={"A": 1, "B": 1, "C": 1},
        gamma={"A": 1.0, "B": 1.0, "C": 1.0},
        window=4,
        warmup_length=T,
        imc_tol=0.05,
    ).validate(small_topology)


class TestStatelessBaselines:
    """Test MEDIAN and MEAN"""

    def test_median_even_and_odd(self):
        """Test the per-process median"""
        topology = Topology.from_groups({"A": ["a1", "a2", "a3"], "B": ["b1", "b2"]})
        frame = MeasurementFrame(t=0, values=[0.9, 0.1, 0.2, 0.4, 0.8])
        np.testing.assert_allclose(median_clean(frame, topology).states, [0.2, 0.6])

    def test_mean(self, small_topology):
        """Test the per-process mean"""
        frame = MeasurementFrame(t=0, values=[0.0, 1.0, 0.2, 0.4, 0.7])
        np.testing.assert_allclose(mean_clean(frame, small_topology).states, [0.5, 0.3, 0.7])

    def test_median_resists_one_outlier(self):
        """Test that one spiked sensor does not move a 3-sensor median"""
        topology = Topology.from_groups({"A": ["a1", "a2", "a3"]})
        frame = MeasurementFrame(t=0, values=[0.5, 0.52, 9.0])
        assert median_clean(frame, topology).states[0] == pytest.approx(0.52)


class TestImc:
    """Test the IMC baseline"""

    def test_consistency_window(self):
        """Test scores as the windowed fraction of consistent measurements"""
        topology = Topology.from_groups({"A": ["a1", "a2", "a3"]})
        state = ImcState(tol=0.05, window=2, n_sensors=3)
        np.testing.assert_array_equal(state.scores, [1.0, 1.0, 1.0])

        estimate, scores = imc_step(state, MeasurementFrame(t=0, values=[0.5, 0.5, 0.8]), topology)
        assert estimate.states[0] == pytest.approx(0.6)
        np.testing.assert_allclose(scores, [0.5, 0.5, 0.5])

        estimate, scores = imc_step(state, MeasurementFrame(t=1, values=[0.5, 0.5, 0.8]), topology)
        assert estimate.states[0] == pytest.approx(0.6)
        np.testing.assert_allclose(scores, [0.0, 0.0, 0.0])

        estimate, scores = imc_step(state, MeasurementFrame(t=2, values=[0.5, 0.52, 0.51]), topology)
        assert estimate.states[0] == pytest.approx(0.51)
        np.testing.assert_allclose(scores, [0.5, 0.5, 0.5])

    def test_single_sensor_process_passes_through(self):
        """Test that a lone sensor is its own estimate"""
        topology = Topology.from_groups({"A": ["a1"]})
        state = ImcState(tol=0.05, window=3, n_sensors=1)
        estimate, scores = imc_step(state, MeasurementFrame(t=0, values=[0.3]), topology)
        assert estimate.states[0] == 0.3
        assert scores[0] == 1.0

    def test_warm_rows_use_mean(self, config, small_topology, small_frames):
        """Test that IMC emits mean estimates with full scores during warm-up"""
        cleaner = ImcCleaner(config, small_topology)
        rows = cleaner.warm(small_frames[:T])
        assert len(rows) == T
        np.testing.assert_array_equal(rows[0].scores, np.ones(small_topology.n_sensors))
        assert cleaner.window == config.window


class TestCleanerInterface:
    """Test the shared cleaner plumbing"""

    def test_registry(self, config, small_topology):
        """Test method ids and classes"""
        assert SUPPORTED_METHODS == ["relsen", "median", "mean", "imc"]
        assert isinstance(get_cleaner("median", config, small_topology), MedianCleaner)
        assert isinstance(get_cleaner("mean", config, small_topology), MeanCleaner)
        assert get_cleaner("imc", config, small_topology, window=7).window == 7
        relsen = get_cleaner("relsen", config, small_topology, window=6, threads=1)
        assert isinstance(relsen, RelSenCleaner)
        assert relsen.config.window == 6
        relsen.close()
        with pytest.raises(ValueError):
            get_cleaner("bayes", config, small_topology)

    @pytest.mark.parametrize("method", ["relsen", "median", "mean", "imc"])
    def test_one_row_per_frame(self, method, config, small_topology, small_frames):
        """Test that run_cleaner emits every timestamp in order"""
        kwargs = {"threads": 1} if method == "relsen" else {}
        cleaner = get_cleaner(method, config, small_topology, **kwargs)
        steps = run_cleaner(cleaner, small_frames, T)
        assert [s.t for s in steps] == [f.t for f in small_frames]
        assert (steps[-1].scores is not None) == cleaner.has_scores

    def test_step_before_warm(self, config, small_topology, small_frames):
        """Test that a cleaner must be warmed first"""
        with pytest.raises(StreamError):
            MeanCleaner(config, small_topology).step(small_frames[0])

    def test_gap_rejected(self, config, small_topology, small_frames):
        """Test the consecutive-timestamp check of the baselines"""
        cleaner = MedianCleaner(config, small_topology)
        cleaner.warm(small_frames[:T])
        with pytest.raises(StreamError):
            cleaner.step(small_frames[T + 2])

    @pytest.mark.parametrize("method", ["relsen", "median", "mean", "imc"])
    def test_every_method_checks_stream_order(self, method, config, small_topology, small_frames):
        """Test that the shared order checks apply to every method, RelSen included"""
        kwargs = {"threads": 1} if method == "relsen" else {}
        cleaner = get_cleaner(method, config, small_topology, **kwargs)
        try:
            with pytest.raises(StreamError):
                cleaner.step(small_frames[T])
            cleaner.warm(small_frames[:T])
            assert cleaner.last_t == small_frames[T - 1].t
            assert cleaner.normalizer is not None
            with pytest.raises(StreamError):
                cleaner.step(small_frames[T + 1])
            assert cleaner.step(small_frames[T]).t == small_frames[T].t
            assert cleaner.last_t == small_frames[T].t
        finally:
            cleaner.close()

    def test_warm_needs_frames(self, config, small_topology):
        """Test that an empty warm-up span is rejected"""
        with pytest.raises(CalibrationError):
            MeanCleaner(config, small_topology).warm([])

    def test_outputs_in_normalized_units(self, config, small_topology, small_frames):
        """Test that warm-up rows of MEAN lie in [0, 1]"""
        cleaner = MeanCleaner(config, small_topology)
        rows = cleaner.warm(small_frames[:T])
        states = np.vstack([r.estimate.states for r in rows])
        assert states.min() >= 0.0
        assert states.max() <= 1.0

    def test_relsen_exposes_warmup(self, config, small_topology, small_frames):
        """Test the warm-up result and scores of the RelSen cleaner"""
        cleaner = RelSenCleaner(config, small_topology, threads=1)
        assert cleaner.warmup is None
        rows = cleaner.warm(small_frames[:T])
        assert cleaner.warmup is not None
        np.testing.assert_array_equal(rows[0].scores, cleaner.warmup.scores)
        cleaner.close()
