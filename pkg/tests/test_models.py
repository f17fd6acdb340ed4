"""
Tests for data models.
"""

import numpy as np
import pytest

from mmwave_scheduling.exceptions import DomainError, UnknownSchedulerError
from mmwave_scheduling.models import (
    AqnmParams,
    OrthoBasis,
    QuantizedRxSample,
    RateReport,
    SchedulerId,
    ScheduleTrace,
    SystemConfig,
)
from mmwave_scheduling.utils import db_to_linear


class TestSystemConfig:
    """Test cases for SystemConfig."""

    def test_defaults(self):
        cfg = SystemConfig()
        assert (cfg.num_antennas, cfg.num_users, cfg.num_scheduled) == (128, 200, 10)
        assert cfg.num_rf_chains == 128

    def test_power_in_db(self):
        assert SystemConfig().with_power_db(20).transmit_power == pytest.approx(100.0)
        assert SystemConfig().with_power_db(-10).transmit_power == pytest.approx(0.1)
        assert SystemConfig().with_power_db(6.0).transmit_power == db_to_linear(6.0)

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"num_antennas": 0}, "positive integer"),
            ({"num_users": 5}, "num_scheduled must not exceed num_users"),
            ({"num_antennas": 8, "num_stored_beams": 8, "num_scheduled": 9, "num_users": 9}, "num_antennas"),
            ({"num_stored_beams": 2}, "at least num_paths"),
            ({"ortho_threshold": -0.1}, "ortho_threshold"),
            ({"beam_overlap_limit": -1}, "beam_overlap_limit"),
            ({"transmit_power": -1.0}, "transmit_power"),
        ],
    )
    def test_invalid(self, kwargs, message):
        with pytest.raises(DomainError, match=message):
            SystemConfig(**kwargs)


class TestAqnmParams:
    """Test cases for AqnmParams."""

    def test_alpha(self):
        params = AqnmParams(bits=2, beta=0.1175)
        assert params.alpha == pytest.approx(0.8825)
        assert not params.is_ideal

    def test_ideal(self):
        params = AqnmParams.ideal()
        assert params.alpha == 1.0
        assert params.is_ideal


class TestRateReport:
    """Test cases for RateReport."""

    def test_from_rates(self):
        report = RateReport.from_rates(np.array([1.0, 2.5, 0.5]))
        assert report.per_user_rates == (1.0, 2.5, 0.5)
        assert report.sum_rate == 4.0

    def test_empty(self):
        assert RateReport.empty().sum_rate == 0.0


class TestOrthoBasis:
    """Test cases for OrthoBasis."""

    def test_residual_is_orthogonal(self, rng):
        a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        basis = OrthoBasis().extended(a)
        f = basis.residual(b)
        assert abs(np.vdot(a, f)) < 1e-12
        basis = basis.extended(f)
        assert len(basis) == 2
        np.testing.assert_allclose(basis.residual(a + 2 * b), 0, atol=1e-12)

    def test_empty_basis_keeps_vector(self):
        h = np.array([1.0, 2.0j])
        np.testing.assert_array_equal(OrthoBasis().residual(h), h)


class TestSchedulerId:
    """Test cases for SchedulerId."""

    def test_parse(self):
        assert SchedulerId.parse(" CSS ") is SchedulerId.CSS
        assert SchedulerId.parse(SchedulerId.SUS) is SchedulerId.SUS

    def test_unknown(self):
        with pytest.raises(UnknownSchedulerError, match="Valid schedulers"):
            SchedulerId.parse("round-robin")

    def test_beam_select_is_labelled_variant(self):
        assert SchedulerId.BEAM_SELECT.label == "beam-select (variant)"
        assert SchedulerId.GREEDY.label == "greedy"


class TestScheduleTrace:
    """Test cases for ScheduleTrace."""

    def test_without_rates(self):
        trace = ScheduleTrace(SchedulerId.RANDOM, selected=(3, 1), candidate_sizes=())
        assert trace.sum_rate == 0.0
        assert trace.num_selected == 2
        assert trace.shortfall(4) == 2
        assert trace.shortfall(1) == 0


class TestQuantizedRxSample:
    """Test cases for QuantizedRxSample."""

    def test_distortion(self):
        sample = QuantizedRxSample(analog=np.array([1.0, -1.0]), quantized=np.array([0.5, -0.5]))
        assert sample.distortion() == pytest.approx(0.25)

    def test_zero_input(self):
        assert QuantizedRxSample(np.zeros(3), np.zeros(3)).distortion() == 0.0
