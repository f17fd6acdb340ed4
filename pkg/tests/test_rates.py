"""
Tests for zero-forcing rates, the approximate SINR and the closed forms.
"""

import numpy as np
import pytest

from mmwave_scheduling.channel import make_virtual_channel
from mmwave_scheduling.exceptions import DomainError, SingularChannelError
from mmwave_scheduling.models import Spread, VirtualChannelSpec
from mmwave_scheduling.quantize import aqnm_params, quantization_covariance
from mmwave_scheduling.rates import (
    approx_sinr,
    approx_sinr_batch,
    closed_form_single_user_rate,
    rate_limit_infinite_power,
    row_gains,
    sum_rate,
    user_rate,
    user_sinrs,
    zf_combiner,
)


def _virtual(support, gamma, num_antennas=16, rng=None, spread=Spread.EQUAL):
    return make_virtual_channel(VirtualChannelSpec(tuple(support), gamma, num_antennas, spread), rng)


class TestZfCombiner:
    """Test cases for zf_combiner."""

    def test_zero_forcing_property(self, beamspace_channels):
        H = beamspace_channels[:, :4]
        W = zf_combiner(H).columns
        np.testing.assert_allclose(W.conj().T @ H, np.eye(4), atol=1e-10)

    def test_single_user_is_scaled_channel(self):
        h = _virtual((0, 3), 4.0)
        np.testing.assert_allclose(zf_combiner(h).column(0), h / 4.0)

    def test_rank_deficient(self, beamspace_channels):
        h = beamspace_channels[:, 0]
        with pytest.raises(SingularChannelError):
            zf_combiner(np.column_stack([h, 2 * h]))

    def test_singular_is_linalg_error(self):
        with pytest.raises(np.linalg.LinAlgError):
            zf_combiner(np.zeros((4, 2)))

    def test_no_user_columns(self):
        with pytest.raises(DomainError, match="at least one user"):
            zf_combiner(np.zeros((4, 0)))


class TestExactRates:
    """Test cases for user_rate and sum_rate."""

    def test_sum_of_user_rates(self, beamspace_channels):
        H = beamspace_channels[:, :4]
        params = aqnm_params(2)
        report = sum_rate(H, 2.0, params)
        expected = [user_rate(H, k, 2.0, params) for k in range(4)]
        np.testing.assert_allclose(report.per_user_rates, expected)
        assert report.sum_rate == pytest.approx(sum(expected))

    def test_sinr_formula(self, beamspace_channels):
        H = beamspace_channels[:, :3]
        rho, params = 1.5, aqnm_params(3)
        W = zf_combiner(H).columns
        R = quantization_covariance(H, rho, params).as_matrix()
        alpha = params.alpha
        for k in range(3):
            w = W[:, k]
            expected = alpha ** 2 * rho / np.real(w.conj() @ R @ w + alpha ** 2 * w.conj() @ w)
            assert user_sinrs(H, rho, params)[k] == pytest.approx(expected)

    def test_rate_increases_with_bits(self, beamspace_channels):
        H = beamspace_channels[:, :4]
        rates = [sum_rate(H, 10.0, aqnm_params(b)).sum_rate for b in range(1, 8)]
        assert all(a < b for a, b in zip(rates, rates[1:]))
        assert rates[-1] < sum_rate(H, 10.0, aqnm_params(None)).sum_rate

    def test_ideal_resolution_is_plain_zf(self, beamspace_channels):
        H = beamspace_channels[:, :3]
        W = zf_combiner(H).columns
        expected = np.log2(1 + 4.0 / np.sum(np.abs(W) ** 2, axis=0))
        np.testing.assert_allclose(sum_rate(H, 4.0, aqnm_params(None)).per_user_rates, expected)

    def test_zero_power(self, beamspace_channels):
        assert sum_rate(beamspace_channels[:, :2], 0.0, aqnm_params(2)).sum_rate == 0.0

    def test_empty_selection(self):
        report = sum_rate(np.zeros((8, 0)), 1.0, aqnm_params(2))
        assert report.sum_rate == 0.0
        assert report.per_user_rates == ()

    def test_bad_user_index(self, beamspace_channels):
        with pytest.raises(DomainError, match="out of range"):
            user_rate(beamspace_channels[:, :2], 2, 1.0, aqnm_params(2))

    def test_phases_do_not_matter_for_single_user(self, rng):
        params = aqnm_params(2)
        a = _virtual((1, 2, 7), 3.0, rng=rng)
        b = np.abs(a)
        assert user_rate(a, 0, 2.0, params) == pytest.approx(user_rate(b, 0, 2.0, params), rel=1e-12)


class TestClosedForms:
    """Test cases for the single-user closed forms."""

    @pytest.mark.parametrize("gamma, L, rho, bits", [(1.0, 1, 1.0, 1), (5.0, 4, 3.0, 2), (50.0, 8, 0.3, 4)])
    def test_equal_spread_matches_closed_form(self, rng, gamma, L, rho, bits):
        params = aqnm_params(bits)
        h = _virtual(rng.choice(16, size=L, replace=False), gamma, rng=rng)
        assert user_rate(h, 0, rho, params) == pytest.approx(
            closed_form_single_user_rate(gamma, L, rho, params.alpha), rel=1e-10
        )

    def test_rate_grows_with_paths(self):
        alpha = aqnm_params(2).alpha
        rates = [closed_form_single_user_rate(10.0, L, 5.0, alpha) for L in (1, 2, 4, 8)]
        assert all(a < b for a, b in zip(rates, rates[1:]))

    def test_equal_spread_beats_concentrated(self):
        params = aqnm_params(2)
        equal = user_rate(_virtual((0, 1, 2, 3), 10.0), 0, 2.0, params)
        single = user_rate(_virtual((5,), 10.0, spread=Spread.SINGLE_BEAM), 0, 2.0, params)
        assert equal > single

    def test_equal_spread_beats_random_allocations(self, rng):
        params = aqnm_params(2)
        equal = user_rate(_virtual((0, 1, 2, 3), 10.0), 0, 2.0, params)
        h = np.zeros(16, dtype=complex)
        for weights in rng.dirichlet(np.ones(4), size=10_000):
            h[:4] = np.sqrt(10.0 * weights)
            assert user_rate(h, 0, 2.0, params) <= equal + 1e-9

    @pytest.mark.parametrize("bits", [1, 2, 3])
    def test_infinite_power_limit(self, bits):
        params = aqnm_params(bits)
        h = _virtual((0, 1, 2, 3), 1e6)
        assert user_rate(h, 0, 1.0, params) == pytest.approx(rate_limit_infinite_power(4, params.alpha), rel=0.01)

    def test_limit_is_infinite_without_quantization(self):
        assert rate_limit_infinite_power(4, 1.0) == float("inf")

    def test_closed_form_domain(self):
        with pytest.raises(DomainError):
            closed_form_single_user_rate(0.0, 4, 1.0, 0.9)
        with pytest.raises(DomainError):
            rate_limit_infinite_power(0, 0.9)
        with pytest.raises(DomainError):
            rate_limit_infinite_power(4, 0.0)

    def test_disjoint_supports_reach_bound(self, rng):
        params = aqnm_params(2)
        H = np.column_stack([_virtual(range(4 * k, 4 * k + 4), 5.0, rng=rng) for k in range(3)])
        bound = closed_form_single_user_rate(5.0, 4, 2.0, params.alpha)
        np.testing.assert_allclose(sum_rate(H, 2.0, params).per_user_rates, bound, rtol=1e-9)

    def test_two_orthogonal_users_add_up(self, rng):
        params = aqnm_params(3)
        h1, h2 = _virtual((0, 1), 2.0, rng=rng), _virtual((5, 9), 7.0, rng=rng)
        pair = sum_rate(np.column_stack([h1, h2]), 4.0, params).sum_rate
        assert pair == pytest.approx(user_rate(h1, 0, 4.0, params) + user_rate(h2, 0, 4.0, params))

    def test_support_overlap_never_helps(self, rng):
        params = {bits: aqnm_params(bits) for bits in (1, 2, 3, 4)}
        for _ in range(1000):
            sizes = rng.integers(2, 5, size=2)
            beams = rng.permutation(16)
            support_1, support_2 = beams[: sizes[0]], beams[sizes[0]: sizes[0] + sizes[1]]
            h1 = _virtual(support_1, rng.uniform(0.5, 20.0), rng=rng)
            h2 = _virtual(support_2, rng.uniform(0.5, 20.0), rng=rng)
            rho, aqnm = rng.uniform(0.1, 10.0), params[int(rng.integers(1, 5))]

            moved = h2.copy()
            target = support_1[rng.integers(sizes[0])]
            moved[target], moved[support_2[0]] = h2[support_2[0]], 0.0

            disjoint = sum_rate(np.column_stack([h1, h2]), rho, aqnm).sum_rate
            overlapping = sum_rate(np.column_stack([h1, moved]), rho, aqnm).sum_rate
            assert overlapping <= disjoint * (1 + 1e-3)


class TestApproxSinr:
    """Test cases for the approximate SINR."""

    def test_single_user_identity(self, beamspace_channels):
        for k, bits in zip(range(6), (1, 2, 3, 4, 6, 9)):
            h = beamspace_channels[:, k]
            params = aqnm_params(bits)
            assert approx_sinr(h, 0, 3.0, params) == pytest.approx(user_sinrs(h, 3.0, params)[0], rel=1e-10)

    def test_formula(self, beamspace_channels):
        H = beamspace_channels[:, :3]
        rho, params = 2.0, aqnm_params(2)
        h = H[:, 1]
        D = rho * row_gains(H) + 1 / (1 - params.alpha)
        expected = params.alpha * rho * np.sum(np.abs(h) ** 2) ** 2 / (
            (1 - params.alpha) * np.sum(D * np.abs(h) ** 2)
        )
        assert approx_sinr(H, 1, rho, params) == pytest.approx(expected)

    def test_batch_matches_scalar(self, beamspace_channels):
        rho, params = 5.0, aqnm_params(2)
        selected = beamspace_channels[:, :2]
        candidates = beamspace_channels[:, 2:7]
        batch = approx_sinr_batch(selected, candidates, rho, params)
        for j in range(candidates.shape[1]):
            stacked = np.column_stack([selected, candidates[:, j]])
            assert batch[j] == pytest.approx(approx_sinr(stacked, 2, rho, params))

    def test_batch_with_nothing_selected(self, beamspace_channels):
        rho, params = 1.0, aqnm_params(3)
        batch = approx_sinr_batch(np.zeros((16, 0)), beamspace_channels, rho, params)
        for k in range(beamspace_channels.shape[1]):
            assert batch[k] == pytest.approx(approx_sinr(beamspace_channels[:, k], 0, rho, params))

    def test_ideal_resolution_is_infinite(self, beamspace_channels):
        assert approx_sinr(beamspace_channels, 0, 1.0, aqnm_params(None)) == float("inf")

    def test_zero_column(self):
        with pytest.raises(DomainError, match="all zero"):
            approx_sinr(np.zeros((4, 1)), 0, 1.0, aqnm_params(2))
