"""
Property and acceptance checks behind ``mmwave-sched verify``.

The fast checks compare the rate expressions with their closed forms and
the schedulers with the exhaustive oracle on small instances. The full
checks run desk-scale sweeps and test the expected algorithm ordering.
"""

import inspect
import time
from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, List, Tuple

import numpy as np
from loguru import logger

from .channel import dft_codebook, draw_channel_matrix, make_virtual_channel, to_beamspace
from .harness import FULL_SCALE_CONFIG, candidate_size_profile, figure_preset, run_sweep, summarize
from .models import SchedulerId, SystemConfig, VirtualChannelSpec
from .quantize import (
    aqnm_params,
    empirical_distortion,
    empirical_quantization_noise,
    quantization_covariance,
)
from .rates import (
    approx_sinr,
    closed_form_single_user_rate,
    rate_limit_infinite_power,
    sum_rate,
    user_rate,
    user_sinrs,
)
from .schedulers import run_scheduler, schedule_exhaustive
from .utils import derive_rng

CheckOutcome = Tuple[bool, str]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification check."""
    name: str
    passed: bool
    detail: str
    seconds: float


def _relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), np.finfo(float).tiny)


def check_closed_form_agreement(seed: int = 0, cases: int = 1000) -> CheckOutcome:
    """Exact single-user rate of equal-spread virtual channels vs the closed form."""
    rng = derive_rng(seed, 1)
    num_antennas = 16
    worst = 0.0
    for _ in range(cases):
        L = int(rng.integers(1, 9))
        gamma = float(10.0 ** rng.uniform(-2, 3))
        rho = float(10.0 ** rng.uniform(-1, 2))
        params = aqnm_params(int(rng.integers(1, 10)))
        support = tuple(rng.choice(num_antennas, size=L, replace=False))
        h_b = make_virtual_channel(VirtualChannelSpec(support, gamma, num_antennas), rng)
        exact = user_rate(h_b, 0, rho, params)
        expected = closed_form_single_user_rate(gamma, L, rho, params.alpha)
        worst = max(worst, _relative_error(exact, expected))
    return worst < 1e-9, f"max relative error {worst:.2e} over {cases} channels"


def check_infinite_power_limit() -> CheckOutcome:
    """Single-user rate at gamma = 1e6 approaches log2(1 + alpha L / (1 - alpha))."""
    L, num_antennas, rho = 4, 16, 1.0
    h_b = make_virtual_channel(VirtualChannelSpec(tuple(range(L)), 1e6, num_antennas))
    errors = []
    for bits in (1, 2, 3):
        params = aqnm_params(bits)
        limit = rate_limit_infinite_power(L, params.alpha)
        errors.append(_relative_error(user_rate(h_b, 0, rho, params), limit))
    worst = max(errors)
    return worst < 0.01, f"max relative gap to the limit {worst:.2e} (b = 1, 2, 3)"


def check_equal_spread_optimal(step_divisions: int = 20) -> CheckOutcome:
    """No power allocation on the discretized simplex beats the equal spread."""
    L, num_antennas, gamma, rho = 4, 16, 10.0, 1.0
    params = aqnm_params(2)
    equal = closed_form_single_user_rate(gamma, L, rho, params.alpha)

    best_excess = -np.inf
    allocations = 0
    for parts in product(range(step_divisions + 1), repeat=L - 1):
        last = step_divisions - sum(parts)
        if last < 0:
            continue
        powers = gamma * np.array(parts + (last,), dtype=float) / step_divisions
        h_b = np.zeros(num_antennas, dtype=complex)
        h_b[:L] = np.sqrt(powers)
        best_excess = max(best_excess, user_rate(h_b, 0, rho, params) - equal)
        allocations += 1
    return best_excess <= 1e-9, f"largest excess over equal spread {best_excess:.2e} ({allocations} allocations)"


def check_disjoint_support_bound(seed: int = 0) -> CheckOutcome:
    """Users with disjoint supports, equal spread and norm reach the per-user bound."""
    rng = derive_rng(seed, 4)
    L, num_antennas, gamma, rho = 4, 16, 5.0, 2.0
    params = aqnm_params(2)
    supports = np.arange(3 * L).reshape(3, L)
    H_b = np.column_stack(
        [make_virtual_channel(VirtualChannelSpec(tuple(s), gamma, num_antennas), rng) for s in supports]
    )
    bound = closed_form_single_user_rate(gamma, L, rho, params.alpha)
    rates = sum_rate(H_b, rho, params).per_user_rates
    worst = max(_relative_error(r, bound) for r in rates)
    return worst < 1e-9, f"max relative error {worst:.2e} against bound {bound:.6f}"


def check_single_user_sinr_identity(seed: int = 0, cases: int = 1000) -> CheckOutcome:
    """Approximate SINR equals the exact SINR for a single user."""
    rng = derive_rng(seed, 5)
    cfg = SystemConfig(num_antennas=16, num_users=cases, num_scheduled=1, num_paths=4, num_stored_beams=8)
    H_b = to_beamspace(draw_channel_matrix(rng, cfg), dft_codebook(cfg.num_antennas))
    worst = 0.0
    for k in range(cases):
        rho = float(10.0 ** rng.uniform(-1, 2))
        params = aqnm_params(int(rng.integers(1, 10)))
        h = H_b[:, k]
        worst = max(worst, _relative_error(approx_sinr(h, 0, rho, params), user_sinrs(h, rho, params)[0]))
    return worst < 1e-10, f"max relative error {worst:.2e} over {cases} channels"


def check_oracle_near_optimality(seed: int = 0, instances: int = 200) -> CheckOutcome:
    """Greedy and CSS sum rates relative to the exhaustive optimum on tiny instances."""
    cfg = SystemConfig(
        num_antennas=16,
        num_users=8,
        num_scheduled=3,
        num_paths=4,
        num_stored_beams=8,
        ortho_threshold=1.0,
        beam_overlap_limit=8,
    ).with_power_db(10.0)
    params = aqnm_params(2)
    codebook = dft_codebook(cfg.num_antennas)
    totals = {SchedulerId.GREEDY: 0.0, SchedulerId.CSS: 0.0, SchedulerId.EXHAUSTIVE: 0.0}
    for trial in range(instances):
        H_b = to_beamspace(draw_channel_matrix(derive_rng(seed, 6, trial), cfg), codebook)
        totals[SchedulerId.EXHAUSTIVE] += schedule_exhaustive(H_b, cfg, params).sum_rate
        for scheduler in (SchedulerId.GREEDY, SchedulerId.CSS):
            totals[scheduler] += run_scheduler(scheduler, H_b, cfg, params).sum_rate
    greedy = totals[SchedulerId.GREEDY] / totals[SchedulerId.EXHAUSTIVE]
    css = totals[SchedulerId.CSS] / totals[SchedulerId.EXHAUSTIVE]
    return greedy >= 0.95 and css >= 0.90, f"greedy {greedy:.1%}, CSS {css:.1%} of the optimum"


def check_aqnm_empirical(seed: int = 0, samples: int = 100_000) -> CheckOutcome:
    """Simulated quantizer distortion and noise covariance against the AQNM model."""
    distortion_errors = []
    for bits in (1, 2, 3):
        measured = empirical_distortion(bits, samples, derive_rng(seed, 10, bits))
        distortion_errors.append(_relative_error(measured, aqnm_params(bits).beta))

    cfg = SystemConfig(num_antennas=16, num_users=3, num_scheduled=3, num_paths=4, num_stored_beams=8)
    H_b = to_beamspace(draw_channel_matrix(derive_rng(seed, 10, 0), cfg), dft_codebook(cfg.num_antennas))
    noise_errors = []
    for bits, rho in product((2, 3), (1.0, 10.0)):
        measured = np.real(np.diag(
            empirical_quantization_noise(H_b, rho, bits, samples, derive_rng(seed, 11, bits, int(rho)))
        ))
        model = quantization_covariance(H_b, rho, aqnm_params(bits)).diagonal
        noise_errors.append(float(np.max(np.abs(measured - model) / model)))

    worst_distortion = max(distortion_errors)
    worst_noise = max(noise_errors)
    passed = worst_distortion < 0.02 and worst_noise < 0.10
    return passed, f"distortion error {worst_distortion:.2%}, R_qq diagonal error {worst_noise:.2%}"


def _mean_and_error(summary, algorithm: str, rho_db: float, bits: int) -> Tuple[float, float]:
    row = summary[
        (summary["algorithm"] == algorithm) & (summary["rho_db"] == rho_db) & (summary["bits"] == bits)
    ].iloc[0]
    return float(row["mean_sum_rate"]), float(row["std_error"])


def check_power_sweep_trend(seed: int = 0) -> CheckOutcome:
    """Desk-scale power sweep: greedy >= CSS >= SUS >= random, CSS close to greedy."""
    spec = replace(figure_preset("fig2-desk", seed), algorithms=("greedy", "css", "sus", "random"))
    summary = summarize(run_sweep(spec))
    order = ["greedy", "css", "sus", "random"]
    violations = []
    worst_css_gap = 0.0
    for rho_db in spec.rho_db_grid:
        stats = [_mean_and_error(summary, a, rho_db, 2) for a in order]
        for (upper, upper_err), (lower, lower_err), name in zip(stats, stats[1:], order):
            if upper + upper_err + lower_err < lower:
                violations.append(f"{name} below the next algorithm at {rho_db:g} dB")
        worst_css_gap = max(worst_css_gap, 1.0 - stats[1][0] / stats[0][0])

    css_20, _ = _mean_and_error(summary, "css", 20.0, 2)
    random_20, _ = _mean_and_error(summary, "random", 20.0, 2)
    gain = css_20 / random_20 - 1.0
    passed = not violations and worst_css_gap <= 0.05 and gain >= 0.12
    detail = f"CSS gap to greedy {worst_css_gap:.1%}, CSS gain over random at 20 dB {gain:.1%}"
    if violations:
        detail += "; " + "; ".join(violations)
    return passed, detail


def check_resolution_sweep_trend(seed: int = 0) -> CheckOutcome:
    """Desk-scale resolution sweep: the CSS-SUS gap shrinks as resolution grows."""
    spec = replace(figure_preset("fig3-desk", seed), algorithms=("css", "sus"))
    summary = summarize(run_sweep(spec))

    def relative_gap(bits: int) -> float:
        css, _ = _mean_and_error(summary, "css", 5.0, bits)
        sus, _ = _mean_and_error(summary, "sus", 5.0, bits)
        return (css - sus) / css

    gap_2, gap_8 = relative_gap(2), relative_gap(8)
    return gap_8 < 0.02 and gap_2 > gap_8, f"CSS-SUS gap {gap_2:.2%} at b=2, {gap_8:.2%} at b=8"


def check_candidate_set_shrinkage(seed: int = 0) -> CheckOutcome:
    """CSS candidate sets shrink at least as fast as SUS and faster than greedy."""
    spec = replace(figure_preset("fig4", seed), algorithms=("css", "sus", "greedy"))
    profile = candidate_size_profile(run_sweep(spec))
    sizes = {
        algorithm: dict(zip(group["stage"], group["mean_size"]))
        for algorithm, group in profile.groupby("algorithm")
    }
    num_users = FULL_SCALE_CONFIG.num_users
    problems = []
    # stage 1 always starts from every user
    for stage in sorted(set(sizes["css"]) & set(sizes["sus"])):
        if stage == 1:
            continue
        greedy_size = num_users - stage + 1
        css, sus = sizes["css"][stage], sizes["sus"][stage]
        if css > sus:
            problems.append(f"stage {stage}: CSS {css:.1f} > SUS {sus:.1f}")
        if max(css, sus) >= greedy_size:
            problems.append(f"stage {stage}: not below greedy's {greedy_size}")
    profile_text = ", ".join(f"{sizes['css'][s]:.1f}" for s in sorted(sizes["css"]))
    return not problems, "; ".join(problems) or f"CSS mean sizes per stage: {profile_text}"


FAST_CHECKS: List[Tuple[str, Callable[..., CheckOutcome]]] = [
    ("closed-form single-user rate", check_closed_form_agreement),
    ("infinite-power rate limit", check_infinite_power_limit),
    ("equal spread is optimal", check_equal_spread_optimal),
    ("disjoint-support rate bound", check_disjoint_support_bound),
    ("single-user SINR identity", check_single_user_sinr_identity),
    ("near-optimality vs exhaustive", check_oracle_near_optimality),
    ("AQNM empirical validation", check_aqnm_empirical),
]

FULL_CHECKS: List[Tuple[str, Callable[..., CheckOutcome]]] = [
    ("power sweep ordering", check_power_sweep_trend),
    ("resolution sweep convergence", check_resolution_sweep_trend),
    ("candidate-set shrinkage", check_candidate_set_shrinkage),
]


def _timed(name: str, check: Callable[..., CheckOutcome], seed: int) -> CheckResult:
    start = time.perf_counter()
    try:
        if "seed" in inspect.signature(check).parameters:
            passed, detail = check(seed=seed)
        else:
            passed, detail = check()
    except Exception as e:
        logger.error(f"Check '{name}' raised: {e}")
        passed, detail = False, f"error: {e}"
    seconds = time.perf_counter() - start
    logger.info(f"{'PASS' if passed else 'FAIL'} {name} ({seconds:.1f}s): {detail}")
    return CheckResult(name=name, passed=bool(passed), detail=detail, seconds=seconds)


def run_verification(full: bool = False, seed: int = 0) -> List[CheckResult]:
    """
    Run the verification checks.

    Args:
        full: Also run the sweep-based trend checks (minutes)
        seed: Master seed for every random draw

    Returns:
        One CheckResult per check, in order
    """
    checks = FAST_CHECKS + (FULL_CHECKS if full else [])
    return [_timed(name, check, seed) for name, check in checks]
