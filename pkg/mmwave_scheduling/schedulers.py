"""
User scheduling algorithms for the low-resolution ADC uplink.

Every scheduler takes the beamspace channels of all candidate users as an
N_r x N_u matrix and returns a ScheduleTrace. User indices are column
indices; argmax ties always go to the lowest index.
"""

import math
from dataclasses import replace
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence

import numpy as np
from loguru import logger

from .channel import dominant_beam_sets
from .exceptions import CombinatorialLimitError, DomainError, SingularChannelError
from .models import (
    AqnmParams,
    OrthoBasis,
    RateReport,
    ScheduleTrace,
    SchedulerId,
    SystemConfig,
)
from .rates import approx_sinr_batch, sum_rate

# Largest number of subsets the exhaustive oracle will enumerate
MAX_EXHAUSTIVE_SUBSETS = 10 ** 6


def _check_channels(H_b_all: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    H = np.asarray(H_b_all, dtype=complex)
    if H.ndim != 2 or H.shape[1] == 0:
        raise DomainError("Scheduling needs at least one candidate user channel")
    if H.shape[0] != cfg.num_antennas:
        raise DomainError(
            f"Channel matrix has {H.shape[0]} rows but the system has {cfg.num_antennas} antennas"
        )
    return H


def _rate_report(H: np.ndarray, selected: Sequence[int], cfg: SystemConfig, params: AqnmParams) -> RateReport:
    if not selected:
        return RateReport.empty()
    return sum_rate(H[:, list(selected)], cfg.transmit_power, params)


def _finish(
    algorithm: SchedulerId,
    H: np.ndarray,
    selected: List[int],
    candidate_sizes: List[int],
    cfg: SystemConfig,
    params: AqnmParams,
    evaluations: int,
    stage_scores=(),
    basis: Optional[OrthoBasis] = None,
) -> ScheduleTrace:
    wanted = min(cfg.num_scheduled, H.shape[1])
    if len(selected) < wanted:
        logger.warning(
            f"{algorithm.label} scheduled {len(selected)} of {cfg.num_scheduled} users; "
            f"candidate set exhausted"
        )
    return ScheduleTrace(
        algorithm_id=algorithm,
        selected=tuple(selected),
        candidate_sizes=tuple(candidate_sizes),
        rate_report=_rate_report(H, selected, cfg, params),
        evaluations=evaluations,
        stage_scores=tuple(stage_scores),
        basis=basis,
    )


def _semi_orthogonal(
    f: np.ndarray, H: np.ndarray, candidates: List[int], norms: np.ndarray, epsilon: float
) -> List[int]:
    """Candidates whose cosine similarity with f is below epsilon."""
    if not candidates:
        return []
    f_norm = np.linalg.norm(f)
    if f_norm == 0:
        return []
    cosine = np.abs(f.conj() @ H[:, candidates]) / (f_norm * norms[candidates])
    return [k for k, c in zip(candidates, cosine) if c < epsilon]


def schedule_css(
    H_b_all: np.ndarray,
    cfg: SystemConfig,
    params: AqnmParams,
    beam_sets: Optional[List[FrozenSet[int]]] = None,
) -> ScheduleTrace:
    """
    Channel structure-based scheduling.

    Each stage picks the candidate with the largest approximate SINR when
    appended to the users already selected, takes the component of its
    channel orthogonal to the previous selections, and then keeps only the
    candidates that are semi-orthogonal to that component (cosine below
    epsilon) and share at most N_OL dominant beams with the new user. Stops
    after N_s users or when no candidate is left, so fewer than N_s users
    may be returned.

    Args:
        H_b_all: Beamspace channels of all users (N_r x N_u)
        cfg: System configuration (rho, epsilon, N_b, N_OL, N_s)
        params: AQNM parameters
        beam_sets: Precomputed dominant-beam sets, one per user

    Returns:
        ScheduleTrace with per-stage candidate-set sizes and scores
    """
    H = _check_channels(H_b_all, cfg)
    rho = cfg.transmit_power
    beams = beam_sets if beam_sets is not None else dominant_beam_sets(H, cfg.num_stored_beams)
    norms = np.linalg.norm(H, axis=0)

    candidates = list(range(H.shape[1]))
    selected: List[int] = []
    candidate_sizes: List[int] = []
    stage_scores: List[Dict[int, float]] = []
    basis = OrthoBasis()
    evaluations = 0

    while len(selected) < cfg.num_scheduled and candidates:
        candidate_sizes.append(len(candidates))
        scores = approx_sinr_batch(H[:, selected], H[:, candidates], rho, params)
        evaluations += len(candidates)
        stage_scores.append({k: float(s) for k, s in zip(candidates, scores)})

        chosen = candidates[int(np.argmax(scores))]
        candidates.remove(chosen)
        selected.append(chosen)

        f = basis.residual(H[:, chosen])
        basis = basis.extended(f)

        candidates = _semi_orthogonal(f, H, candidates, norms, cfg.ortho_threshold)
        candidates = [
            k for k in candidates if len(beams[chosen] & beams[k]) <= cfg.beam_overlap_limit
        ]
        logger.debug(
            f"CSS stage {len(selected)}: selected user {chosen}, {len(candidates)} candidates remain"
        )

    return _finish(
        SchedulerId.CSS, H, selected, candidate_sizes, cfg, params, evaluations, stage_scores, basis
    )


def schedule_greedy(H_b_all: np.ndarray, cfg: SystemConfig, params: AqnmParams) -> ScheduleTrace:
    """
    Greedy sum-rate scheduling.

    At every stage adds the user that maximises the exact zero-forcing sum
    rate of the enlarged set. A candidate that would make the channel matrix
    rank deficient scores -inf and is skipped.
    """
    H = _check_channels(H_b_all, cfg)
    rho = cfg.transmit_power
    candidates = list(range(H.shape[1]))
    selected: List[int] = []
    candidate_sizes: List[int] = []
    stage_scores: List[Dict[int, float]] = []
    evaluations = 0

    for _ in range(min(cfg.num_scheduled, H.shape[1])):
        candidate_sizes.append(len(candidates))
        scores: Dict[int, float] = {}
        for k in candidates:
            try:
                scores[k] = sum_rate(H[:, selected + [k]], rho, params).sum_rate
            except SingularChannelError:
                logger.debug(f"Greedy: user {k} is colinear with {selected}; skipped")
                scores[k] = float("-inf")
        evaluations += len(candidates) * (len(selected) + 1)
        stage_scores.append(scores)

        chosen = max(candidates, key=lambda k: (scores[k], -k))
        if scores[chosen] == float("-inf"):
            logger.warning(f"Greedy: every remaining candidate is colinear with {selected}")
            break
        candidates.remove(chosen)
        selected.append(chosen)
        logger.debug(f"Greedy stage {len(selected)}: selected user {chosen} ({scores[chosen]:.4f})")

    return _finish(
        SchedulerId.GREEDY, H, selected, candidate_sizes, cfg, params, evaluations, stage_scores
    )


def schedule_sus(H_b_all: np.ndarray, cfg: SystemConfig, params: Optional[AqnmParams] = None) -> ScheduleTrace:
    """
    Semi-orthogonal user selection.

    Selects the candidate whose channel component orthogonal to the span of
    the selected channels has the largest norm, then keeps the candidates
    whose cosine with that component is below epsilon. Quantization is
    ignored in the selection; params only set the reported rates.
    """
    H = _check_channels(H_b_all, cfg)
    params = params or AqnmParams.ideal()
    norms = np.linalg.norm(H, axis=0)

    candidates = list(range(H.shape[1]))
    selected: List[int] = []
    candidate_sizes: List[int] = []
    basis = OrthoBasis()
    orthonormal = np.zeros((H.shape[0], 0), dtype=complex)
    evaluations = 0

    while len(selected) < cfg.num_scheduled and candidates:
        candidate_sizes.append(len(candidates))
        block = H[:, candidates]
        residual = block - orthonormal @ (orthonormal.conj().T @ block)
        residual_norms = np.linalg.norm(residual, axis=0)
        evaluations += len(candidates)

        position = int(np.argmax(residual_norms))
        chosen = candidates[position]
        f = residual[:, position]
        if residual_norms[position] == 0:
            logger.warning("SUS: remaining candidates lie in the span of the selected users")
            break

        candidates.remove(chosen)
        selected.append(chosen)
        basis = basis.extended(f)
        orthonormal = np.column_stack([orthonormal, f / residual_norms[position]])

        candidates = _semi_orthogonal(f, H, candidates, norms, cfg.ortho_threshold)
        logger.debug(
            f"SUS stage {len(selected)}: selected user {chosen}, {len(candidates)} candidates remain"
        )

    return _finish(SchedulerId.SUS, H, selected, candidate_sizes, cfg, params, evaluations, basis=basis)


def schedule_beam_select(
    H_b_all: np.ndarray,
    cfg: SystemConfig,
    params: Optional[AqnmParams] = None,
    beam_sets: Optional[List[FrozenSet[int]]] = None,
) -> ScheduleTrace:
    """
    Beam-selection scheduling (variant).

    Repeatedly picks the candidate with the strongest single beamspace
    entry and drops candidates whose N_b dominant beams overlap the pick in
    more than N_OL indices. Quantization-blind.
    """
    H = _check_channels(H_b_all, cfg)
    params = params or AqnmParams.ideal()
    beams = beam_sets if beam_sets is not None else dominant_beam_sets(H, cfg.num_stored_beams)
    peak = np.max(np.abs(H), axis=0)

    candidates = list(range(H.shape[1]))
    selected: List[int] = []
    candidate_sizes: List[int] = []
    evaluations = 0

    while len(selected) < cfg.num_scheduled and candidates:
        candidate_sizes.append(len(candidates))
        evaluations += len(candidates)
        chosen = candidates[int(np.argmax(peak[candidates]))]
        candidates.remove(chosen)
        selected.append(chosen)
        candidates = [
            k for k in candidates if len(beams[chosen] & beams[k]) <= cfg.beam_overlap_limit
        ]

    return _finish(SchedulerId.BEAM_SELECT, H, selected, candidate_sizes, cfg, params, evaluations)


def schedule_random(rng: np.random.Generator, num_users: int, num_scheduled: int) -> ScheduleTrace:
    """
    Uniformly random set of N_s distinct users.

    The returned trace carries no rate report; see attach_rates.
    """
    if num_scheduled > num_users:
        raise DomainError(f"Cannot schedule {num_scheduled} of {num_users} users")
    if num_scheduled < 1:
        raise DomainError("num_scheduled must be positive")
    selected = tuple(int(k) for k in rng.choice(num_users, size=num_scheduled, replace=False))
    return ScheduleTrace(
        algorithm_id=SchedulerId.RANDOM,
        selected=selected,
        candidate_sizes=tuple(num_users - i for i in range(num_scheduled)),
    )


def schedule_exhaustive(
    H_b_all: np.ndarray,
    cfg: SystemConfig,
    params: AqnmParams,
    max_subsets: int = MAX_EXHAUSTIVE_SUBSETS,
) -> ScheduleTrace:
    """
    Best N_s-subset by full enumeration of the exact sum rate.

    Raises:
        CombinatorialLimitError: C(N_u, N_s) exceeds max_subsets
    """
    H = _check_channels(H_b_all, cfg)
    num_users, num_scheduled = H.shape[1], cfg.num_scheduled
    if num_scheduled > num_users:
        raise DomainError(f"Cannot schedule {num_scheduled} of {num_users} users")
    count = math.comb(num_users, num_scheduled)
    if count > max_subsets:
        raise CombinatorialLimitError(
            f"Exhaustive search over C({num_users}, {num_scheduled}) = {count} subsets "
            f"exceeds the limit of {max_subsets}"
        )

    best_value = float("-inf")
    best_subset: Sequence[int] = ()
    for subset in combinations(range(num_users), num_scheduled):
        try:
            value = sum_rate(H[:, list(subset)], cfg.transmit_power, params).sum_rate
        except SingularChannelError:
            continue
        if value > best_value:
            best_value, best_subset = value, subset

    logger.debug(f"Exhaustive search over {count} subsets: best {best_subset} ({best_value:.4f})")
    return _finish(
        SchedulerId.EXHAUSTIVE, H, list(best_subset), [count], cfg, params, count * num_scheduled
    )


def attach_rates(trace: ScheduleTrace, H_b_all: np.ndarray, cfg: SystemConfig, params: AqnmParams) -> ScheduleTrace:
    """Copy of the trace with the rate report of its selection."""
    H = np.asarray(H_b_all, dtype=complex)
    return replace(trace, rate_report=_rate_report(H, trace.selected, cfg, params))


def run_scheduler(
    scheduler,
    H_b_all: np.ndarray,
    cfg: SystemConfig,
    params: AqnmParams,
    rng: Optional[np.random.Generator] = None,
    beam_sets: Optional[List[FrozenSet[int]]] = None,
) -> ScheduleTrace:
    """
    Run any scheduler by id and return a trace with its rate report.

    Args:
        scheduler: SchedulerId or its string value
        H_b_all: Beamspace channels of all users
        cfg: System configuration
        params: AQNM parameters
        rng: Random stream, required by the random scheduler
        beam_sets: Optional dominant-beam sets shared between schedulers
    """
    scheduler = SchedulerId.parse(scheduler)
    if scheduler is SchedulerId.CSS:
        return schedule_css(H_b_all, cfg, params, beam_sets)
    if scheduler is SchedulerId.GREEDY:
        return schedule_greedy(H_b_all, cfg, params)
    if scheduler is SchedulerId.SUS:
        return schedule_sus(H_b_all, cfg, params)
    if scheduler is SchedulerId.BEAM_SELECT:
        return schedule_beam_select(H_b_all, cfg, params, beam_sets)
    if scheduler is SchedulerId.EXHAUSTIVE:
        return schedule_exhaustive(H_b_all, cfg, params)
    if rng is None:
        raise DomainError("The random scheduler needs an rng")
    H = _check_channels(H_b_all, cfg)
    trace = schedule_random(rng, H.shape[1], min(cfg.num_scheduled, H.shape[1]))
    return attach_rates(trace, H, cfg, params)
