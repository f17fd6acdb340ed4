"""Geometric mmWave channels, the DFT beamspace and on-grid virtual channels."""

from typing import FrozenSet, List, Optional, Union

import numpy as np
from loguru import logger

from .exceptions import DimensionMismatchError, DomainError
from .models import Spread, SteeringMatrix, SystemConfig, UserChannel, VirtualChannelSpec

ANGLE_TOLERANCE = 1e-12


def steering_from_spatial(vartheta, num_antennas: int) -> np.ndarray:
    """
    ULA response for normalised spatial angle(s).

    Args:
        vartheta: Spatial angle (d/lambda) sin(theta), scalar or 1-D array
        num_antennas: Number of array elements N_r

    Returns:
        Vector of length N_r, or an N_r x len(vartheta) matrix
    """
    if num_antennas < 1:
        raise DomainError(f"num_antennas must be positive (got {num_antennas})")
    m = np.arange(num_antennas)
    phase = -2j * np.pi * np.multiply.outer(m, np.asarray(vartheta, dtype=float))
    return np.exp(phase) / np.sqrt(num_antennas)


def steering_vector(theta: float, num_antennas: int, d_over_lambda: float = 0.5) -> np.ndarray:
    """
    Array steering vector a(theta) of a uniform linear array.

    Args:
        theta: Angle of arrival in radians, within [-pi/2, pi/2]
        num_antennas: Number of array elements N_r
        d_over_lambda: Element spacing in wavelengths

    Returns:
        Unit-norm complex vector of length N_r
    """
    theta = float(theta)
    if not -np.pi / 2 - ANGLE_TOLERANCE <= theta <= np.pi / 2 + ANGLE_TOLERANCE:
        raise DomainError(f"Angle of arrival {theta} rad lies outside [-pi/2, pi/2]")
    return steering_from_spatial(d_over_lambda * np.sin(theta), num_antennas)


def dft_codebook(num_antennas: int) -> SteeringMatrix:
    """Steering vectors at spatial angles (i - 1)/N_r; a unitary DFT matrix."""
    grid = np.arange(num_antennas) / num_antennas
    return SteeringMatrix(columns=steering_from_spatial(grid, num_antennas))


def _complex_gaussian(rng: np.random.Generator, size) -> np.ndarray:
    # CN(0, 1): variance 1/2 per real component
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def _antenna_vector(gains, angles, num_antennas, d_over_lambda) -> np.ndarray:
    steering = steering_from_spatial(d_over_lambda * np.sin(angles), num_antennas)
    return np.sqrt(num_antennas / len(gains)) * (steering @ gains)


def draw_user_channel(
    rng: np.random.Generator,
    num_antennas: int,
    num_paths: int,
    d_over_lambda: float = 0.5,
    gains: Optional[np.ndarray] = None,
    angles: Optional[np.ndarray] = None,
) -> UserChannel:
    """
    Draw one user's L-path channel h = sqrt(N_r/L) sum_l w_l a(theta_l).

    Gains are IID CN(0, 1) and angles IID uniform on [-pi/2, pi/2] (off-grid).
    Either may be forced for deterministic construction.

    Args:
        rng: Seeded numpy Generator
        num_antennas: N_r
        num_paths: L
        d_over_lambda: Element spacing in wavelengths
        gains: Optional fixed path gains (length L)
        angles: Optional fixed angles of arrival (length L)

    Returns:
        UserChannel
    """
    if num_paths < 1:
        raise DomainError(f"num_paths must be positive (got {num_paths})")
    gains = _complex_gaussian(rng, num_paths) if gains is None else np.asarray(gains, dtype=complex)
    angles = (
        rng.uniform(-np.pi / 2, np.pi / 2, num_paths)
        if angles is None
        else np.asarray(angles, dtype=float)
    )
    if len(gains) != num_paths or len(angles) != num_paths:
        raise DimensionMismatchError("gains and angles must both have num_paths entries")
    if np.any(np.abs(angles) > np.pi / 2 + ANGLE_TOLERANCE):
        raise DomainError("Angles of arrival must lie within [-pi/2, pi/2]")

    return UserChannel(
        path_gains=gains,
        path_angles=angles,
        antenna_vector=_antenna_vector(gains, angles, num_antennas, d_over_lambda),
    )


def draw_on_grid_user_channel(
    rng: np.random.Generator,
    num_antennas: int,
    num_paths: int,
    d_over_lambda: float = 0.5,
) -> UserChannel:
    """
    Draw a user channel whose L paths sit exactly on distinct DFT grid angles.

    Its beamspace vector has one nonzero entry per path.
    """
    if num_paths > num_antennas:
        raise DomainError("num_paths cannot exceed num_antennas for on-grid channels")
    indices = rng.choice(num_antennas, size=num_paths, replace=False)
    vartheta = indices / num_antennas
    # the response is 1-periodic in vartheta; fold into [-1/2, 1/2)
    vartheta = np.where(vartheta >= 0.5, vartheta - 1.0, vartheta)
    if np.any(np.abs(vartheta) > d_over_lambda):
        raise DomainError(
            f"Grid angles are not all reachable with d/lambda = {d_over_lambda}; use 0.5 or more"
        )
    angles = np.arcsin(vartheta / d_over_lambda)
    return draw_user_channel(rng, num_antennas, num_paths, d_over_lambda, angles=angles)


def draw_channel_matrix(
    rng: np.random.Generator, cfg: SystemConfig, on_grid: bool = False
) -> np.ndarray:
    """Antenna-domain channel matrix H (N_r x N_u) for every user of the cell."""
    draw = draw_on_grid_user_channel if on_grid else draw_user_channel
    columns = [
        draw(rng, cfg.num_antennas, cfg.num_paths, cfg.antenna_spacing_ratio).antenna_vector
        for _ in range(cfg.num_users)
    ]
    return np.column_stack(columns)


def normalize_channels(H: np.ndarray, gamma: float) -> np.ndarray:
    """Rescale every column to squared norm gamma (equal-norm setting)."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    norms = np.linalg.norm(H, axis=0)
    if np.any(norms == 0):
        raise DomainError("Cannot normalise an all-zero channel")
    return H * (np.sqrt(gamma) / norms)


def to_beamspace(H: np.ndarray, A: Union[SteeringMatrix, np.ndarray]) -> np.ndarray:
    """
    Project channels onto the beamspace, H_b = A^H H.

    Args:
        H: Channel vector (N_r,) or matrix (N_r x K)
        A: DFT codebook

    Returns:
        Beamspace vector or matrix with the shape of H
    """
    columns = A.columns if isinstance(A, SteeringMatrix) else np.asarray(A)
    H = np.asarray(H)
    if columns.ndim != 2 or columns.shape[0] != H.shape[0]:
        raise DimensionMismatchError(
            f"Codebook with shape {columns.shape} cannot combine a channel with shape {H.shape}"
        )
    return columns.conj().T @ H


def make_virtual_channel(
    spec: VirtualChannelSpec, rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """
    Build a virtual beamspace channel with exactly L nonzeros on the support.

    Phases are uniform when an rng is given and zero otherwise; they do not
    affect single-user rates.
    """
    support = spec.support
    if len(support) != spec.num_paths:
        raise DomainError(f"Support has {len(support)} indices but L = {spec.num_paths}")
    if len(set(support)) != len(support):
        raise DomainError("Support indices must be distinct")
    if any(i < 0 or i >= spec.num_antennas for i in support):
        raise DomainError(f"Support indices must lie in [0, {spec.num_antennas - 1}]")
    if spec.gamma <= 0:
        raise DomainError("gamma must be positive")

    L = len(support)
    if spec.spread is Spread.EQUAL:
        powers = np.full(L, spec.gamma / L)
    elif spec.spread is Spread.SINGLE_BEAM:
        if L != 1:
            raise DomainError("single_beam spread requires a support of exactly one index")
        powers = np.array([spec.gamma])
    elif spec.spread is Spread.RANDOM_DIRICHLET:
        if rng is None:
            raise DomainError("random_dirichlet spread needs an rng")
        weights = rng.dirichlet(np.ones(L))
        powers = spec.gamma * weights / weights.sum()
    else:
        raise DomainError(f"Unknown spread {spec.spread!r}")

    phases = rng.uniform(0.0, 2 * np.pi, L) if rng is not None else np.zeros(L)
    h_b = np.zeros(spec.num_antennas, dtype=complex)
    h_b[list(support)] = np.sqrt(powers) * np.exp(1j * phases)
    return h_b


def dominant_beams(h_b: np.ndarray, num_beams: int) -> FrozenSet[int]:
    """
    Indices of the N_b largest-magnitude beamspace entries.

    Ties go to the lowest index.
    """
    h_b = np.asarray(h_b)
    if num_beams > h_b.shape[0]:
        raise DomainError(f"Cannot keep {num_beams} beams out of {h_b.shape[0]}")
    order = np.argsort(-np.abs(h_b), kind="stable")
    return frozenset(int(i) for i in order[:num_beams])


def dominant_beam_sets(H_b: np.ndarray, num_beams: int) -> List[FrozenSet[int]]:
    """dominant_beams for every column of H_b."""
    if num_beams > H_b.shape[0]:
        raise DomainError(f"Cannot keep {num_beams} beams out of {H_b.shape[0]}")
    order = np.argsort(-np.abs(H_b), axis=0, kind="stable")[:num_beams]
    sets = [frozenset(int(i) for i in order[:, k]) for k in range(H_b.shape[1])]
    logger.debug(f"Stored {num_beams} dominant beams for {len(sets)} users")
    return sets
