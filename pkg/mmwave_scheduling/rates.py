"""
Achievable rates of a zero-forcing receiver behind low-resolution ADCs.

All rates are in bits/s/Hz. Exact rates follow the AQNM zero-forcing SINR;
the approximate SINR drops the matrix inversion by assuming the combiner of
each user is its own normalised channel.
"""

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import DomainError, SingularChannelError
from .models import AqnmParams, RateReport, ZfCombiner
from .quantize import quantization_covariance

# Largest condition number of H_b accepted by the zero-forcing combiner
MAX_CONDITION_NUMBER = 1e10


def _as_matrix(H_b) -> np.ndarray:
    H_b = np.asarray(H_b, dtype=complex)
    if H_b.ndim == 1:
        return H_b[:, None]
    if H_b.ndim != 2:
        raise DomainError(f"Expected a vector or matrix, got shape {H_b.shape}")
    return H_b


def row_gains(H_b: np.ndarray) -> np.ndarray:
    """Aggregate gain ||[H_b]_{i,:}||^2 seen by each RF chain."""
    return np.sum(np.square(np.abs(_as_matrix(H_b))), axis=1)


def zf_combiner(H_b: np.ndarray) -> ZfCombiner:
    """
    Zero-forcing combiner W = H_b (H_b^H H_b)^{-1}.

    The Gram matrix is inverted through its Cholesky factor.

    Raises:
        SingularChannelError: H_b is rank deficient or its condition number
            exceeds MAX_CONDITION_NUMBER
    """
    H = _as_matrix(H_b)
    if H.shape[1] == 0:
        raise DomainError("Zero-forcing needs at least one user column")
    singular_values = np.linalg.svd(H, compute_uv=False)
    if (
        H.shape[1] > H.shape[0]
        or singular_values[0] == 0
        or singular_values[-1] <= singular_values[0] / MAX_CONDITION_NUMBER
    ):
        raise SingularChannelError(
            f"Beamspace channel of {H.shape[1]} users is rank deficient "
            f"(singular values {singular_values[-1]:.3e} .. {singular_values[0]:.3e})"
        )
    gram = H.conj().T @ H
    try:
        factor = cho_factor(gram, lower=True)
    except LinAlgError as e:
        raise SingularChannelError(f"Cholesky factorisation failed: {e}") from e
    # G^{-1} H^H = (H G^{-1})^H because G is Hermitian
    return ZfCombiner(columns=cho_solve(factor, H.conj().T).conj().T)


def user_sinrs(H_b: np.ndarray, rho: float, params: AqnmParams) -> np.ndarray:
    """
    Exact post-combining SINR of every user in H_b.

    SINR_k = alpha^2 rho / (w_k^H R_qq w_k + alpha^2 ||w_k||^2)
    """
    H = _as_matrix(H_b)
    W = zf_combiner(H).columns
    r_qq = quantization_covariance(H, rho, params).diagonal
    w_power = np.square(np.abs(W))
    alpha_sq = params.alpha ** 2
    denominator = r_qq @ w_power + alpha_sq * w_power.sum(axis=0)
    return alpha_sq * rho / denominator


def user_rate(H_b: np.ndarray, k: int, rho: float, params: AqnmParams) -> float:
    """
    Achievable rate of user k under AQNM with a zero-forcing combiner.

    Args:
        H_b: Beamspace channels of the scheduled users (N_r x N_s)
        k: Column index of the user
        rho: Linear transmit power
        params: AQNM parameters

    Returns:
        Rate in bits/s/Hz
    """
    H = _as_matrix(H_b)
    if not 0 <= k < H.shape[1]:
        raise DomainError(f"User index {k} out of range for {H.shape[1]} users")
    return float(np.log2(1.0 + user_sinrs(H, rho, params)[k]))


def sum_rate(H_b: np.ndarray, rho: float, params: AqnmParams) -> RateReport:
    """Per-user rates and their sum for the scheduled set."""
    H = _as_matrix(H_b)
    if H.shape[1] == 0:
        return RateReport.empty()
    return RateReport.from_rates(np.log2(1.0 + user_sinrs(H, rho, params)))


def approx_sinr(H_b_candidate: np.ndarray, k: int, rho: float, params: AqnmParams) -> float:
    """
    Approximate SINR of column k without inverting the Gram matrix.

    SINR_k ~ alpha rho ||h_k||^4 / ((1 - alpha) h_k^H D h_k),
    D = diag(rho H_b H_b^H + I / (1 - alpha)).

    Returns +inf when alpha = 1: there is no quantization noise and the
    approximation does not apply.
    """
    H = _as_matrix(H_b_candidate)
    h_power = np.square(np.abs(H[:, k]))
    gain = h_power.sum()
    if gain == 0:
        raise DomainError(f"Candidate column {k} is all zero")
    if params.is_ideal:
        return float("inf")
    one_minus_alpha = 1.0 - params.alpha
    d = rho * row_gains(H) + 1.0 / one_minus_alpha
    return float(params.alpha * rho * gain ** 2 / (one_minus_alpha * (d @ h_power)))


def approx_sinr_batch(
    H_selected: np.ndarray, H_candidates: np.ndarray, rho: float, params: AqnmParams
) -> np.ndarray:
    """
    approx_sinr of each candidate appended to the selected users.

    Entry j equals approx_sinr([H_selected, H_candidates[:, j]], last, ...).

    Args:
        H_selected: Already scheduled users (N_r x |S|), may have no columns
        H_candidates: Candidate users (N_r x |U|)
        rho: Linear transmit power
        params: AQNM parameters

    Returns:
        Array of |U| approximate SINRs
    """
    P = np.square(np.abs(_as_matrix(H_candidates)))
    gains = P.sum(axis=0)
    if np.any(gains == 0):
        raise DomainError("Candidate set contains an all-zero channel")
    if params.is_ideal:
        return np.full(P.shape[1], np.inf)
    one_minus_alpha = 1.0 - params.alpha
    selected = np.asarray(H_selected)
    selected_gain = row_gains(selected) if selected.size else np.zeros(P.shape[0])
    base = rho * selected_gain + 1.0 / one_minus_alpha
    quadratic = base @ P + rho * np.sum(np.square(P), axis=0)
    return params.alpha * rho * np.square(gains) / (one_minus_alpha * quadratic)


def closed_form_single_user_rate(gamma: float, L: int, rho: float, alpha: float) -> float:
    """
    Rate of an equal-spread channel with squared norm gamma over L beams.

    log2(1 + alpha rho / ((1 - alpha) rho / L + 1 / gamma)). The same value
    bounds every user's rate when scheduled users have disjoint supports.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    if L < 1:
        raise DomainError("L must be at least 1")
    return float(np.log2(1.0 + alpha * rho / ((1.0 - alpha) * rho / L + 1.0 / gamma)))


def rate_limit_infinite_power(L: int, alpha: float) -> float:
    """
    Limit of the equal-spread single-user rate as the channel gain grows.

    log2(1 + alpha L / (1 - alpha)); +inf when alpha = 1 (no quantization).
    """
    if L < 1:
        raise DomainError("L must be at least 1")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1] (got {alpha})")
    if alpha == 1.0:
        return float("inf")
    return float(np.log2(1.0 + alpha * L / (1.0 - alpha)))
