"""
Additive quantization noise model (AQNM) for low-resolution ADCs.

Provides the distortion factor beta per resolution, the quantization-noise
covariance used by the rate expressions, and an element-wise Lloyd-Max
quantizer for checking the linear model against actual quantization.
"""

from functools import lru_cache
from typing import Optional

import numpy as np
from loguru import logger
from scipy.special import ndtr
from scipy.stats import norm

from .exceptions import DomainError
from .models import AqnmParams, LloydMaxCodebook, QuantCovariance, QuantizedRxSample

# Largest resolution whose beta comes from the Lloyd-Max design; above it the
# high-resolution approximation is used.
TABLE_MAX_BITS = 5

LLOYD_MAX_TOLERANCE = 1e-12
LLOYD_MAX_MAX_ITERATIONS = 20000

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _check_bits(bits) -> int:
    if isinstance(bits, bool) or not isinstance(bits, (int, np.integer)) or bits < 1:
        raise DomainError(f"ADC resolution must be a positive integer (got {bits!r})")
    return int(bits)


@lru_cache(maxsize=None)
def lloyd_max_codebook(bits: int) -> LloydMaxCodebook:
    """
    Design the optimal b-bit scalar quantizer for a unit-variance Gaussian.

    Alternates the nearest-neighbour condition (thresholds at level midpoints)
    and the centroid condition (levels at conditional means) until the mean
    squared distortion changes by less than LLOYD_MAX_TOLERANCE. Results are
    cached per resolution.

    Args:
        bits: Resolution b per real component (2**b levels)

    Returns:
        LloydMaxCodebook
    """
    bits = _check_bits(bits)
    num_levels = 2 ** bits

    # equiprobable cells as a starting point
    thresholds = norm.ppf(np.arange(1, num_levels) / num_levels)
    distortion = np.inf
    converged = False
    iteration = 0
    levels = np.zeros(num_levels)

    for iteration in range(1, LLOYD_MAX_MAX_ITERATIONS + 1):
        edges = np.concatenate(([-np.inf], thresholds, [np.inf]))
        density = _INV_SQRT_2PI * np.exp(-0.5 * np.square(edges))
        probability = np.diff(ndtr(edges))
        levels = (density[:-1] - density[1:]) / probability
        new_distortion = 1.0 - float(np.sum(probability * np.square(levels)))
        thresholds = 0.5 * (levels[:-1] + levels[1:])
        if abs(distortion - new_distortion) < LLOYD_MAX_TOLERANCE:
            distortion = new_distortion
            converged = True
            break
        distortion = new_distortion

    if not converged:
        logger.warning(
            f"Lloyd-Max design for b={bits} stopped after {iteration} iterations "
            f"(distortion {distortion:.6e})"
        )
    logger.debug(f"Lloyd-Max b={bits}: distortion {distortion:.10f} after {iteration} iterations")

    return LloydMaxCodebook(
        bits=bits,
        levels=levels,
        thresholds=thresholds,
        distortion=distortion,
        iterations=iteration,
        converged=converged,
    )


def high_resolution_beta(bits: int) -> float:
    """Approximation beta = (pi sqrt(3) / 2) 2^(-2b)."""
    bits = _check_bits(bits)
    return float(np.pi * np.sqrt(3.0) / 2.0 * 2.0 ** (-2 * bits))


def beta_for_bits(bits: int) -> float:
    """
    Normalised mean squared quantization error of a b-bit MMSE quantizer.

    Args:
        bits: Resolution b per real component

    Returns:
        beta in (0, 1)
    """
    bits = _check_bits(bits)
    if bits <= TABLE_MAX_BITS:
        return lloyd_max_codebook(bits).distortion
    return high_resolution_beta(bits)


def aqnm_params(bits: Optional[int]) -> AqnmParams:
    """AQNM parameters for a resolution; None means infinite resolution."""
    if bits is None:
        return AqnmParams.ideal()
    bits = _check_bits(bits)
    return AqnmParams(bits=bits, beta=beta_for_bits(bits))


def quantization_covariance(H_b: np.ndarray, rho: float, params: AqnmParams) -> QuantCovariance:
    """
    Diagonal of R_qq = alpha beta diag(rho H_b H_b^H + I).

    Args:
        H_b: Beamspace channel matrix (N_r x K) or a single column
        rho: Linear transmit power (unit noise variance)
        params: AQNM parameters

    Returns:
        QuantCovariance
    """
    if rho < 0:
        raise DomainError(f"Transmit power must be non-negative (got {rho})")
    H_b = np.asarray(H_b)
    power = np.square(np.abs(H_b))
    row_gain = power.sum(axis=1) if H_b.ndim == 2 else power
    return QuantCovariance(diagonal=params.alpha * params.beta * (rho * row_gain + 1.0))


def simulate_quantizer(y: np.ndarray, bits: int, input_variance) -> QuantizedRxSample:
    """
    Quantize real and imaginary parts with the scaled Lloyd-Max codebook.

    Args:
        y: Complex analog samples (any shape)
        bits: Resolution per real component
        input_variance: Variance of each real component, scalar or
            broadcastable to y

    Returns:
        QuantizedRxSample
    """
    variance = np.asarray(input_variance, dtype=float)
    if np.any(variance <= 0):
        raise DomainError("input_variance must be positive")
    codebook = lloyd_max_codebook(bits)
    sigma = np.sqrt(variance)
    y = np.asarray(y, dtype=complex)

    def quantize_component(x):
        cell = np.searchsorted(codebook.thresholds, x / sigma)
        return codebook.levels[cell] * sigma

    quantized = quantize_component(y.real) + 1j * quantize_component(y.imag)
    return QuantizedRxSample(analog=y, quantized=quantized)


def empirical_distortion(bits: int, num_samples: int, rng: np.random.Generator) -> float:
    """Monte Carlo E|y - y_q|^2 / E|y|^2 for CN(0, 1) input."""
    y = (rng.standard_normal(num_samples) + 1j * rng.standard_normal(num_samples)) / np.sqrt(2.0)
    return simulate_quantizer(y, bits, 0.5).distortion()


def empirical_quantization_noise(
    H_b: np.ndarray,
    rho: float,
    bits: int,
    num_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Sample covariance of q = y_q - alpha y for y = sqrt(rho) H_b s + eta.

    Symbols s and noise eta are CN(0, I); each ADC is matched to the true
    variance of its input.

    Returns:
        N_r x N_r empirical covariance of q
    """
    H_b = np.atleast_2d(np.asarray(H_b, dtype=complex).T).T
    num_rf, num_users = H_b.shape

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    y = np.sqrt(rho) * (H_b @ cn(num_users, num_samples)) + cn(num_rf, num_samples)
    component_variance = 0.5 * (rho * np.sum(np.abs(H_b) ** 2, axis=1) + 1.0)
    sample = simulate_quantizer(y, bits, component_variance[:, None])
    q = sample.quantized - aqnm_params(bits).alpha * y
    return (q @ q.conj().T) / num_samples
