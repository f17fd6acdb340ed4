"""
Utility functions for mmWave scheduling tools.
"""

import hashlib

import numpy as np


def db_to_linear(value_db):
    """
    Convert a power ratio in dB to linear scale.

    Args:
        value_db: Value in dB (scalar or array)

    Returns:
        Linear power ratio
    """
    result = np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)
    return float(result) if result.ndim == 0 else result


def derive_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """
    Build an independent random stream for a (trial, purpose, ...) key.

    Streams come from ``SeedSequence(master_seed, spawn_key=keys)``, so the
    stream of a given key never depends on how many other keys were used or
    in which order they were evaluated.

    Args:
        master_seed: 64-bit master seed of the sweep
        *keys: Non-negative integers identifying the stream

    Returns:
        numpy Generator
    """
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(sequence)


def array_digest(array: np.ndarray, length: int = 16) -> str:
    """Short SHA-256 digest of an array's bytes."""
    contiguous = np.ascontiguousarray(array)
    return hashlib.sha256(contiguous.tobytes()).hexdigest()[:length]


def format_rate(rate_bps_hz):
    """
    Format a spectral efficiency for display.

    Args:
        rate_bps_hz: Rate in bits/s/Hz

    Returns:
        str: Formatted rate string
    """
    if isinstance(rate_bps_hz, bool) or not isinstance(rate_bps_hz, (int, float, np.floating)):
        raise ValueError("Rate must be a number")

    if rate_bps_hz < 0:
        raise ValueError("Rate cannot be negative")

    if np.isinf(rate_bps_hz):
        return "inf bits/s/Hz"
    return f"{rate_bps_hz:.2f} bits/s/Hz"


def parse_list(text, cast=float):
    """
    Parse a comma-separated CLI list ("-10,-5,0") into typed values.

    Ranges written as ``start:stop`` (inclusive) are expanded for integers.
    """
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    values = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if cast is int and ":" in part:
            start, stop = (int(p) for p in part.split(":", 1))
            values.extend(range(start, stop + 1))
        else:
            values.append(cast(part))
    return values
