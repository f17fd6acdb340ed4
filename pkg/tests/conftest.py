"""Test configuration for pytest."""

import sys
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

# Add repository root to Python path
sys.path.insert(0, str(Path(__file__).parent.parent))

from mmwave_scheduling.channel import dft_codebook, draw_channel_matrix, to_beamspace  # noqa: E402
from mmwave_scheduling.models import SystemConfig  # noqa: E402


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """Small cell: 16 antennas, 12 users, 4 scheduled, 2 paths."""
    return SystemConfig(
        num_antennas=16,
        num_users=12,
        num_scheduled=4,
        num_paths=2,
        num_stored_beams=4,
        ortho_threshold=0.5,
        beam_overlap_limit=2,
    )


@pytest.fixture
def beamspace_channels(rng, small_config):
    """Beamspace channels of every user in the small cell (N_r x N_u)."""
    H = draw_channel_matrix(rng, small_config)
    return to_beamspace(H, dft_codebook(small_config.num_antennas))


@pytest.fixture
def captured_logs():
    """Collect loguru messages emitted during a test."""
    messages = []
    handler_id = logger.add(messages.append, level="DEBUG", format="{level} {message}")
    yield messages
    logger.remove(handler_id)
