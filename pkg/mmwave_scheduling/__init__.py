"""mmWave Low-Resolution Scheduling - uplink MU-MIMO user scheduling with low-resolution ADCs."""

__version__ = "0.1.0"
__author__ = "Daniel Novais"

from .channel import (
    dft_codebook,
    draw_channel_matrix,
    draw_user_channel,
    make_virtual_channel,
    steering_vector,
    to_beamspace,
)
from .config import Config
from .exceptions import (
    CombinatorialLimitError,
    ConfigError,
    DimensionMismatchError,
    DomainError,
    SchedulingToolsError,
    SingularChannelError,
    UnknownPresetError,
    UnknownSchedulerError,
)
from .harness import emit_csv, figure_preset, read_csv, run_sweep, summarize, tune_parameters
from .models import (
    AqnmParams,
    ScheduleTrace,
    SchedulerId,
    Spread,
    SweepResult,
    SweepSpec,
    SystemConfig,
    VirtualChannelSpec,
)
from .quantize import aqnm_params, beta_for_bits, quantization_covariance
from .rates import (
    approx_sinr,
    closed_form_single_user_rate,
    rate_limit_infinite_power,
    sum_rate,
    user_rate,
    zf_combiner,
)
from .schedulers import (
    run_scheduler,
    schedule_beam_select,
    schedule_css,
    schedule_exhaustive,
    schedule_greedy,
    schedule_random,
    schedule_sus,
)
from .verification import run_verification

__all__ = [
    "AqnmParams",
    "CombinatorialLimitError",
    "Config",
    "ConfigError",
    "DimensionMismatchError",
    "DomainError",
    "ScheduleTrace",
    "SchedulerId",
    "SchedulingToolsError",
    "SingularChannelError",
    "Spread",
    "SweepResult",
    "SweepSpec",
    "SystemConfig",
    "UnknownPresetError",
    "UnknownSchedulerError",
    "VirtualChannelSpec",
    "approx_sinr",
    "aqnm_params",
    "beta_for_bits",
    "closed_form_single_user_rate",
    "dft_codebook",
    "draw_channel_matrix",
    "draw_user_channel",
    "emit_csv",
    "figure_preset",
    "make_virtual_channel",
    "quantization_covariance",
    "rate_limit_infinite_power",
    "read_csv",
    "run_scheduler",
    "run_sweep",
    "run_verification",
    "schedule_beam_select",
    "schedule_css",
    "schedule_exhaustive",
    "schedule_greedy",
    "schedule_random",
    "schedule_sus",
    "steering_vector",
    "sum_rate",
    "summarize",
    "to_beamspace",
    "tune_parameters",
    "user_rate",
    "zf_combiner",
]
