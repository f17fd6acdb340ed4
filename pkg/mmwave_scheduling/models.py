"""
Data models for mmWave low-resolution ADC scheduling.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from .exceptions import ConfigError, DomainError, UnknownSchedulerError
from .utils import db_to_linear


@dataclass(frozen=True)
class SystemConfig:
    """Scenario scalars shared by every module."""
    num_antennas: int = 128
    num_users: int = 200
    num_scheduled: int = 10
    num_paths: int = 4
    num_stored_beams: int = 8
    transmit_power: float = 1.0  # linear, unit noise variance
    ortho_threshold: float = 0.5
    beam_overlap_limit: int = 3
    antenna_spacing_ratio: float = 0.5

    def __post_init__(self):
        problems = []
        for name in ("num_antennas", "num_users", "num_scheduled", "num_paths", "num_stored_beams"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                problems.append(f"{name} must be a positive integer (got {value!r})")
        if problems:
            raise DomainError("; ".join(problems))

        if self.num_scheduled > self.num_users:
            problems.append("num_scheduled must not exceed num_users")
        if self.num_scheduled > self.num_antennas:
            problems.append("num_scheduled must not exceed num_antennas")
        if self.num_stored_beams < self.num_paths:
            problems.append("num_stored_beams must be at least num_paths")
        if self.num_stored_beams > self.num_antennas:
            problems.append("num_stored_beams must not exceed num_antennas")
        if self.transmit_power < 0:
            problems.append("transmit_power must be non-negative")
        if not 0.0 <= self.ortho_threshold <= 1.0:
            problems.append("ortho_threshold must lie in [0, 1]")
        if self.beam_overlap_limit < 0:
            problems.append("beam_overlap_limit must be non-negative")
        if self.antenna_spacing_ratio <= 0:
            problems.append("antenna_spacing_ratio must be positive")
        if problems:
            raise DomainError("Invalid SystemConfig: " + "; ".join(problems))

    @property
    def num_rf_chains(self) -> int:
        """One RF chain (and one ADC pair) per antenna."""
        return self.num_antennas

    def with_power_db(self, rho_db: float) -> "SystemConfig":
        """Copy with transmit power given as SNR in dB."""
        return replace(self, transmit_power=db_to_linear(float(rho_db)))


@dataclass(frozen=True, eq=False)
class UserChannel:
    """Geometric multipath channel of one single-antenna user."""
    path_gains: np.ndarray
    path_angles: np.ndarray
    antenna_vector: np.ndarray

    @property
    def num_paths(self) -> int:
        return len(self.path_gains)


@dataclass(frozen=True, eq=False)
class SteeringMatrix:
    """Unitary DFT codebook used as the analog combiner."""
    columns: np.ndarray

    @property
    def num_antennas(self) -> int:
        return self.columns.shape[0]

    def unitarity_error(self) -> float:
        """Largest entry of |A^H A - I|."""
        gram = self.columns.conj().T @ self.columns
        return float(np.max(np.abs(gram - np.eye(self.num_antennas))))


class Spread(Enum):
    """How a virtual channel spreads its power over the support."""
    EQUAL = "equal"
    SINGLE_BEAM = "single_beam"
    RANDOM_DIRICHLET = "random_dirichlet"


@dataclass(frozen=True)
class VirtualChannelSpec:
    """On-grid beamspace channel with exactly L nonzero gains."""
    support: Tuple[int, ...]
    gamma: float
    num_antennas: int
    spread: Spread = Spread.EQUAL
    num_paths: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        if self.num_paths is None:
            object.__setattr__(self, "num_paths", len(self.support))


@dataclass(frozen=True)
class AqnmParams:
    """ADC resolution with its quantization distortion and gain.

    ``bits=None`` stands for infinite resolution (beta = 0).
    """
    bits: Optional[int]
    beta: float

    @property
    def alpha(self) -> float:
        return 1.0 - self.beta

    @property
    def is_ideal(self) -> bool:
        return self.beta == 0.0

    @classmethod
    def ideal(cls) -> "AqnmParams":
        return cls(bits=None, beta=0.0)


@dataclass(frozen=True, eq=False)
class LloydMaxCodebook:
    """MMSE scalar quantizer for a unit-variance Gaussian."""
    bits: int
    levels: np.ndarray
    thresholds: np.ndarray  # interior decision boundaries, len(levels) - 1
    distortion: float
    iterations: int
    converged: bool

    @property
    def num_levels(self) -> int:
        return len(self.levels)


@dataclass(frozen=True, eq=False)
class QuantCovariance:
    """Diagonal of the quantization-noise covariance R_qq."""
    diagonal: np.ndarray

    def as_matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


@dataclass(frozen=True, eq=False)
class QuantizedRxSample:
    """Analog input and its element-wise quantized output."""
    analog: np.ndarray
    quantized: np.ndarray

    def distortion(self) -> float:
        """Normalised mean squared quantization error."""
        power = float(np.mean(np.abs(self.analog) ** 2))
        if power == 0.0:
            return 0.0
        return float(np.mean(np.abs(self.analog - self.quantized) ** 2)) / power


@dataclass(frozen=True, eq=False)
class ZfCombiner:
    """Zero-forcing combiner, one column per scheduled user."""
    columns: np.ndarray

    @property
    def num_users(self) -> int:
        return self.columns.shape[1]

    def column(self, k: int) -> np.ndarray:
        return self.columns[:, k]


@dataclass(frozen=True)
class RateReport:
    """Per-user achievable rates (bits/s/Hz) and their sum."""
    per_user_rates: Tuple[float, ...]
    sum_rate: float

    @classmethod
    def from_rates(cls, rates: Iterable[float]) -> "RateReport":
        values = tuple(float(r) for r in rates)
        return cls(per_user_rates=values, sum_rate=math.fsum(values))

    @classmethod
    def empty(cls) -> "RateReport":
        return cls(per_user_rates=(), sum_rate=0.0)


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """Mutually orthogonal residual vectors of the selected users."""
    vectors: Tuple[np.ndarray, ...] = ()

    def __len__(self) -> int:
        return len(self.vectors)

    def residual(self, h: np.ndarray) -> np.ndarray:
        """Component of h orthogonal to the span of the stored vectors."""
        f = np.array(h, dtype=complex)
        for v in self.vectors:
            f = f - (np.vdot(v, h) / np.vdot(v, v).real) * v
        return f

    def extended(self, vector: np.ndarray) -> "OrthoBasis":
        return OrthoBasis(self.vectors + (vector,))


class SchedulerId(Enum):
    """Scheduling algorithms known to the harness."""
    CSS = "css"
    GREEDY = "greedy"
    SUS = "sus"
    BEAM_SELECT = "beam-select"
    RANDOM = "random"
    EXHAUSTIVE = "exhaustive"

    @property
    def label(self) -> str:
        if self is SchedulerId.BEAM_SELECT:
            return "beam-select (variant)"
        return self.value

    @classmethod
    def parse(cls, value) -> "SchedulerId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise UnknownSchedulerError(
                f"Unknown scheduler '{value}'. Valid schedulers: {valid}"
            ) from None


@dataclass(frozen=True)
class ScheduleTrace:
    """Outcome of one scheduler run."""
    algorithm_id: SchedulerId
    selected: Tuple[int, ...]
    candidate_sizes: Tuple[int, ...]
    rate_report: Optional[RateReport] = None
    evaluations: int = 0
    stage_scores: Tuple[Dict[int, float], ...] = ()
    basis: Optional[OrthoBasis] = field(default=None, compare=False)

    @property
    def num_selected(self) -> int:
        return len(self.selected)

    @property
    def label(self) -> str:
        return self.algorithm_id.label

    @property
    def sum_rate(self) -> float:
        return self.rate_report.sum_rate if self.rate_report else 0.0

    def shortfall(self, num_scheduled: int) -> int:
        """How many users short of N_s the selection is."""
        return max(0, num_scheduled - self.num_selected)


DEFAULT_ALGORITHMS = ("css", "greedy", "sus", "beam-select", "random")

# SystemConfig fields a sweep may set per algorithm
ALGORITHM_PARAM_FIELDS = {"ortho_threshold": float, "beam_overlap_limit": int}


@dataclass(frozen=True)
class SweepSpec:
    """Monte Carlo sweep over transmit power and ADC bits."""
    rho_db_grid: Tuple[float, ...]
    bits_grid: Tuple[int, ...]
    trials: int
    base_config: SystemConfig = field(default_factory=SystemConfig)
    n_ol_overrides: Mapping[int, int] = field(default_factory=dict)
    algorithms: Tuple[str, ...] = DEFAULT_ALGORITHMS
    master_seed: int = 0
    track_candidates: bool = True
    name: str = "custom"
    # algorithm -> {"ortho_threshold": ..., "beam_overlap_limit": ...}
    algorithm_params: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rho_db_grid", tuple(float(r) for r in self.rho_db_grid))
        object.__setattr__(self, "bits_grid", tuple(int(b) for b in self.bits_grid))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(
            self, "n_ol_overrides", {int(b): int(n) for b, n in dict(self.n_ol_overrides).items()}
        )
        if not self.rho_db_grid:
            raise ConfigError("rho_db_grid must not be empty")
        if not self.bits_grid:
            raise ConfigError("bits_grid must not be empty")
        if any(b < 1 for b in self.bits_grid):
            raise ConfigError("bits_grid entries must be positive")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer (got {self.trials!r})")
        if not self.algorithms:
            raise ConfigError("algorithms must not be empty")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "algorithm_params", self._normalized_algorithm_params())

    def _normalized_algorithm_params(self) -> Dict[str, Dict[str, float]]:
        normalized = {}
        for algorithm, overrides in dict(self.algorithm_params).items():
            try:
                key = SchedulerId.parse(algorithm).value
            except UnknownSchedulerError as e:
                raise ConfigError(str(e)) from e
            unknown = sorted(set(overrides) - set(ALGORITHM_PARAM_FIELDS))
            if unknown:
                raise ConfigError(
                    f"Unknown parameter(s) {', '.join(unknown)} for '{key}'. "
                    f"Valid parameters: {', '.join(ALGORITHM_PARAM_FIELDS)}"
                )
            values = {name: ALGORITHM_PARAM_FIELDS[name](v) for name, v in overrides.items()}
            try:
                replace(self.base_config, **values)
            except DomainError as e:
                raise ConfigError(f"Invalid parameters for '{key}': {e}") from e
            normalized[key] = values
        return normalized

    def n_ol_for(self, bits: int) -> int:
        """Beam-overlap limit in force at a given resolution."""
        return self.n_ol_overrides.get(bits, self.base_config.beam_overlap_limit)

    def config_for(self, algorithm, point_config: SystemConfig) -> SystemConfig:
        """
        Configuration one algorithm runs with at a grid point.

        The algorithm's own ortho_threshold / beam_overlap_limit, when set,
        take precedence over the point's values (including the per-bits N_OL).
        """
        overrides = self.algorithm_params.get(SchedulerId.parse(algorithm).value)
        return replace(point_config, **overrides) if overrides else point_config

    def grid_points(self) -> List[Tuple[float, int]]:
        return [(rho_db, bits) for rho_db in self.rho_db_grid for bits in self.bits_grid]


CSV_COLUMNS = (
    "algorithm",
    "rho_db",
    "bits",
    "trial",
    "sum_rate",
    "num_selected",
    "candidate_sizes",
    "evaluations",
    "channel_digest",
)


@dataclass(frozen=True)
class SweepRow:
    """One (algorithm, grid point, trial) outcome."""
    algorithm: str
    rho_db: float
    bits: int
    trial: int
    sum_rate: float
    num_selected: int
    candidate_sizes: Tuple[int, ...]
    evaluations: int
    channel_digest: str

    def sort_key(self):
        return (self.algorithm, self.rho_db, self.bits, self.trial)


@dataclass
class SweepResult:
    """Tabular Monte Carlo output."""
    rows: List[SweepRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def sorted(self) -> "SweepResult":
        return SweepResult(sorted(self.rows, key=SweepRow.sort_key))

    def to_frame(self) -> pd.DataFrame:
        """Rows as a DataFrame; candidate_sizes stays a tuple column."""
        records = [
            {name: getattr(row, name) for name in CSV_COLUMNS} for row in self.rows
        ]
        return pd.DataFrame.from_records(records, columns=list(CSV_COLUMNS))
