"""
Exceptions for mmWave Low-Resolution Scheduling Tools
"""

import numpy as np


class SchedulingToolsError(Exception):
    """Base class for all errors raised by this package"""
    pass


class DomainError(SchedulingToolsError, ValueError):
    """Raised when an argument lies outside its documented domain"""
    pass


class DimensionMismatchError(DomainError):
    """Raised when array shapes do not agree"""
    pass


class SingularChannelError(SchedulingToolsError, np.linalg.LinAlgError):
    """Raised when a beamspace channel matrix is rank deficient"""
    pass


class CombinatorialLimitError(SchedulingToolsError):
    """Raised when exhaustive search would enumerate too many subsets"""
    pass


class UnknownSchedulerError(SchedulingToolsError, KeyError):
    """Raised for an unrecognised scheduler id"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class UnknownPresetError(SchedulingToolsError, KeyError):
    """Raised for an unrecognised figure preset name"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ConfigError(SchedulingToolsError):
    """Raised when a configuration file or sweep spec is invalid"""
    pass
