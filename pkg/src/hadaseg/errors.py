"""Exception hierarchy shared by all hadaseg modules.

The CLI maps these onto exit codes (see cli.py): configuration and usage
problems exit 2, data/format problems exit 3, numeric failures exit 4.
"""


class HadasegError(Exception):
    """Base class for all errors raised by this package."""


class CapacityError(HadasegError):
    """A requested codebook order or class count exceeds what is supported."""


class ShapeError(HadasegError):
    """Array arguments have incompatible shapes."""


class ClassIndexError(HadasegError):
    """A class label lies outside the configured [0, K) range."""


class ConfigError(HadasegError):
    """An experiment configuration is malformed or inconsistent."""


class FormatError(HadasegError):
    """A file does not conform to one of the on-disk formats."""


class GenerationError(HadasegError):
    """Synthetic data generation could not satisfy its placement constraints."""


class IngestionError(HadasegError):
    """A dataset directory is incomplete or inconsistent."""


class NumericError(HadasegError):
    """A numeric self-check failed (e.g. transform paths disagree)."""


class UndefinedMetricError(HadasegError):
    """A metric was requested on an empty accumulation."""


class TrainingDivergedError(HadasegError):
    """A loss value became non-finite during training."""
