"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class InvalidLabelError(ValueError):
    """A class label is outside {0, 1}."""


class StateError(RuntimeError):
    """An operation was called in the wrong order, e.g. backward before forward."""


class ConfigError(ValueError):
    """Invalid hyperparameters or construction arguments."""


class TrainingDivergenceError(FloatingPointError):
    """A loss or gradient became NaN or infinite during training."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class DegenerateFileError(ValueError):
    """A segment file has max == min, so min-max scaling is undefined."""


class EmptyDatasetError(ValueError):
    """No usable samples are available."""


class ParseError(ValueError):
    """A segment CSV file could not be parsed."""


class ModelFormatError(ValueError):
    """A model file has the wrong magic bytes or an unknown version."""


class CorruptModelError(ValueError):
    """A model file is truncated or fails checksum validation."""
