"""
Exception hierarchy. Every error raised by the library is a `SedError` carrying a short
machine-parsable `category`; the CLI prints `error[<category>]: <detail>` and exits nonzero.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from collections.abc import Iterable
from typing import ClassVar


class SedError(ValueError):
    """Base class for all detector errors."""

    category: ClassVar[str] = "error"


class StreamError(SedError):
    """Malformed, unsorted or unknown stream input."""

    category: ClassVar[str] = "stream"


class LayoutError(SedError):
    """Observed dimensions disagree with the declared feature layout."""

    category: ClassVar[str] = "layout"


class AnnotationError(SedError):
    """Invalid segments or mismatched annotation tracks."""

    category: ClassVar[str] = "annotation"


class FittingError(SedError):
    """A statistic could not be fitted from the training data."""

    category: ClassVar[str] = "fitting"

    def __init__(self, message: str, coordinates: Iterable[str] = ()) -> None:
        """Initialize with the offending coordinates, if any."""
        self.coordinates = tuple(coordinates)
        if self.coordinates:
            message = f"{message}: {', '.join(self.coordinates)}"
        super().__init__(message)


class ShapeError(SedError):
    """Array shapes do not match the model configuration."""

    category: ClassVar[str] = "shape"


class ConfigError(SedError):
    """Invalid or inconsistent configuration."""

    category: ClassVar[str] = "config"


class DataError(SedError):
    """The data cannot support the requested operation (e.g. a single class)."""

    category: ClassVar[str] = "data"


class IOFailure(SedError):
    """A file could not be read or written."""

    category: ClassVar[str] = "io"


class TrainingDivergedError(SedError):
    """The training loss became non-finite."""

    category: ClassVar[str] = "training"

    def __init__(self, epoch: int, loss: float) -> None:
        """Initialize with the epoch report."""
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")


__all__ = [
    "AnnotationError",
    "ConfigError",
    "DataError",
    "FittingError",
    "IOFailure",
    "LayoutError",
    "SedError",
    "ShapeError",
    "StreamError",
    "TrainingDivergedError",
]
