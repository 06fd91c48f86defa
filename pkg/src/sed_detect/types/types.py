# sourcery skip: avoid-global-variables
"""
Generic types for the engagement-decrease detector: stream identifiers, annotation
vocabularies, model kinds and small named tuples shared across modules.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from enum import StrEnum
from typing import NamedTuple

import numpy as np
import numpy.typing as npt


type FloatArray = npt.NDArray[np.float64]
type IntArray = npt.NDArray[np.int64]
type BoolArray = npt.NDArray[np.bool_]
type LabelArray = npt.NDArray[np.int8]
type ParamDict = dict[str, FloatArray]


class StreamId(StrEnum):
    """The five behaviour streams, in feature-layout order."""

    DISTANCE = "distance"
    GAZE = "gaze"
    HEAD = "head"
    FACE = "face"
    SPEECH = "speech"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value

    @classmethod
    def from_value(cls, value: str) -> "StreamId":
        """Converts a string to the corresponding enum member."""
        try:
            return cls(value)
        except ValueError as e:
            raise ValueError(f"Unknown stream: {value}, not a member of {cls.__name__}") from e

    @property
    def is_face_derived(self) -> bool:
        """Streams computed from the face tracker; these drop out together on occlusion."""
        return self in (StreamId.GAZE, StreamId.HEAD, StreamId.FACE)


class Cue(StrEnum):
    """Observed cues of an engagement decrease, as annotators list them."""

    EYE_GAZE = "eye gaze"
    HEAD_MOTION = "head motion"
    FACIAL_EXPRESSION = "facial expression"
    GESTURES = "gestures"
    ACOUSTIC = "acoustic"
    LINGUISTIC = "linguistic"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value


class Affect(StrEnum):
    """Negative affects an annotator may attach to a segment."""

    FRUSTRATION = "frustration"
    BOREDOM = "boredom"
    NERVOUSNESS = "nervousness"
    DISAPPOINTMENT = "disappointment"
    ANGER = "anger"
    SUBMISSION = "submission"
    OTHER = "other"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value


class ModelKind(StrEnum):
    """Classifier families."""

    LOGREG = "logreg"
    DNN = "dnn"
    GRU = "gru"
    LSTM = "lstm"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value

    @property
    def is_recurrent(self) -> bool:
        """Whether the model consumes the window as a sequence."""
        return self in (ModelKind.GRU, ModelKind.LSTM)

    @property
    def gate_count(self) -> int:
        """Number of stacked affine blocks per recurrent cell."""
        match self:
            case ModelKind.LSTM:
                return 4
            case ModelKind.GRU:
                return 3
            case _:
                return 1

    @classmethod
    def from_value(cls, value: str) -> "ModelKind":
        """Converts a string to the corresponding enum member."""
        try:
            return cls(value.lower())
        except ValueError as e:
            raise ValueError(f"Invalid model kind: {value}, not a member of {cls.__name__}") from e


class Party(StrEnum):
    """Filter on interaction party size."""

    ALL = "all"
    SINGLE = "single"
    MULTI = "multi"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value

    def accepts(self, *, multiparty: bool) -> bool:
        """Whether an interaction with the given flag passes this filter."""
        match self:
            case Party.SINGLE:
                return not multiparty
            case Party.MULTI:
                return multiparty
            case _:
                return True


class Readout(StrEnum):
    """Activation applied to the last hidden state before the output layer."""

    RELU = "relu"
    IDENTITY = "identity"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value


class Monitor(StrEnum):
    """Validation metric watched by early stopping."""

    ACCURACY = "accuracy"
    BALANCED_ACCURACY = "balanced_accuracy"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value


class FoldSplit(NamedTuple):
    """Train and test interaction ids for one cross-validation fold.

    Attributes:
        fold (int): Zero-based fold index.
        train_ids (tuple[str, ...]): Interactions used for fitting.
        test_ids (tuple[str, ...]): Held-out interactions.
    """

    fold: int
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


ENGAGED = 0
SED = 1

# significance buckets, most significant first
SIGNIFICANCE_STARS: tuple[tuple[float, str], ...] = (
    (1e-4, "****"),
    (1e-3, "***"),
    (1e-2, "**"),
    (5e-2, "*"),
)


__all__ = [
    "ENGAGED",
    "SED",
    "SIGNIFICANCE_STARS",
    "Affect",
    "BoolArray",
    "Cue",
    "FloatArray",
    "FoldSplit",
    "IntArray",
    "LabelArray",
    "ModelKind",
    "Monitor",
    "ParamDict",
    "Party",
    "Readout",
    "StreamId",
]
