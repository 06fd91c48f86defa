"""
(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from sed_detect.types.errors import (
    AnnotationError,
    ConfigError,
    DataError,
    FittingError,
    IOFailure,
    LayoutError,
    SedError,
    ShapeError,
    StreamError,
    TrainingDivergedError,
)
from sed_detect.types.options import (
    ConfigOption,
    DataOption,
    EtaOption,
    FoldsOption,
    LayoutOption,
    MergeGapOption,
    ModelFileOption,
    ModelKindOption,
    OutOption,
    PartyOption,
    SeedOption,
    TauOption,
)
from sed_detect.types.types import (
    ENGAGED,
    SED,
    SIGNIFICANCE_STARS,
    Affect,
    BoolArray,
    Cue,
    FloatArray,
    FoldSplit,
    IntArray,
    LabelArray,
    ModelKind,
    Monitor,
    ParamDict,
    Party,
    Readout,
    StreamId,
)


__all__ = [
    "ENGAGED",
    "SED",
    "SIGNIFICANCE_STARS",
    "Affect",
    "AnnotationError",
    "BoolArray",
    "ConfigError",
    "ConfigOption",
    "Cue",
    "DataError",
    "DataOption",
    "EtaOption",
    "FittingError",
    "FloatArray",
    "FoldSplit",
    "FoldsOption",
    "IOFailure",
    "IntArray",
    "LabelArray",
    "LayoutError",
    "LayoutOption",
    "MergeGapOption",
    "ModelFileOption",
    "ModelKind",
    "ModelKindOption",
    "Monitor",
    "OutOption",
    "ParamDict",
    "Party",
    "PartyOption",
    "Readout",
    "SedError",
    "SeedOption",
    "ShapeError",
    "StreamError",
    "StreamId",
    "TauOption",
    "TrainingDivergedError",
]
