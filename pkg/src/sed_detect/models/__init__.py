"""
(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from sed_detect.models.layout import POOLING_STATISTICS, FeatureLayout, engagement_zone
from sed_detect.models.models import (
    ANNOTATION_SCHEMA,
    CORPUS_SCHEMA,
    DECISION_SCHEMA,
    GENERATOR_SCHEMA,
    MODEL_SCHEMA,
    RUN_SCHEMA,
    STREAM_SCHEMA,
    AnnotationHeader,
    AnnotatorNoise,
    CorpusManifest,
    DecisionRecord,
    DurationSpec,
    EmissionSpec,
    GeneratorConfig,
    LayoutCatalog,
    ManifestEntry,
    ModelFile,
    RunRecord,
    Segment,
    StreamHeader,
    StreamRecord,
    TrainConfig,
    default_emission_table,
    get_layout_catalog,
)
from sed_detect.models.window_config import DEFAULT_FRAME_PERIOD_MS, WindowConfig


__all__ = [
    "ANNOTATION_SCHEMA",
    "CORPUS_SCHEMA",
    "DECISION_SCHEMA",
    "DEFAULT_FRAME_PERIOD_MS",
    "GENERATOR_SCHEMA",
    "MODEL_SCHEMA",
    "POOLING_STATISTICS",
    "RUN_SCHEMA",
    "STREAM_SCHEMA",
    "AnnotationHeader",
    "AnnotatorNoise",
    "CorpusManifest",
    "DecisionRecord",
    "DurationSpec",
    "EmissionSpec",
    "FeatureLayout",
    "GeneratorConfig",
    "LayoutCatalog",
    "ManifestEntry",
    "ModelFile",
    "RunRecord",
    "Segment",
    "StreamHeader",
    "StreamRecord",
    "TrainConfig",
    "WindowConfig",
    "default_emission_table",
    "engagement_zone",
    "get_layout_catalog",
]
