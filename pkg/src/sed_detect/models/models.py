# sourcery skip: lambdas-should-be-short
"""
`models/models` module. - Pydantic models for every file the detector reads or writes,
and for its configuration.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from typing import Annotated, Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sed_detect.models.layout import FeatureLayout
from sed_detect.types import Affect, ConfigError, Cue, Monitor, Readout, StreamId


STREAM_SCHEMA = "sed-stream/1"
ANNOTATION_SCHEMA = "sed-annotation/1"
CORPUS_SCHEMA = "sed-corpus/1"
LAYOUTS_SCHEMA = "sed-layouts/1"
GENERATOR_SCHEMA = "sed-generator/1"
TRAIN_SCHEMA = "sed-train/1"
MODEL_SCHEMA = "sed-model/1"
RUN_SCHEMA = "sed-run/1"
DECISION_SCHEMA = "sed-decision/1"


# --- Stream files ---


class StreamHeader(BaseModel):
    """Optional first record of a stream file."""

    schema_: Annotated[Literal["sed-stream/1"], Field(alias="schema")] = STREAM_SCHEMA
    interaction: str

    model_config = ConfigDict(populate_by_name=True)


class StreamRecord(BaseModel):
    """One raw sample line of a stream file; ``null`` values are missing."""

    t_ms: Annotated[int, Field(ge=0)]
    stream: StreamId
    values: list[float | None]


# --- Annotation files ---


class Segment(BaseModel):
    """An annotated interval in which the user showed a sign of engagement decrease."""

    annotator: str
    interaction: str
    start_ms: Annotated[int, Field(ge=0)]
    end_ms: Annotated[int, Field(ge=0)]
    label: Literal["SED"] = "SED"
    cues: Annotated[list[Cue], Field(default_factory=list, description="Ordered by importance")]
    affects: Annotated[list[Affect], Field(default_factory=list)]
    cause: str | None = None

    model_config = ConfigDict(frozen=True)

    @field_validator("affects", mode="after")
    @classmethod
    def dedupe_affects(cls, value: list[Affect]) -> list[Affect]:
        """Affects are a set; keep first occurrences in order."""
        return list(dict.fromkeys(value))

    @model_validator(mode="after")
    def check_bounds(self) -> Self:
        """A segment must have positive length."""
        if self.start_ms >= self.end_ms:
            raise ValueError(f"segment start {self.start_ms} must precede end {self.end_ms}")
        return self

    @property
    def duration_ms(self) -> int:
        """Segment length in milliseconds."""
        return self.end_ms - self.start_ms


class AnnotationHeader(BaseModel):
    """First record of an annotation file: interaction bounds and party size."""

    schema_: Annotated[Literal["sed-annotation/1"], Field(alias="schema")] = ANNOTATION_SCHEMA
    interaction: str
    start_ms: Annotated[int, Field(ge=0)]
    end_ms: Annotated[int, Field(gt=0)]
    multiparty: bool = False
    annotators: Annotated[list[str], Field(min_length=1)]

    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode="after")
    def check_bounds(self) -> Self:
        """The interaction must have positive length."""
        if self.start_ms >= self.end_ms:
            raise ValueError("interaction start must precede its end")
        return self


# --- Corpus manifest ---


class ManifestEntry(BaseModel):
    """One interaction of a corpus; paths are relative to the manifest."""

    id: str
    streams: str
    annotations: str
    multiparty: bool = False


class CorpusManifest(BaseModel):
    """The ``manifest.json`` of a corpus directory."""

    schema_: Annotated[Literal["sed-corpus/1"], Field(alias="schema")] = CORPUS_SCHEMA
    seed: int | None = None
    layout: str = "openface"
    interactions: list[ManifestEntry]

    model_config = ConfigDict(populate_by_name=True)

    @field_validator("interactions", mode="after")
    @classmethod
    def unique_ids(cls, value: list[ManifestEntry]) -> list[ManifestEntry]:
        """Interaction ids must be unique."""
        ids = [entry.id for entry in value]
        if len(set(ids)) != len(ids):
            raise ValueError("manifest lists an interaction id more than once")
        return value

    @property
    def ids(self) -> list[str]:
        """Interaction ids in manifest order."""
        return [entry.id for entry in self.interactions]


# --- Feature layout catalog (packaged data) ---


class LayoutCatalog(BaseModel):
    """The packaged ``data/layouts.json`` file."""

    schema_: Annotated[Literal["sed-layouts/1"], Field(alias="schema")] = LAYOUTS_SCHEMA
    default: str
    layouts: dict[str, dict[str, list[str]]]

    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode="after")
    def check_default(self) -> Self:
        """The default layout must be declared."""
        if self.default not in self.layouts:
            raise ValueError(f"default layout {self.default!r} is not declared")
        return self

    def layout(self, name: str | None = None) -> FeatureLayout:
        """Returns a declared layout, the default one when no name is given."""
        name = name or self.default
        try:
            return FeatureLayout.from_mapping(name, self.layouts[name])
        except KeyError as e:
            raise ConfigError(
                f"unknown layout {name!r}; available: {', '.join(sorted(self.layouts))}"
            ) from e


def get_layout_catalog(data: str | bytes | bytearray) -> LayoutCatalog:
    """Get the layout catalog from the `layouts.json` file."""
    return LayoutCatalog.model_validate_json(data)


# --- Synthetic corpus generator ---


class EmissionSpec(BaseModel):
    """Per-state sampling distribution of one raw feature.

    ``gaussian`` features use (mean, sd) per state, optionally clipped; ``bernoulli``
    features use a per-state rate; ``zone`` features are derived from the sonar distance.
    """

    kind: Literal["gaussian", "bernoulli", "zone"]
    engaged: float = 0.0
    sed: float = 0.0
    engaged_sd: Annotated[float, Field(ge=0.0)] = 0.0
    sed_sd: Annotated[float, Field(ge=0.0)] = 0.0
    minimum: float | None = None
    maximum: float | None = None

    @model_validator(mode="after")
    def check_rates(self) -> Self:
        """Bernoulli rates are probabilities."""
        if self.kind == "bernoulli" and not (0.0 <= self.engaged <= 1.0 and 0.0 <= self.sed <= 1.0):
            raise ValueError("bernoulli rates must lie in [0, 1]")
        return self


def _gauss(
    engaged: float,
    engaged_sd: float,
    sed: float,
    sed_sd: float,
    minimum: float | None = None,
    maximum: float | None = None,
) -> EmissionSpec:
    return EmissionSpec(
        kind="gaussian",
        engaged=engaged,
        engaged_sd=engaged_sd,
        sed=sed,
        sed_sd=sed_sd,
        minimum=minimum,
        maximum=maximum,
    )


def _rate(engaged: float, sed: float) -> EmissionSpec:
    return EmissionSpec(kind="bernoulli", engaged=engaged, sed=sed)


# facial action units that move with each state; magnitudes are synthetic defaults
_HAPPY_AUS = ("AU06", "AU12")
_NEGATIVE_AUS = ("AU01", "AU04", "AU05", "AU07", "AU09", "AU15", "AU23")


def default_emission_table() -> dict[str, EmissionSpec]:
    """Synthetic per-state emission defaults, keyed ``stream.feature``.

    Only the direction of each engaged/SED contrast is meaningful: users stand closer,
    look at the robot more, move their head less and smile more while engaged, and are
    more engaged while the robot speaks.
    """
    table: dict[str, EmissionSpec] = {
        "distance.sonar_front": _gauss(0.9, 0.25, 1.5, 0.45, minimum=0.2, maximum=5.0),
        "distance.face_distance": _gauss(0.95, 0.25, 1.55, 0.45, minimum=0.2, maximum=5.0),
        "distance.head_x": _gauss(0.9, 0.25, 1.5, 0.45, minimum=0.2, maximum=5.0),
        "distance.head_y": _gauss(0.0, 0.15, 0.05, 0.3),
        "distance.head_z": _gauss(1.55, 0.08, 1.55, 0.1),
        "distance.engagement_zone": EmissionSpec(kind="zone"),
        "gaze.gaze_yaw": _gauss(0.0, 0.1, 0.05, 0.3),
        "gaze.gaze_pitch": _gauss(0.05, 0.08, -0.1, 0.15),
        "gaze.is_looking": _rate(0.85, 0.4),
        "head.head_yaw": _gauss(0.0, 0.08, 0.05, 0.3),
        "head.head_pitch": _gauss(0.02, 0.06, -0.05, 0.2),
        "head.head_roll": _gauss(0.0, 0.05, 0.0, 0.15),
        "speech.voicing_prob": _gauss(0.45, 0.2, 0.25, 0.2, minimum=0.0, maximum=1.0),
        "speech.f0": _gauss(180.0, 40.0, 170.0, 45.0, minimum=0.0),
        "speech.loudness": _gauss(0.6, 0.2, 0.4, 0.2, minimum=0.0),
        "speech.log_energy": _gauss(-4.0, 1.0, -5.0, 1.0),
        "speech.is_robot_speaking": _rate(0.6, 0.3),
        "speech.robot_speech_duration": _gauss(3.0, 1.5, 1.5, 1.2, minimum=0.0),
        "speech.user_speech_duration": _gauss(2.0, 1.0, 0.8, 0.8, minimum=0.0),
    }
    for au in (
        "AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
        "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU45",
    ):  # fmt: skip
        if au in _HAPPY_AUS:
            spec = _gauss(0.45, 0.15, 0.15, 0.1, minimum=0.0, maximum=1.0)
        elif au in _NEGATIVE_AUS:
            spec = _gauss(0.1, 0.08, 0.3, 0.12, minimum=0.0, maximum=1.0)
        else:
            spec = _gauss(0.1, 0.08, 0.1, 0.08, minimum=0.0, maximum=1.0)
        table[f"face.{au}"] = spec
    for expression, engaged, sed in (
        ("neutral", 0.5, 0.55),
        ("happy", 0.35, 0.1),
        ("surprised", 0.05, 0.05),
        ("angry", 0.03, 0.12),
        ("sad", 0.05, 0.18),
    ):
        table[f"face.{expression}"] = _gauss(engaged, 0.1, sed, 0.1, minimum=0.0, maximum=1.0)
    for k in range(1, 13):
        table[f"speech.mfcc_{k}"] = _gauss(0.0, 1.0, 0.0, 1.0)
    return table


class DurationSpec(BaseModel):
    """A gamma duration distribution given by its mean and sd, truncated below."""

    mean_s: Annotated[float, Field(gt=0.0)]
    sd_s: Annotated[float, Field(gt=0.0)]
    minimum_s: Annotated[float, Field(ge=0.0)] = 0.0

    @property
    def shape(self) -> float:
        """Gamma shape parameter k = (mean/sd)^2."""
        return (self.mean_s / self.sd_s) ** 2

    @property
    def scale(self) -> float:
        """Gamma scale parameter theta = sd^2/mean."""
        return self.sd_s**2 / self.mean_s


class AnnotatorNoise(BaseModel):
    """How the simulated second annotator departs from the first one.

    Splits are part of the jittered annotator: with zero jitter both tracks are identical
    whatever ``split_probability`` says.
    """

    jitter_ms: Annotated[float, Field(ge=0.0, description="sd of boundary jitter")] = 250.0
    split_probability: Annotated[
        float, Field(ge=0.0, le=1.0, description="chance of splitting a segment, with jitter only")
    ] = 0.2
    split_gap_ms: tuple[int, int] = (300, 900)

    @property
    def is_silent(self) -> bool:
        """True when both annotators produce identical tracks."""
        return self.jitter_ms == 0


def _default_rates() -> dict[StreamId, float]:
    return {
        StreamId.DISTANCE: 5.0,
        StreamId.GAZE: 10.0,
        StreamId.HEAD: 10.0,
        StreamId.FACE: 10.0,
        StreamId.SPEECH: 100.0,
    }


def _default_missing() -> dict[StreamId, float]:
    return {
        StreamId.DISTANCE: 0.02,
        StreamId.GAZE: 0.02,
        StreamId.HEAD: 0.02,
        StreamId.FACE: 0.02,
        StreamId.SPEECH: 0.0,
    }


class GeneratorConfig(BaseModel):
    """Configuration of the synthetic corpus generator."""

    schema_: Annotated[Literal["sed-generator/1"], Field(alias="schema")] = GENERATOR_SCHEMA
    seed: int = 0
    layout: str = "openface"
    id_prefix: str = "synth"
    duration: DurationSpec = DurationSpec(mean_s=420.0, sd_s=300.0, minimum_s=60.0)
    segments_per_interaction: Annotated[float, Field(gt=0.0)] = 6.0
    sed_duration: DurationSpec = DurationSpec(mean_s=6.0, sd_s=9.0, minimum_s=0.5)
    final_sed_duration: DurationSpec = DurationSpec(mean_s=9.0, sd_s=15.0, minimum_s=0.5)
    sed_fraction: Annotated[float, Field(gt=0.0, lt=1.0)] = 0.10
    min_engaged_gap_s: Annotated[float, Field(ge=0.0)] = 2.0
    cue_ramp_s: Annotated[
        float, Field(ge=0.0, description="behaviour reaches its new state this long after a state change")
    ] = 1.5
    stream_rates_hz: Annotated[dict[StreamId, float], Field(default_factory=_default_rates)]
    missing_rate: Annotated[dict[StreamId, float], Field(default_factory=_default_missing)]
    occlusion_rate_per_min: Annotated[float, Field(ge=0.0)] = 1.0
    occlusion_mean_s: Annotated[float, Field(gt=0.0)] = 2.0
    multiparty_rate: Annotated[float, Field(ge=0.0, le=1.0)] = 69 / 278
    annotator_noise: AnnotatorNoise = AnnotatorNoise()
    emissions: Annotated[dict[str, EmissionSpec], Field(default_factory=default_emission_table)]

    model_config = ConfigDict(populate_by_name=True)

    @field_validator("stream_rates_hz", mode="after")
    @classmethod
    def check_rates(cls, value: dict[StreamId, float]) -> dict[StreamId, float]:
        """Every stream needs a positive native rate."""
        missing = [str(s) for s in StreamId if value.get(s, 0.0) <= 0.0]
        if missing:
            raise ValueError(f"streams without a positive sampling rate: {missing}")
        return value

    @field_validator("missing_rate", mode="after")
    @classmethod
    def check_missing(cls, value: dict[StreamId, float]) -> dict[StreamId, float]:
        """Missingness rates are probabilities."""
        if any(not 0.0 <= rate < 1.0 for rate in value.values()):
            raise ValueError("missing rates must lie in [0, 1)")
        return value


# --- Training ---


class TrainConfig(BaseModel):
    """Optimizer, regularization and early-stopping settings for every model kind."""

    schema_: Annotated[Literal["sed-train/1"], Field(alias="schema")] = TRAIN_SCHEMA
    seed: int = 0
    learning_rate: Annotated[float, Field(gt=0.0)] = 1e-3
    rho: Annotated[float, Field(gt=0.0, lt=1.0)] = 0.9
    epsilon: Annotated[float, Field(gt=0.0)] = 1e-7
    clip_norm: Annotated[float | None, Field(gt=0.0)] = 5.0
    max_epochs: Annotated[int, Field(ge=1)] = 100
    batch_size: Annotated[int, Field(ge=1)] = 32
    validation_fraction: Annotated[float, Field(gt=0.0, lt=1.0)] = 0.10
    patience: Annotated[int, Field(ge=1)] = 5
    monitor: Monitor = Monitor.ACCURACY
    dropout: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.1
    hidden_sizes: tuple[Annotated[int, Field(ge=1)], Annotated[int, Field(ge=1)]] = (32, 2)
    readout: Readout = Readout.RELU
    class_weights: dict[int, Annotated[float, Field(gt=0.0)]] | None = None
    logreg_c: Annotated[float, Field(gt=0.0)] = 1.0
    logreg_max_iter: Annotated[int, Field(ge=1)] = 1000
    logreg_tol: Annotated[float, Field(gt=0.0)] = 1e-6

    model_config = ConfigDict(populate_by_name=True)


# --- Artifacts ---


class ModelFile(BaseModel):
    """Serialized TrainedModel. Arrays are nested lists of hex-encoded floats."""

    schema_: Annotated[Literal["sed-model/1"], Field(alias="schema")] = MODEL_SCHEMA
    version: str
    kind: str
    window_config: dict[str, Any]
    layout_hash: str
    layout_name: str
    network: dict[str, Any]
    normalization: dict[str, Any]
    imputation: dict[str, Any]
    params: dict[str, Any]
    train_meta: dict[str, Any]

    model_config = ConfigDict(populate_by_name=True)


class RunRecord(BaseModel):
    """Written next to every command's artifacts so a run can be reproduced."""

    schema_: Annotated[Literal["sed-run/1"], Field(alias="schema")] = RUN_SCHEMA
    command: str
    version: str
    config: dict[str, Any] = Field(default_factory=dict)
    seeds: dict[str, int] = Field(default_factory=dict)
    layout_hash: str | None = None
    metrics: dict[str, Any] = Field(default_factory=dict)
    artifacts: list[str] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True)


class DecisionRecord(BaseModel):
    """One line of detector output."""

    interaction: str
    frame: int
    t_ms: int
    labeled_t_ms: int
    label: Literal[0, 1]
    p_sed: Annotated[float, Field(ge=0.0, le=1.0)]
    model: str
    compute_ms: float | None = None


__all__ = [
    "ANNOTATION_SCHEMA",
    "CORPUS_SCHEMA",
    "DECISION_SCHEMA",
    "GENERATOR_SCHEMA",
    "LAYOUTS_SCHEMA",
    "MODEL_SCHEMA",
    "RUN_SCHEMA",
    "STREAM_SCHEMA",
    "AnnotationHeader",
    "AnnotatorNoise",
    "CorpusManifest",
    "DecisionRecord",
    "DurationSpec",
    "EmissionSpec",
    "GeneratorConfig",
    "LayoutCatalog",
    "ManifestEntry",
    "ModelFile",
    "RunRecord",
    "Segment",
    "StreamHeader",
    "StreamRecord",
    "TrainConfig",
    "default_emission_table",
    "get_layout_catalog",
]
