"""
`utilities/synthesis` module.

Synthetic interaction corpora for desk-scale experiments. Each interaction is a two-state
semi-Markov timeline (engaged gaps alternating with SED segments whose durations follow
gamma distributions), raw samples drawn per stream at native rates from per-state emission
distributions, sensor dropout, face-tracker occlusion bursts, and two annotator tracks: the
ground truth and a jittered, occasionally fragmented copy.

Emission magnitudes are synthetic configuration; only the direction of each engaged/SED
contrast is meant to resemble recorded interactions.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import hashlib
import heapq
import logging

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sed_detect.models import (
    AnnotationHeader,
    CorpusManifest,
    DurationSpec,
    EmissionSpec,
    FeatureLayout,
    GeneratorConfig,
    ManifestEntry,
    Segment,
    engagement_zone,
)
from sed_detect.types import Affect, ConfigError, Cue, FloatArray, IntArray, StreamId
from sed_detect.utilities.annotation import AnnotationTrack, FrameLabels
from sed_detect.utilities.corpus import (
    Interaction,
    track_labels,
    write_annotation_file,
    write_manifest,
    write_stream_file,
)
from sed_detect.utilities.streams import StreamSample, StreamSeries
from sed_detect.utilities.utilities import make_dirs


logger = logging.getLogger(__name__)

TRUTH_ANNOTATOR = "A1"
SECOND_ANNOTATOR = "A2"
# acceptable ratio between the SED time a config asks for and what its durations supply
FEASIBLE_RATIO = (0.5, 2.0)
_TRUNCATION_ATTEMPTS = 100
_MIN_SEGMENT_MS = 100

# cue and affect frequencies loosely follow how annotators describe SED
_CUE_WEIGHTS: dict[Cue, float] = {
    Cue.EYE_GAZE: 0.35,
    Cue.HEAD_MOTION: 0.25,
    Cue.FACIAL_EXPRESSION: 0.15,
    Cue.GESTURES: 0.1,
    Cue.ACOUSTIC: 0.08,
    Cue.LINGUISTIC: 0.07,
}
_AFFECT_WEIGHTS: dict[Affect, float] = {
    Affect.BOREDOM: 0.3,
    Affect.FRUSTRATION: 0.25,
    Affect.NERVOUSNESS: 0.15,
    Affect.DISAPPOINTMENT: 0.12,
    Affect.SUBMISSION: 0.08,
    Affect.ANGER: 0.05,
    Affect.OTHER: 0.05,
}
_CAUSES = ("robot misunderstanding", "waiting for the robot", "distraction", "repetitive dialog")
FINAL_CAUSE = "end of interaction"


def interaction_seed(seed: int, interaction_id: str) -> np.random.SeedSequence:
    """Seed of one interaction, derived from the corpus seed and a hash of its id."""
    digest = int(hashlib.sha256(interaction_id.encode("utf-8")).hexdigest(), 16)
    return np.random.SeedSequence([seed, digest])


def check_config(config: GeneratorConfig, layout: FeatureLayout) -> None:
    """Rejects configurations the generator cannot honour.

    Raises:
        ConfigError: If the emission table misses layout coordinates, a zone feature has no
            sonar to derive from, or the SED fraction is unreachable with the configured
            segment counts and durations.
    """
    missing = [
        f"{sid}.{name}"
        for sid in layout.stream_ids
        for name in layout.feature_names(sid)
        if f"{sid}.{name}" not in config.emissions
    ]
    if missing:
        raise ConfigError(f"emission table does not cover {len(missing)} coordinates: {', '.join(missing)}")
    for sid in layout.stream_ids:
        names = layout.feature_names(sid)
        for name in names:
            if config.emissions[f"{sid}.{name}"].kind == "zone" and "sonar_front" not in names:
                raise ConfigError(f"{sid}.{name} is a zone feature but stream {sid} has no sonar_front")
    check_timeline(config)


def check_timeline(config: GeneratorConfig) -> None:
    """Rejects SED fractions the configured segment counts and durations cannot reach.

    Raises:
        ConfigError: If the SED time or the engaged gaps are unreachable.
    """
    target_s = config.sed_fraction * config.duration.mean_s
    supplied_s = (config.segments_per_interaction - 1.0) * config.sed_duration.mean_s + config.final_sed_duration.mean_s
    ratio = target_s / supplied_s
    if not FEASIBLE_RATIO[0] <= ratio <= FEASIBLE_RATIO[1]:
        raise ConfigError(
            f"SED fraction {config.sed_fraction} of a {config.duration.mean_s:g} s interaction asks for "
            f"{target_s:.1f} s of SED, but {config.segments_per_interaction:g} segments of the configured "
            f"durations supply {supplied_s:.1f} s on average (ratio {ratio:.2f}, feasible "
            f"{FEASIBLE_RATIO[0]}..{FEASIBLE_RATIO[1]})"
        )
    engaged_s = (1.0 - config.sed_fraction) * config.duration.mean_s
    needed_s = (config.segments_per_interaction + 1.0) * config.min_engaged_gap_s
    if engaged_s < needed_s:
        raise ConfigError(
            f"{engaged_s:.1f} s of engaged time cannot hold {config.segments_per_interaction + 1:g} gaps of "
            f"at least {config.min_engaged_gap_s:g} s"
        )


def draw_duration(spec: DurationSpec, rng: np.random.Generator) -> float:
    """Gamma draw in seconds, redrawn below the truncation bound (then clipped)."""
    for _ in range(_TRUNCATION_ATTEMPTS):
        value = float(rng.gamma(spec.shape, spec.scale))
        if value >= spec.minimum_s:
            return value
    logger.debug("duration draw stayed below %.2f s; clipping", spec.minimum_s)
    return spec.minimum_s


# --- Timeline ---


def sed_timeline(config: GeneratorConfig, duration_ms: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Ground-truth SED segments ``(start_ms, end_ms)`` of one interaction.

    Segment count is one plus a Poisson draw; durations are gamma draws (the last one from
    the final-SED distribution) rescaled to the target SED fraction; engaged gaps get the
    minimum length each and split the remaining time by a flat Dirichlet draw.
    """
    n = 1 + int(rng.poisson(max(config.segments_per_interaction - 1.0, 0.0)))
    gap_ms = round(config.min_engaged_gap_s * 1000)
    target_ms = config.sed_fraction * duration_ms
    while True:
        lengths = [draw_duration(config.sed_duration, rng) for _ in range(n - 1)]
        lengths.append(draw_duration(config.final_sed_duration, rng))
        scaled = np.asarray(lengths) * (target_ms / sum(lengths))
        sed_ms = np.maximum(np.round(scaled), _MIN_SEGMENT_MS).astype(np.int64)
        free_ms = duration_ms - int(sed_ms.sum()) - (n + 1) * gap_ms
        if free_ms >= 0 or n == 1:
            break
        n -= 1
        logger.debug("dropping to %d SED segments to fit a %d ms interaction", n, duration_ms)
    free_ms = max(free_ms, 0)
    shares = rng.dirichlet(np.ones(n + 1))
    extra = np.floor(shares * free_ms).astype(np.int64)
    segments: list[tuple[int, int]] = []
    t = 0
    for i in range(n):
        t += gap_ms + int(extra[i])
        end = min(t + int(sed_ms[i]), duration_ms)
        if end - t >= _MIN_SEGMENT_MS:
            segments.append((t, end))
        t = end
    return segments


def state_at(segments: Sequence[tuple[int, int]], t_ms: IntArray) -> np.ndarray:
    """Ground-truth state (1 = SED) at each timestamp; segments are half-open."""
    state = np.zeros(t_ms.shape, dtype=np.int8)
    for start, end in segments:
        state[(t_ms >= start) & (t_ms < end)] = 1
    return state


def cue_intensity(segments: Sequence[tuple[int, int]], t_ms: IntArray, ramp_ms: float) -> FloatArray:
    """How strongly SED behaviour shows at each timestamp, in [0, 1].

    Behaviour follows the state with a linear ramp: it builds up over ``ramp_ms`` after a
    segment starts and fades over ``ramp_ms`` after it ends.
    """
    if ramp_ms <= 0.0:
        return state_at(segments, t_ms).astype(np.float64)
    t = t_ms.astype(np.float64)
    intensity = np.zeros_like(t)
    for start, end in segments:
        rise = np.clip((t - start) / ramp_ms, 0.0, 1.0)
        peak = min((end - start) / ramp_ms, 1.0)
        fall = peak * np.clip(1.0 - (t - end) / ramp_ms, 0.0, 1.0)
        inside = np.where(t < end, rise, fall)
        intensity = np.maximum(intensity, np.where(t >= start, inside, 0.0))
    return intensity


# --- Emissions ---


def sample_times(rate_hz: float, duration_ms: int) -> IntArray:
    """Native sample clock of a stream over ``[0, duration_ms)``."""
    n = int(np.ceil(duration_ms * rate_hz / 1000.0))
    times = np.floor(np.arange(n) * (1000.0 / rate_hz)).astype(np.int64)
    return times[times < duration_ms]


def emit(spec: EmissionSpec, intensity: FloatArray, rng: np.random.Generator) -> FloatArray:
    """Draws one feature for every sample; state parameters are blended by intensity."""
    match spec.kind:
        case "gaussian":
            mean = spec.engaged + intensity * (spec.sed - spec.engaged)
            sd = spec.engaged_sd + intensity * (spec.sed_sd - spec.engaged_sd)
            values = rng.normal(mean, sd)
            if spec.minimum is not None or spec.maximum is not None:
                values = np.clip(values, spec.minimum, spec.maximum)
            return values
        case "bernoulli":
            rate = spec.engaged + intensity * (spec.sed - spec.engaged)
            return (rng.random(intensity.shape) < rate).astype(np.float64)
        case _:
            return np.full(intensity.shape, np.nan)


def stream_series(
    sid: StreamId,
    names: Sequence[str],
    config: GeneratorConfig,
    segments: Sequence[tuple[int, int]],
    duration_ms: int,
    bursts: Sequence[tuple[float, float]],
    rng: np.random.Generator,
) -> StreamSeries:
    """Raw samples of one stream."""
    t_ms = sample_times(config.stream_rates_hz[sid], duration_ms)
    intensity = cue_intensity(segments, t_ms, config.cue_ramp_s * 1000.0)
    values = np.empty((t_ms.shape[0], len(names)))
    for j, name in enumerate(names):
        values[:, j] = emit(config.emissions[f"{sid}.{name}"], intensity, rng)
    for j, name in enumerate(names):
        if config.emissions[f"{sid}.{name}"].kind == "zone":
            sonar = values[:, names.index("sonar_front")]
            values[:, j] = [float(engagement_zone(d)) for d in sonar]
    dropped = rng.random(t_ms.shape[0]) < config.missing_rate.get(sid, 0.0)
    if sid.is_face_derived:
        for start, end in bursts:
            dropped |= (t_ms >= start) & (t_ms < end)
    values[dropped] = np.nan
    return StreamSeries(sid, t_ms, values)


# --- Annotators ---


def _pick[T](weights: dict[T, float], k: int, rng: np.random.Generator) -> list[T]:
    options = list(weights)
    p = np.array([weights[o] for o in options])
    chosen = rng.choice(len(options), size=k, replace=False, p=p / p.sum())
    return [options[i] for i in chosen]


def truth_track(
    interaction_id: str, duration_ms: int, segments: Sequence[tuple[int, int]], rng: np.random.Generator
) -> AnnotationTrack:
    """The ground-truth annotator: exact segment bounds plus drawn cues, affects and causes."""
    records: list[Segment] = []
    for i, (start, end) in enumerate(segments):
        final = i == len(segments) - 1
        cues = _pick(_CUE_WEIGHTS, 1 + int(rng.integers(0, 3)), rng)
        affects = _pick(_AFFECT_WEIGHTS, int(rng.integers(0, 2)), rng)
        cause = FINAL_CAUSE if final else _CAUSES[int(rng.integers(0, len(_CAUSES)))]
        records.append(
            Segment(
                annotator=TRUTH_ANNOTATOR,
                interaction=interaction_id,
                start_ms=start,
                end_ms=end,
                cues=cues,
                affects=affects,
                cause=cause,
            )
        )
    return AnnotationTrack(TRUTH_ANNOTATOR, interaction_id, 0, duration_ms, tuple(records))


def second_annotator(track: AnnotationTrack, config: GeneratorConfig, rng: np.random.Generator) -> AnnotationTrack:
    """A noisy copy of the ground truth: jittered bounds and occasional splits by a short gap."""
    noise = config.annotator_noise
    if noise.is_silent:
        return _relabel(track, SECOND_ANNOTATOR, [(s.start_ms, s.end_ms, s) for s in track.segments])
    bounds: list[tuple[int, int, Segment]] = []
    for segment in track.segments:
        start = round(segment.start_ms + rng.normal(0.0, noise.jitter_ms)) if noise.jitter_ms else segment.start_ms
        end = round(segment.end_ms + rng.normal(0.0, noise.jitter_ms)) if noise.jitter_ms else segment.end_ms
        start, end = max(start, track.start_ms), min(end, track.end_ms)
        if end - start < _MIN_SEGMENT_MS:
            start, end = segment.start_ms, segment.end_ms
        low, high = noise.split_gap_ms
        if rng.random() < noise.split_probability and end - start > high + 2 * _MIN_SEGMENT_MS:
            gap = int(rng.integers(low, high + 1))
            cut = int(rng.integers(start + _MIN_SEGMENT_MS, end - gap - _MIN_SEGMENT_MS + 1))
            bounds.extend([(start, cut, segment), (cut + gap, end, segment)])
        else:
            bounds.append((start, end, segment))
    resolved: list[tuple[int, int, Segment]] = []
    previous_end = track.start_ms
    for start, end, segment in sorted(bounds, key=lambda b: (b[0], b[1])):
        start = max(start, previous_end)
        if end - start < _MIN_SEGMENT_MS:
            continue
        resolved.append((start, end, segment))
        previous_end = end
    return _relabel(track, SECOND_ANNOTATOR, resolved)


def _relabel(track: AnnotationTrack, annotator: str, bounds: Sequence[tuple[int, int, Segment]]) -> AnnotationTrack:
    segments = tuple(
        segment.model_copy(update={"annotator": annotator, "start_ms": start, "end_ms": end})
        for start, end, segment in bounds
    )
    return AnnotationTrack(annotator, track.interaction_id, track.start_ms, track.end_ms, segments)


# --- Interactions and corpora ---


def _interaction_rngs(
    config: GeneratorConfig, interaction_id: str
) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent timeline, emission and annotation generators of one interaction."""
    timeline, emission, annotation = (
        np.random.default_rng(s) for s in interaction_seed(config.seed, interaction_id).spawn(3)
    )
    return timeline, emission, annotation


@dataclass(frozen=True, slots=True)
class SyntheticTimeline:
    """The state timeline and annotator tracks of one interaction, without its streams.

    Attributes:
        interaction_id (str): Interaction id.
        duration_ms (int): Interaction length.
        multiparty (bool): Whether the interaction is marked as multiparty.
        tracks (tuple[AnnotationTrack, AnnotationTrack]): Ground truth first, then the noisy annotator.
        truth (tuple[tuple[int, int], ...]): Ground-truth SED segments.
    """

    interaction_id: str
    duration_ms: int
    multiparty: bool
    tracks: tuple[AnnotationTrack, AnnotationTrack]
    truth: tuple[tuple[int, int], ...]

    @property
    def sed_ms(self) -> int:
        """Total ground-truth SED time."""
        return sum(end - start for start, end in self.truth)

    def labels(self, *, merge_gap_s: float | None = None) -> FrameLabels:
        """Frame labels of both annotators, optionally after the merge correction."""
        return track_labels(self.interaction_id, self.tracks, merge_gap_s=merge_gap_s)


def generate_timeline(config: GeneratorConfig, interaction_id: str, *, checked: bool = False) -> SyntheticTimeline:
    """Draws the timeline and annotator tracks of one interaction.

    Consumes the same generators as `generate_interaction`, so both agree on the timeline
    and the tracks of an id.

    Raises:
        ConfigError: If the SED fraction is unreachable.
    """
    if not checked:
        check_timeline(config)
    timeline_rng, _, annotation_rng = _interaction_rngs(config, interaction_id)
    duration_ms = round(draw_duration(config.duration, timeline_rng) * 1000)
    multiparty = bool(timeline_rng.random() < config.multiparty_rate)
    segments = sed_timeline(config, duration_ms, timeline_rng)
    truth = truth_track(interaction_id, duration_ms, segments, annotation_rng)
    second = second_annotator(truth, config, annotation_rng)
    return SyntheticTimeline(interaction_id, duration_ms, multiparty, (truth, second), tuple(segments))


def generate_timelines(config: GeneratorConfig, n: int) -> Iterator[SyntheticTimeline]:
    """Timelines of a corpus of n interactions, lazily."""
    check_timeline(config)
    for interaction_id in interaction_ids(config, n):
        yield generate_timeline(config, interaction_id, checked=True)


@dataclass(frozen=True, slots=True)
class SyntheticInteraction:
    """One generated interaction: raw streams, both annotator tracks and the true timeline.

    Attributes:
        interaction_id (str): Interaction id.
        duration_ms (int): Interaction length; the interaction spans ``[0, duration_ms)``.
        multiparty (bool): Whether the interaction is marked as multiparty.
        series (dict[StreamId, StreamSeries]): Raw samples per stream.
        tracks (tuple[AnnotationTrack, AnnotationTrack]): Ground truth first, then the noisy annotator.
        truth (tuple[tuple[int, int], ...]): Ground-truth SED segments.
    """

    interaction_id: str
    duration_ms: int
    multiparty: bool
    series: dict[StreamId, StreamSeries]
    tracks: tuple[AnnotationTrack, AnnotationTrack]
    truth: tuple[tuple[int, int], ...]

    def states(self, t_ms: IntArray) -> np.ndarray:
        """Ground-truth state at the given timestamps."""
        return state_at(self.truth, t_ms)

    def samples(self) -> Iterator[StreamSample]:
        """Every raw sample in timestamp order; ties follow the layout's stream order."""

        def stream_samples(order: int, series: StreamSeries) -> Iterator[tuple[int, int, StreamSample]]:
            for t, row in zip(series.t_ms.tolist(), series.values, strict=True):
                yield t, order, StreamSample(t, series.stream, row)

        merged = heapq.merge(
            *(stream_samples(i, s) for i, s in enumerate(self.series.values())),
            key=lambda item: (item[0], item[1]),
        )
        for _, _, sample in merged:
            yield sample

    @property
    def header(self) -> AnnotationHeader:
        """Annotation-file header of the interaction."""
        return AnnotationHeader(
            interaction=self.interaction_id,
            start_ms=0,
            end_ms=self.duration_ms,
            multiparty=self.multiparty,
            annotators=[t.annotator for t in self.tracks],
        )

    def to_interaction(self) -> Interaction:
        """The in-memory interaction the corpus loader would build from the written files."""
        return Interaction(self.interaction_id, 0, self.duration_ms, dict(self.series), self.tracks, self.multiparty)

    def write(self, root: Path) -> ManifestEntry:
        """Writes the stream and annotation files under ``root``; returns the manifest entry."""
        streams = Path("streams") / f"{self.interaction_id}.jsonl"
        annotations = Path("annotations") / f"{self.interaction_id}.jsonl"
        write_stream_file(root / streams, self.interaction_id, self.samples())
        write_annotation_file(root / annotations, self.header, self.tracks)
        return ManifestEntry(
            id=self.interaction_id,
            streams=streams.as_posix(),
            annotations=annotations.as_posix(),
            multiparty=self.multiparty,
        )


def generate_interaction(config: GeneratorConfig, layout: FeatureLayout, interaction_id: str) -> SyntheticInteraction:
    """Generates one interaction, deterministically from the config seed and the id.

    Raises:
        ConfigError: If the configuration is infeasible for this layout.
    """
    check_config(config, layout)
    timeline = generate_timeline(config, interaction_id, checked=True)
    duration_ms, segments = timeline.duration_ms, timeline.truth
    emission_rng = _interaction_rngs(config, interaction_id)[1]
    n_bursts = int(emission_rng.poisson(config.occlusion_rate_per_min * duration_ms / 60_000.0))
    bursts = []
    for _ in range(n_bursts):
        start = float(emission_rng.uniform(0.0, duration_ms))
        bursts.append((start, start + float(emission_rng.exponential(config.occlusion_mean_s * 1000.0))))
    series = {
        sid: stream_series(sid, layout.feature_names(sid), config, segments, duration_ms, bursts, emission_rng)
        for sid in layout.stream_ids
    }
    logger.debug(
        "%s: %.1f s, %d SED segments, %d occlusions", interaction_id, duration_ms / 1000, len(segments), n_bursts
    )
    return SyntheticInteraction(interaction_id, duration_ms, timeline.multiparty, series, timeline.tracks, segments)


def interaction_ids(config: GeneratorConfig, n: int) -> list[str]:
    """Ids of a corpus of n interactions."""
    return [f"{config.id_prefix}-{i:04d}" for i in range(n)]


def generate_interactions(config: GeneratorConfig, layout: FeatureLayout, n: int) -> Iterator[SyntheticInteraction]:
    """Generates a corpus in memory, one interaction at a time."""
    if n < 1:
        raise ConfigError(f"a corpus needs at least one interaction, got {n}")
    for interaction_id in interaction_ids(config, n):
        yield generate_interaction(config, layout, interaction_id)


def generate_corpus(config: GeneratorConfig, layout: FeatureLayout, n: int, out_dir: Path) -> CorpusManifest:
    """Writes n interactions and their manifest to ``out_dir``; reruns are byte-identical."""
    make_dirs([out_dir / "streams", out_dir / "annotations"])
    entries = [interaction.write(out_dir) for interaction in generate_interactions(config, layout, n)]
    manifest = CorpusManifest(seed=config.seed, layout=layout.name, interactions=entries)
    write_manifest(out_dir, manifest)
    logger.info("wrote %d synthetic interactions to %s", n, out_dir)
    return manifest


__all__ = [
    "FEASIBLE_RATIO",
    "FINAL_CAUSE",
    "SECOND_ANNOTATOR",
    "TRUTH_ANNOTATOR",
    "SyntheticInteraction",
    "SyntheticTimeline",
    "check_config",
    "check_timeline",
    "cue_intensity",
    "draw_duration",
    "emit",
    "generate_corpus",
    "generate_interaction",
    "generate_interactions",
    "generate_timeline",
    "generate_timelines",
    "interaction_ids",
    "interaction_seed",
    "sample_times",
    "second_annotator",
    "sed_timeline",
    "state_at",
    "stream_series",
    "truth_track",
]
