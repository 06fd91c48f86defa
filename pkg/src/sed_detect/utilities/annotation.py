"""
`utilities/annotation` module.

SED annotation tracks, the short-gap merge correction, frame-level labels under the
midpoint rule, Cohen's kappa and annotation statistics.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from sed_detect.models import DEFAULT_FRAME_PERIOD_MS, Segment
from sed_detect.types import SED, AnnotationError, BoolArray, LabelArray
from sed_detect.utilities.streams import frame_count


logger = logging.getLogger(__name__)

DEFAULT_MERGE_GAP_S = 1.0


@dataclass(frozen=True, slots=True)
class AnnotationTrack:
    """One annotator's SED segments over one interaction.

    Attributes:
        annotator (str): Annotator id.
        interaction_id (str): Interaction id.
        start_ms (int): Interaction start on the stream clock.
        end_ms (int): Interaction end.
        segments (tuple[Segment, ...]): Sorted, pairwise disjoint SED segments.
    """

    annotator: str
    interaction_id: str
    start_ms: int
    end_ms: int
    segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        """Validates ordering, disjointness and bounds.

        Raises:
            AnnotationError: On any violation.
        """
        if self.start_ms >= self.end_ms:
            raise AnnotationError(f"{self.interaction_id}: interaction start must precede its end")
        previous_end = self.start_ms
        for segment in self.segments:
            if segment.annotator != self.annotator or segment.interaction != self.interaction_id:
                raise AnnotationError(
                    f"segment of {segment.annotator}/{segment.interaction} in track {self.annotator}/{self.interaction_id}"
                )
            if segment.start_ms < previous_end:
                raise AnnotationError(
                    f"{self.interaction_id}/{self.annotator}: segments overlap, are unsorted or start before the interaction at {segment.start_ms} ms"
                )
            if segment.end_ms > self.end_ms:
                raise AnnotationError(
                    f"{self.interaction_id}/{self.annotator}: segment ends at {segment.end_ms} ms after the interaction end {self.end_ms} ms"
                )
            previous_end = segment.end_ms

    @property
    def duration_ms(self) -> int:
        """Annotated interaction length."""
        return self.end_ms - self.start_ms

    @property
    def sed_ms(self) -> int:
        """Total SED time."""
        return sum(s.duration_ms for s in self.segments)

    @classmethod
    def from_segments(
        cls, annotator: str, interaction_id: str, start_ms: int, end_ms: int, segments: Iterable[Segment]
    ) -> "AnnotationTrack":
        """Builds a track from unordered segments."""
        ordered = sorted(segments, key=lambda s: (s.start_ms, s.end_ms))
        return cls(annotator, interaction_id, start_ms, end_ms, tuple(ordered))


def _union[T](first: Sequence[T], second: Sequence[T]) -> list[T]:
    return list(dict.fromkeys([*first, *second]))


def _absorb(current: Segment, following: Segment) -> Segment:
    causes = [c for c in (current.cause, following.cause) if c]
    return current.model_copy(
        update={
            "end_ms": max(current.end_ms, following.end_ms),
            "cues": _union(current.cues, following.cues),
            "affects": _union(current.affects, following.affects),
            "cause": "; ".join(dict.fromkeys(causes)) or None,
        }
    )


def merge_short_gaps(track: AnnotationTrack, max_gap_s: float = DEFAULT_MERGE_GAP_S) -> AnnotationTrack:
    """Absorbs every engaged gap strictly shorter than ``max_gap_s`` between two SED segments.

    One left-to-right pass reaches the fixpoint: the running segment keeps growing while
    the next gap is short, so every gap left in the output is at least ``max_gap_s``.
    Cues, affects and causes of merged segments are united in order of appearance.
    """
    if not track.segments:
        return track
    max_gap_ms = round(max_gap_s * 1000.0)
    merged: list[Segment] = []
    current = track.segments[0]
    for following in track.segments[1:]:
        if following.start_ms - current.end_ms < max_gap_ms:
            current = _absorb(current, following)
        else:
            merged.append(current)
            current = following
    merged.append(current)
    if len(merged) != len(track.segments):
        logger.debug(
            "%s/%s: merged %d segments into %d",
            track.interaction_id,
            track.annotator,
            len(track.segments),
            len(merged),
        )
    return AnnotationTrack(track.annotator, track.interaction_id, track.start_ms, track.end_ms, tuple(merged))


def track_frame_labels(track: AnnotationTrack, frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS) -> LabelArray:
    """Per-frame labels of one track: SED iff the frame midpoint lies in a segment."""
    n_frames = frame_count(track.start_ms, track.end_ms, frame_period_ms)
    labels = np.zeros(n_frames, dtype=np.int8)
    # doubled midpoints stay integral: 2*(start + (k + 1/2) L)
    midpoints2 = 2 * track.start_ms + (2 * np.arange(n_frames, dtype=np.int64) + 1) * frame_period_ms
    for segment in track.segments:
        inside = (midpoints2 >= 2 * segment.start_ms) & (midpoints2 < 2 * segment.end_ms)
        labels[inside] = SED
    return labels


@dataclass(frozen=True, slots=True)
class FrameLabels:
    """Frame labels of two annotators over one interaction plus their agreement mask.

    Attributes:
        interaction_id (str): Interaction id.
        labels_a (LabelArray): First annotator's labels, 0 engaged, 1 SED.
        labels_b (LabelArray): Second annotator's labels.
        agreement (BoolArray): True where both annotators assign the same label.
    """

    interaction_id: str
    labels_a: LabelArray
    labels_b: LabelArray
    agreement: BoolArray

    def __len__(self) -> int:
        """Number of frames."""
        return int(self.labels_a.shape[0])

    @property
    def consensus(self) -> LabelArray:
        """The agreed-label channel; meaningful only where `agreement` holds."""
        return self.labels_a

    @classmethod
    def single(cls, interaction_id: str, labels: LabelArray) -> "FrameLabels":
        """Labels from one annotator, agreed everywhere."""
        return cls(interaction_id, labels, labels.copy(), np.ones(labels.shape[0], dtype=np.bool_))


def frame_labels(
    track_a: AnnotationTrack, track_b: AnnotationTrack, frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS
) -> FrameLabels:
    """Frame labels of two annotators of the same interaction.

    Raises:
        AnnotationError: If the tracks disagree on the interaction or its bounds.
    """
    if track_a.interaction_id != track_b.interaction_id:
        raise AnnotationError(
            f"tracks cover different interactions: {track_a.interaction_id} and {track_b.interaction_id}"
        )
    if (track_a.start_ms, track_a.end_ms) != (track_b.start_ms, track_b.end_ms):
        raise AnnotationError(
            f"{track_a.interaction_id}: annotators disagree on the interaction bounds "
            f"[{track_a.start_ms}, {track_a.end_ms}) vs [{track_b.start_ms}, {track_b.end_ms})"
        )
    labels_a = track_frame_labels(track_a, frame_period_ms)
    labels_b = track_frame_labels(track_b, frame_period_ms)
    return FrameLabels(track_a.interaction_id, labels_a, labels_b, labels_a == labels_b)


def cohen_kappa(labels_a: LabelArray, labels_b: LabelArray) -> float:
    """Cohen's kappa of two binary label vectors.

    Returns 1 when chance agreement is total (both vectors constant and equal).

    Raises:
        AnnotationError: If the vectors are empty or differ in length.
    """
    a = np.asarray(labels_a, dtype=np.float64)
    b = np.asarray(labels_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise AnnotationError(f"label vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise AnnotationError("kappa needs at least one frame")
    observed = float(np.mean(a == b))
    pa, pb = float(a.mean()), float(b.mean())
    chance = pa * pb + (1.0 - pa) * (1.0 - pb)
    if chance >= 1.0:
        return 1.0
    return (observed - chance) / (1.0 - chance)


@dataclass(frozen=True, slots=True)
class KappaReport:
    """Pooled kappa over all frames of a corpus with its per-interaction breakdown."""

    overall: float
    n_frames: int
    per_interaction: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        """JSON form."""
        return {"kappa": self.overall, "n_frames": self.n_frames, "per_interaction": self.per_interaction}


def corpus_kappa(labels: Sequence[FrameLabels]) -> KappaReport:
    """Kappa pooled over every frame of every interaction."""
    if not labels:
        raise AnnotationError("kappa needs at least one interaction")
    a = np.concatenate([fl.labels_a for fl in labels])
    b = np.concatenate([fl.labels_b for fl in labels])
    per_interaction = {fl.interaction_id: cohen_kappa(fl.labels_a, fl.labels_b) for fl in labels if len(fl)}
    return KappaReport(cohen_kappa(a, b), int(a.shape[0]), per_interaction)


# --- Statistics ---


def _mean_sd(values: Sequence[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    array = np.asarray(values, dtype=np.float64)
    return float(array.mean()), float(array.std())


@dataclass(slots=True)
class AnnotatorCounts:
    """Occurrence counts for one annotator."""

    segments: int = 0
    cues: Counter[str] = field(default_factory=Counter[str])
    primary_cues: Counter[str] = field(default_factory=Counter[str])
    affects: Counter[str] = field(default_factory=Counter[str])
    causes: Counter[str] = field(default_factory=Counter[str])

    def add(self, segment: Segment) -> None:
        """Counts one segment."""
        self.segments += 1
        self.cues.update(str(c) for c in segment.cues)
        if segment.cues:
            self.primary_cues[str(segment.cues[0])] += 1
        self.affects.update(str(a) for a in segment.affects)
        if segment.cause:
            self.causes[segment.cause] += 1

    def to_dict(self) -> dict[str, Any]:
        """JSON form, counts sorted by frequency."""
        return {
            "segments": self.segments,
            "cues": dict(self.cues.most_common()),
            "primary_cues": dict(self.primary_cues.most_common()),
            "affects": dict(self.affects.most_common()),
            "causes": dict(self.causes.most_common()),
        }


@dataclass(frozen=True, slots=True)
class AnnotationStats:
    """Corpus-level annotation statistics. Durations are in seconds, sds are population."""

    n_tracks: int
    n_interactions: int
    counts: AnnotatorCounts
    per_annotator: dict[str, AnnotatorCounts]
    segments_per_track: float
    sed_duration_mean_s: float | None
    sed_duration_sd_s: float | None
    final_sed_duration_mean_s: float | None
    final_sed_duration_sd_s: float | None
    interaction_duration_mean_s: float | None
    interaction_duration_sd_s: float | None
    sed_fraction: float

    @property
    def cue_counts(self) -> Counter[str]:
        """Cue occurrences over every track."""
        return self.counts.cues

    @property
    def affect_counts(self) -> Counter[str]:
        """Affect occurrences over every track."""
        return self.counts.affects

    @property
    def cause_counts(self) -> Counter[str]:
        """Cause occurrences over every track."""
        return self.counts.causes

    def to_dict(self) -> dict[str, Any]:
        """JSON form."""
        return {
            "n_tracks": self.n_tracks,
            "n_interactions": self.n_interactions,
            "counts": self.counts.to_dict(),
            "per_annotator": {name: c.to_dict() for name, c in sorted(self.per_annotator.items())},
            "segments_per_track": self.segments_per_track,
            "sed_duration_s": {"mean": self.sed_duration_mean_s, "sd": self.sed_duration_sd_s},
            "final_sed_duration_s": {
                "mean": self.final_sed_duration_mean_s,
                "sd": self.final_sed_duration_sd_s,
            },
            "interaction_duration_s": {
                "mean": self.interaction_duration_mean_s,
                "sd": self.interaction_duration_sd_s,
            },
            "sed_fraction": self.sed_fraction,
        }


def annotation_stats(tracks: Sequence[AnnotationTrack]) -> AnnotationStats:
    """Cue, affect and cause counts plus SED segment and duration statistics.

    Raises:
        AnnotationError: If no track is given.
    """
    if not tracks:
        raise AnnotationError("statistics need at least one track")
    counts = AnnotatorCounts()
    per_annotator: dict[str, AnnotatorCounts] = {}
    durations: list[float] = []
    final_durations: list[float] = []
    interaction_durations: dict[str, float] = {}
    for track in tracks:
        annotator_counts = per_annotator.setdefault(track.annotator, AnnotatorCounts())
        for segment in track.segments:
            counts.add(segment)
            annotator_counts.add(segment)
            durations.append(segment.duration_ms / 1000.0)
        if track.segments:
            final_durations.append(track.segments[-1].duration_ms / 1000.0)
        interaction_durations[track.interaction_id] = track.duration_ms / 1000.0
    sed_mean, sed_sd = _mean_sd(durations)
    final_mean, final_sd = _mean_sd(final_durations)
    interaction_mean, interaction_sd = _mean_sd(list(interaction_durations.values()))
    return AnnotationStats(
        n_tracks=len(tracks),
        n_interactions=len(interaction_durations),
        counts=counts,
        per_annotator=per_annotator,
        segments_per_track=counts.segments / len(tracks),
        sed_duration_mean_s=sed_mean,
        sed_duration_sd_s=sed_sd,
        final_sed_duration_mean_s=final_mean,
        final_sed_duration_sd_s=final_sd,
        interaction_duration_mean_s=interaction_mean,
        interaction_duration_sd_s=interaction_sd,
        sed_fraction=sum(t.sed_ms for t in tracks) / sum(t.duration_ms for t in tracks),
    )


__all__ = [
    "DEFAULT_MERGE_GAP_S",
    "AnnotationStats",
    "AnnotationTrack",
    "AnnotatorCounts",
    "FrameLabels",
    "KappaReport",
    "annotation_stats",
    "cohen_kappa",
    "corpus_kappa",
    "frame_labels",
    "merge_short_gaps",
    "track_frame_labels",
]
