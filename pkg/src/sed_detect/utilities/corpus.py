"""
`utilities/corpus` module.

Reading and writing corpus directories: the ``manifest.json`` index, one stream file and
one annotation file per interaction. An `Interaction` bundles the raw streams of one
recording with its annotation tracks; `prepare_interaction` turns it into pooled frames
and frame labels, which is all the learning code needs.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging
import math

from collections import defaultdict
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from sed_detect.models import (
    DEFAULT_FRAME_PERIOD_MS,
    STREAM_SCHEMA,
    AnnotationHeader,
    CorpusManifest,
    FeatureLayout,
    ManifestEntry,
    Segment,
    StreamHeader,
    StreamRecord,
)
from sed_detect.types import AnnotationError, ConfigError, DataError, Party, StreamError, StreamId
from sed_detect.utilities.annotation import AnnotationTrack, FrameLabels, frame_labels, merge_short_gaps
from sed_detect.utilities.streams import FrameSequence, StreamSample, StreamSeries, frame_sequence
from sed_detect.utilities.utilities import load_file, read_jsonl, retrieve_layout, write_json, write_jsonl


logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
_STREAM_NAMES = frozenset(str(s) for s in StreamId)


# --- Stream files ---


def iter_stream_file(path: Path) -> Iterator[StreamSample | StreamHeader]:
    """Yields the optional header, then every sample of a stream file in file order.

    Raises:
        StreamError: On an unknown stream id or a malformed record.
    """
    for line_no, record in enumerate(read_jsonl(path), start=1):
        if "schema" in record:
            if record["schema"] != STREAM_SCHEMA:
                raise StreamError(f"{path}:{line_no}: unsupported schema {record['schema']!r}")
            yield StreamHeader.model_validate(record)
            continue
        if record.get("stream") not in _STREAM_NAMES:
            raise StreamError(f"{path}:{line_no}: unknown stream {record.get('stream')!r}")
        try:
            parsed = StreamRecord.model_validate(record)
        except ValidationError as e:
            raise StreamError(f"{path}:{line_no}: malformed sample ({e.error_count()} errors)") from e
        yield StreamSample.from_record(parsed.t_ms, parsed.stream, parsed.values)


def read_stream_file(path: Path, layout: FeatureLayout) -> tuple[str | None, dict[StreamId, StreamSeries]]:
    """Reads a stream file into one sorted series per stream.

    Returns:
        tuple[str | None, dict[StreamId, StreamSeries]]: The header's interaction id (if
        any) and the series of every stream present in the file.

    Raises:
        StreamError: If a stream's samples are not sorted by timestamp.
        LayoutError: If a sample's dimension disagrees with the layout.
    """
    interaction_id: str | None = None
    grouped: dict[StreamId, list[StreamSample]] = defaultdict(list)
    for item in iter_stream_file(path):
        if isinstance(item, StreamHeader):
            interaction_id = item.interaction
        else:
            grouped[item.stream].append(item)
    series = {
        stream_id: StreamSeries.from_samples(stream_id, grouped[stream_id], layout.dimension(stream_id))
        for stream_id in layout.stream_ids
        if stream_id in grouped
    }
    return interaction_id, series


def sample_record(sample: StreamSample) -> dict[str, Any]:
    """The stream-file record of a sample; non-finite values become ``null``."""
    return {
        "t_ms": sample.t_ms,
        "stream": str(sample.stream),
        "values": [v if math.isfinite(v) else None for v in sample.values.tolist()],
    }


def write_stream_file(path: Path, interaction_id: str, samples: Iterable[StreamSample]) -> int:
    """Writes a header and the samples in the given order; returns the sample count."""

    def records() -> Iterator[dict[str, Any]]:
        yield StreamHeader(interaction=interaction_id).model_dump(by_alias=True)
        for sample in samples:
            yield sample_record(sample)

    return write_jsonl(path, records()) - 1


# --- Annotation files ---


def read_annotation_file(path: Path) -> tuple[AnnotationHeader, tuple[AnnotationTrack, ...]]:
    """Reads an annotation file into one track per declared annotator, in header order.

    Raises:
        AnnotationError: If the header is missing or a segment names an undeclared annotator
            or another interaction.
    """
    records = iter(read_jsonl(path))
    try:
        header = AnnotationHeader.model_validate(next(records))
    except StopIteration as e:
        raise AnnotationError(f"{path}: empty annotation file") from e
    except ValidationError as e:
        raise AnnotationError(f"{path}: first record must be the annotation header ({e.error_count()} errors)") from e
    segments: dict[str, list[Segment]] = {annotator: [] for annotator in header.annotators}
    for line_no, record in enumerate(records, start=2):
        try:
            segment = Segment.model_validate(record)
        except ValidationError as e:
            raise AnnotationError(f"{path}:{line_no}: malformed segment ({e.error_count()} errors)") from e
        if segment.annotator not in segments:
            raise AnnotationError(f"{path}:{line_no}: undeclared annotator {segment.annotator!r}")
        if segment.interaction != header.interaction:
            raise AnnotationError(f"{path}:{line_no}: segment of interaction {segment.interaction!r}")
        segments[segment.annotator].append(segment)
    tracks = tuple(
        AnnotationTrack.from_segments(annotator, header.interaction, header.start_ms, header.end_ms, segs)
        for annotator, segs in segments.items()
    )
    return header, tracks


def write_annotation_file(path: Path, header: AnnotationHeader, tracks: Sequence[AnnotationTrack]) -> int:
    """Writes the header followed by every track's segments; returns the segment count."""
    records: list[dict[str, Any]] = [header.model_dump(mode="json", by_alias=True)]
    records.extend(
        segment.model_dump(mode="json") for track in tracks for segment in track.segments
    )
    return write_jsonl(path, records) - 1


# --- Interactions and corpora ---


def track_labels(
    interaction_id: str,
    tracks: Sequence[AnnotationTrack],
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS,
    *,
    merge_gap_s: float | None = None,
) -> FrameLabels:
    """Frame labels of the first two annotation tracks, optionally after the merge correction.

    A single annotator is agreed with itself everywhere.

    Raises:
        AnnotationError: If there is no track.
    """
    if not tracks:
        raise AnnotationError(f"{interaction_id}: no annotation tracks")
    if merge_gap_s is not None:
        tracks = [merge_short_gaps(track, merge_gap_s) for track in tracks]
    second = tracks[1] if len(tracks) > 1 else tracks[0]
    return frame_labels(tracks[0], second, frame_period_ms)


@dataclass(frozen=True, slots=True)
class Interaction:
    """Raw streams and annotation tracks of one recorded interaction.

    Attributes:
        interaction_id (str): Interaction id.
        start_ms (int): Annotated interaction start; frame 0 begins here.
        end_ms (int): Annotated interaction end.
        series (dict[StreamId, StreamSeries]): Sorted samples per stream present.
        tracks (tuple[AnnotationTrack, ...]): One track per annotator, first annotator first.
        multiparty (bool): Whether several users took part.
    """

    interaction_id: str
    start_ms: int
    end_ms: int
    series: dict[StreamId, StreamSeries]
    tracks: tuple[AnnotationTrack, ...]
    multiparty: bool = False

    def labels(
        self, frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS, *, merge_gap_s: float | None = None
    ) -> FrameLabels:
        """Frame labels of the first two annotators, optionally after the merge correction."""
        return track_labels(self.interaction_id, self.tracks, frame_period_ms, merge_gap_s=merge_gap_s)

    def frames(self, layout: FeatureLayout, frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS) -> FrameSequence:
        """Pooled frames covering the annotated interaction."""
        return prepare_frames(self, layout, frame_period_ms)


def prepare_frames(
    interaction: Interaction, layout: FeatureLayout, frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS
) -> FrameSequence:
    """Integrates and aligns an interaction's streams over ``[start_ms, end_ms)``."""
    return frame_sequence(
        interaction.series,
        layout,
        interaction_id=interaction.interaction_id,
        start_ms=interaction.start_ms,
        end_ms=interaction.end_ms,
        frame_period_ms=frame_period_ms,
    )


@dataclass(frozen=True, slots=True)
class PreparedInteraction:
    """Pooled (not yet imputed) frames of one interaction with their frame labels."""

    interaction_id: str
    frames: FrameSequence
    labels: FrameLabels
    multiparty: bool = False

    def __post_init__(self) -> None:
        """Frames and labels must have the same length."""
        if self.frames.n_frames != len(self.labels):
            raise AnnotationError(
                f"{self.interaction_id}: {self.frames.n_frames} frames but {len(self.labels)} frame labels"
            )


def prepare_interaction(
    interaction: Interaction,
    layout: FeatureLayout,
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS,
    *,
    merge_gap_s: float | None = None,
) -> PreparedInteraction:
    """Frames and labels of one interaction; the raw streams are no longer needed afterwards."""
    return PreparedInteraction(
        interaction.interaction_id,
        prepare_frames(interaction, layout, frame_period_ms),
        interaction.labels(frame_period_ms, merge_gap_s=merge_gap_s),
        interaction.multiparty,
    )


def manifest_path(data: Path) -> Path:
    """Accepts either a corpus directory or its manifest file."""
    return data / MANIFEST_NAME if data.is_dir() else data


def load_manifest(data: Path) -> tuple[CorpusManifest, Path]:
    """Loads a corpus manifest; returns it with the directory its paths are relative to."""
    path = manifest_path(data)
    try:
        manifest = CorpusManifest.model_validate_json(load_file(path))
    except ValidationError as e:
        raise ConfigError(f"invalid corpus manifest {path}: {e.error_count()} validation errors") from e
    return manifest, path.parent


def write_manifest(out_dir: Path, manifest: CorpusManifest) -> Path:
    """Writes ``manifest.json`` into a corpus directory."""
    return write_json(out_dir / MANIFEST_NAME, manifest)


def load_interaction(entry: ManifestEntry, root: Path, layout: FeatureLayout) -> Interaction:
    """Loads the stream and annotation files of one manifest entry.

    Raises:
        AnnotationError: If the annotation header names another interaction.
        StreamError: If the stream header names another interaction.
    """
    header, tracks = read_annotation_file(root / entry.annotations)
    if header.interaction != entry.id:
        raise AnnotationError(f"{entry.annotations} annotates {header.interaction!r}, manifest says {entry.id!r}")
    stream_id, series = read_stream_file(root / entry.streams, layout)
    if stream_id is not None and stream_id != entry.id:
        raise StreamError(f"{entry.streams} holds {stream_id!r}, manifest says {entry.id!r}")
    if header.multiparty != entry.multiparty:
        logger.warning("%s: manifest and annotation header disagree on multiparty; using the header", entry.id)
    return Interaction(entry.id, header.start_ms, header.end_ms, series, tracks, header.multiparty)


@dataclass(frozen=True, slots=True)
class Corpus:
    """A loaded corpus: its manifest, feature layout and the selected entries."""

    root: Path
    manifest: CorpusManifest
    layout: FeatureLayout
    entries: tuple[ManifestEntry, ...] = field(default=())

    @property
    def ids(self) -> list[str]:
        """Selected interaction ids in manifest order."""
        return [entry.id for entry in self.entries]

    def __len__(self) -> int:
        """Number of selected interactions."""
        return len(self.entries)

    def select(self, ids: Iterable[str]) -> "Corpus":
        """The same corpus restricted to the given interactions, in manifest order.

        Raises:
            DataError: If an id is not among the selected interactions.
        """
        wanted = set(ids)
        unknown = sorted(wanted - set(self.ids))
        if unknown:
            raise DataError(f"interactions not in the corpus selection: {', '.join(unknown)}")
        return replace(self, entries=tuple(entry for entry in self.entries if entry.id in wanted))

    def interactions(self) -> Iterator[Interaction]:
        """Loads the selected interactions one at a time."""
        for entry in self.entries:
            yield load_interaction(entry, self.root, self.layout)

    def annotations(self) -> Iterator[tuple[AnnotationHeader, tuple[AnnotationTrack, ...]]]:
        """Reads only the annotation files of the selected interactions."""
        for entry in self.entries:
            header, tracks = read_annotation_file(self.root / entry.annotations)
            if header.interaction != entry.id:
                raise AnnotationError(f"{entry.annotations} annotates {header.interaction!r}, manifest says {entry.id!r}")
            yield header, tracks

    def prepared(
        self, frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS, *, merge_gap_s: float | None = None
    ) -> list[PreparedInteraction]:
        """Frames and labels of every selected interaction."""
        prepared: list[PreparedInteraction] = []
        for interaction in self.interactions():
            prepared.append(
                prepare_interaction(interaction, self.layout, frame_period_ms, merge_gap_s=merge_gap_s)
            )
            logger.debug("prepared %s", interaction.interaction_id)
        return prepared


def load_corpus(data: Path, *, layout: FeatureLayout | str | None = None, party: Party = Party.ALL) -> Corpus:
    """Opens a corpus, selecting interactions by party size.

    The feature layout defaults to the one named in the manifest.
    """
    manifest, root = load_manifest(data)
    if not isinstance(layout, FeatureLayout):
        layout = retrieve_layout(layout or manifest.layout)
    entries = tuple(entry for entry in manifest.interactions if party.accepts(multiparty=entry.multiparty))
    logger.info("corpus %s: %d of %d interactions (%s)", root, len(entries), len(manifest.interactions), party)
    return Corpus(root, manifest, layout, entries)


__all__ = [
    "MANIFEST_NAME",
    "Corpus",
    "Interaction",
    "PreparedInteraction",
    "iter_stream_file",
    "load_corpus",
    "load_interaction",
    "load_manifest",
    "manifest_path",
    "prepare_frames",
    "prepare_interaction",
    "read_annotation_file",
    "read_stream_file",
    "sample_record",
    "track_labels",
    "write_annotation_file",
    "write_manifest",
    "write_stream_file",
]
