# sourcery skip: do-not-use-staticmethod
"""
`models/layout` module.

Provides the FeatureLayout class, which fixes the order and dimensionality of the raw
behaviour features and of the pooled (mean + variance) frame vector built from them.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import hashlib
import json

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Self

from sed_detect.types import LayoutError, StreamId


POOLING_STATISTICS = ("mean", "var")


@dataclass(frozen=True, slots=True)
class FeatureLayout:
    """The per-stream feature table of one feature extractor setup.

    Streams always appear in `StreamId` order. The pooled frame vector holds, for each
    stream in turn, a block of means followed by a block of variances, one entry per raw
    feature, so its dimension is twice the raw dimension.

    Attributes:
        name (str): Catalog name of the layout (e.g. ``openface``).
        streams (tuple[tuple[StreamId, tuple[str, ...]], ...]): Raw feature names per stream.
    """

    name: str
    streams: tuple[tuple[StreamId, tuple[str, ...]], ...]

    def __post_init__(self) -> None:
        """Validates stream order and feature names.

        Raises:
            LayoutError: If a stream is missing, duplicated, out of order or empty.
        """
        ids = tuple(stream_id for stream_id, _ in self.streams)
        if ids != tuple(StreamId):
            raise LayoutError(
                f"layout {self.name!r} must declare streams {[str(s) for s in StreamId]} in order, got {[str(s) for s in ids]}"
            )
        for stream_id, names in self.streams:
            if not names:
                raise LayoutError(f"layout {self.name!r} declares no features for stream {stream_id}")
            if len(set(names)) != len(names):
                raise LayoutError(f"layout {self.name!r} repeats a feature name in stream {stream_id}")

    def __str__(self) -> str:
        """Returns `name(raw->pooled)`."""
        return f"{self.name}({self.raw_dim}->{self.pooled_dim})"

    @property
    def stream_ids(self) -> tuple[StreamId, ...]:
        """Streams in layout order."""
        return tuple(stream_id for stream_id, _ in self.streams)

    @property
    def raw_dim(self) -> int:
        """Total number of raw features."""
        return sum(len(names) for _, names in self.streams)

    @property
    def pooled_dim(self) -> int:
        """Dimension of one frame vector (mean and variance for every raw feature)."""
        return len(POOLING_STATISTICS) * self.raw_dim

    def dimension(self, stream_id: StreamId) -> int:
        """Returns the raw dimension of a stream."""
        return len(self.feature_names(stream_id))

    def feature_names(self, stream_id: StreamId) -> tuple[str, ...]:
        """Returns the raw feature names of a stream."""
        for sid, names in self.streams:
            if sid == stream_id:
                return names
        raise LayoutError(f"stream {stream_id} is not part of layout {self.name!r}")

    def offset(self, stream_id: StreamId) -> int:
        """Returns the first pooled column of a stream's block."""
        start = 0
        for sid, names in self.streams:
            if sid == stream_id:
                return start
            start += len(POOLING_STATISTICS) * len(names)
        raise LayoutError(f"stream {stream_id} is not part of layout {self.name!r}")

    def mean_slice(self, stream_id: StreamId) -> slice:
        """Pooled columns holding a stream's window means."""
        start = self.offset(stream_id)
        return slice(start, start + self.dimension(stream_id))

    def var_slice(self, stream_id: StreamId) -> slice:
        """Pooled columns holding a stream's window variances."""
        start = self.offset(stream_id) + self.dimension(stream_id)
        return slice(start, start + self.dimension(stream_id))

    @property
    def pooled_names(self) -> tuple[str, ...]:
        """Names of every pooled coordinate, e.g. ``gaze.is_looking.mean``."""
        return tuple(
            f"{stream_id}.{feature}.{statistic}"
            for stream_id, names in self.streams
            for statistic in POOLING_STATISTICS
            for feature in names
        )

    @property
    def layout_hash(self) -> str:
        """Stable short digest of the stream table; independent of the layout name."""
        payload = json.dumps([[str(sid), list(names)] for sid, names in self.streams])
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def to_mapping(self) -> dict[str, list[str]]:
        """Returns the stream table as a plain mapping (catalog format)."""
        return {str(sid): list(names) for sid, names in self.streams}

    @classmethod
    def from_mapping(cls, name: str, mapping: Mapping[str, Sequence[str]]) -> Self:
        """Creates a layout from a catalog entry such as ``{"distance": [...], ...}``."""
        unknown = set(mapping) - {str(s) for s in StreamId}
        if unknown:
            raise LayoutError(f"layout {name!r} declares unknown streams {sorted(unknown)}")
        try:
            streams = tuple((sid, tuple(mapping[str(sid)])) for sid in StreamId)
        except KeyError as e:
            raise LayoutError(f"layout {name!r} is missing stream {e.args[0]}") from e
        return cls(name, streams)


def engagement_zone(distance_m: float) -> int:
    """Discretizes a user distance into the robot's engagement zones (0 when unknown)."""
    if not distance_m >= 0.0:  # also catches NaN
        return 0
    if distance_m < 1.5:
        return 1
    return 2 if distance_m < 2.5 else 3


__all__ = ["POOLING_STATISTICS", "FeatureLayout", "engagement_zone"]
