"""
`utilities/streams` module.

Temporal integration of the raw behaviour streams into synchronized fixed-rate frames, and
the imputation and normalization statistics fitted on training frames.

Each stream is pooled over common, non-overlapping integration windows of length L: a
window contributes the mean and the population variance of the finite samples whose
timestamp falls in ``[origin + k*L, origin + (k+1)*L)``. The pooled blocks of the five
streams are then concatenated in `FeatureLayout` order.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging
import math

from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Any, NamedTuple, Self

import numpy as np

from sed_detect.models import DEFAULT_FRAME_PERIOD_MS, FeatureLayout
from sed_detect.types import BoolArray, FittingError, FloatArray, IntArray, LayoutError, StreamError, StreamId
from sed_detect.utilities.utilities import decode_array, encode_array


logger = logging.getLogger(__name__)

# coordinates whose training sd falls below this are treated as constant
DEGENERATE_SD = 1e-12


@dataclass(frozen=True, slots=True)
class StreamSample:
    """One timestamped raw feature vector; non-finite entries are missing.

    Attributes:
        t_ms (int): Milliseconds since the interaction start.
        stream (StreamId): Which behaviour stream produced the sample.
        values (FloatArray): Raw feature vector of the stream's declared dimension.
    """

    t_ms: int
    stream: StreamId
    values: FloatArray

    @classmethod
    def from_record(cls, t_ms: int, stream: str | StreamId, values: Sequence[float | None]) -> Self:
        """Builds a sample from a stream-file record; ``None`` becomes NaN."""
        try:
            stream_id = StreamId.from_value(str(stream))
        except ValueError as e:
            raise StreamError(str(e)) from e
        if t_ms < 0:
            raise StreamError(f"negative timestamp {t_ms} on stream {stream_id}")
        array = np.array([np.nan if v is None else v for v in values], dtype=np.float64)
        return cls(t_ms, stream_id, array)


@dataclass(frozen=True, slots=True)
class StreamSeries:
    """All samples of one stream of one interaction, sorted by timestamp.

    Attributes:
        stream (StreamId): The stream.
        t_ms (IntArray): Sample timestamps, nondecreasing.
        values (FloatArray): ``n x d`` sample matrix.
    """

    stream: StreamId
    t_ms: IntArray
    values: FloatArray

    def __post_init__(self) -> None:
        """Checks ordering and shape.

        Raises:
            StreamError: If timestamps decrease or the arrays disagree in length.
        """
        if self.values.ndim != 2 or self.values.shape[0] != self.t_ms.shape[0]:
            raise StreamError(
                f"stream {self.stream}: {self.t_ms.shape[0]} timestamps for values of shape {self.values.shape}"
            )
        if self.t_ms.size and np.any(np.diff(self.t_ms) < 0):
            first = int(np.argmax(np.diff(self.t_ms) < 0)) + 1
            raise StreamError(f"stream {self.stream} is not sorted by timestamp (sample {first})")
        if self.t_ms.size and int(self.t_ms[0]) < 0:
            raise StreamError(f"stream {self.stream} has a negative timestamp")

    def __len__(self) -> int:
        """Number of samples."""
        return int(self.t_ms.shape[0])

    @property
    def dimension(self) -> int:
        """Raw feature dimension."""
        return int(self.values.shape[1])

    @classmethod
    def from_samples(cls, stream: StreamId, samples: Sequence[StreamSample], dimension: int) -> Self:
        """Collects samples of one stream, validating their dimension and order."""
        for sample in samples:
            if sample.stream != stream:
                raise StreamError(f"sample of stream {sample.stream} given for stream {stream}")
            if sample.values.shape != (dimension,):
                raise LayoutError(
                    f"stream {stream} declares {dimension} features but a sample at {sample.t_ms} ms has {sample.values.shape[0]}"
                )
        t_ms = np.array([s.t_ms for s in samples], dtype=np.int64)
        values = (
            np.vstack([s.values for s in samples]) if samples else np.empty((0, dimension), dtype=np.float64)
        )
        return cls(stream, t_ms, values)


class PooledWindow(NamedTuple):
    """Pooled statistics of one integration window of one stream."""

    window_index: int
    mean: FloatArray
    variance: FloatArray
    mask: BoolArray


def pool_window(values: FloatArray, dimension: int | None = None) -> tuple[FloatArray, FloatArray, BoolArray]:
    """Mean and population variance per coordinate over the finite entries of ``values``.

    Coordinates without a finite entry get NaN placeholders and a set mask bit. The
    streaming detector pools with this same function, which keeps its frames bit-identical
    to the batch ones.

    Args:
        values (FloatArray): ``n x d`` samples of one window, in arrival order.
        dimension (int | None): Required when ``values`` is empty.

    Returns:
        tuple[FloatArray, FloatArray, BoolArray]: mean, variance and missing mask, each of length d.
    """
    if values.shape[0] == 0:
        if dimension is None:
            dimension = values.shape[1] if values.ndim == 2 else 0
        empty = np.full(dimension, np.nan)
        return empty, empty.copy(), np.ones(dimension, dtype=np.bool_)
    values = np.ascontiguousarray(values, dtype=np.float64)
    finite = np.isfinite(values)
    counts = finite.sum(axis=0)
    mask = counts == 0
    safe_counts = np.where(mask, 1, counts)
    mean = np.where(finite, values, 0.0).sum(axis=0) / safe_counts
    deviations = np.where(finite, values - mean, 0.0)
    variance = (deviations * deviations).sum(axis=0) / safe_counts
    mean[mask] = np.nan
    variance[mask] = np.nan
    return mean, variance, mask


@dataclass(frozen=True, slots=True)
class IntegratedStream:
    """Dense per-window pooling of one stream; windows without samples are fully masked.

    Attributes:
        stream (StreamId): The pooled stream.
        mean (FloatArray): ``K x d`` window means.
        variance (FloatArray): ``K x d`` window population variances.
        mask (BoolArray): ``K x d`` true where no finite sample fell in the window.
    """

    stream: StreamId
    mean: FloatArray
    variance: FloatArray
    mask: BoolArray

    def __len__(self) -> int:
        """Number of windows."""
        return int(self.mean.shape[0])

    def __iter__(self) -> Iterator[PooledWindow]:
        """Yields ``(window_index, mean, variance, mask)`` per window."""
        for k in range(len(self)):
            yield PooledWindow(k, self.mean[k], self.variance[k], self.mask[k])


def window_bounds(t_ms: IntArray, frame_period_ms: int, origin_ms: int, n_windows: int) -> IntArray:
    """Row boundaries of each half-open window in a sorted timestamp array.

    Returns:
        IntArray: ``n_windows + 1`` indices; window k holds rows ``bounds[k]:bounds[k+1]``.
    """
    edges = origin_ms + frame_period_ms * np.arange(n_windows + 1, dtype=np.int64)
    return np.searchsorted(t_ms, edges, side="left").astype(np.int64)


def integrate_stream(
    series: StreamSeries,
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS,
    *,
    origin_ms: int = 0,
    n_windows: int | None = None,
) -> IntegratedStream:
    """Pools a stream over the integration windows ``[origin + k*L, origin + (k+1)*L)``.

    Samples before the origin or after the last window are ignored.

    Args:
        series (StreamSeries): Sorted samples of one stream.
        frame_period_ms (int): Window length L.
        origin_ms (int): Interaction clock start.
        n_windows (int | None): Number of windows; by default enough to cover the last sample.

    Raises:
        StreamError: If L is not positive.
    """
    if frame_period_ms <= 0:
        raise StreamError(f"frame period must be positive, got {frame_period_ms}")
    if n_windows is None:
        last = int(series.t_ms[-1]) if len(series) else origin_ms - 1
        n_windows = max(0, (last - origin_ms) // frame_period_ms + 1)
    dimension = series.dimension
    mean = np.full((n_windows, dimension), np.nan)
    variance = np.full((n_windows, dimension), np.nan)
    mask = np.ones((n_windows, dimension), dtype=np.bool_)
    bounds = window_bounds(series.t_ms, frame_period_ms, origin_ms, n_windows)
    for k in range(n_windows):
        lo, hi = int(bounds[k]), int(bounds[k + 1])
        if hi > lo:
            mean[k], variance[k], mask[k] = pool_window(series.values[lo:hi])
    return IntegratedStream(series.stream, mean, variance, mask)


@dataclass(frozen=True, slots=True)
class FrameSequence:
    """Synchronized pooled frames of one interaction.

    Attributes:
        interaction_id (str): Interaction the frames belong to.
        frames (FloatArray): ``T x D`` pooled matrix; masked entries hold placeholders.
        missing_mask (BoolArray): ``T x D``; true where no source sample fell in the window.
        frame_period_ms (int): Integration window length L.
        origin_ms (int): Start of frame 0 on the interaction clock.
    """

    interaction_id: str
    frames: FloatArray
    missing_mask: BoolArray
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS
    origin_ms: int = 0

    def __post_init__(self) -> None:
        """Frames and mask must agree in shape."""
        if self.frames.shape != self.missing_mask.shape or self.frames.ndim != 2:
            raise LayoutError(
                f"{self.interaction_id}: frames {self.frames.shape} and mask {self.missing_mask.shape} disagree"
            )

    @property
    def n_frames(self) -> int:
        """Number of frames T."""
        return int(self.frames.shape[0])

    @property
    def dimension(self) -> int:
        """Pooled dimension D."""
        return int(self.frames.shape[1])

    def frame_start_ms(self, t: int) -> int:
        """Interaction-clock start of frame t."""
        return self.origin_ms + t * self.frame_period_ms


def frame_count(start_ms: int, end_ms: int, frame_period_ms: int) -> int:
    """Frames needed to cover ``[start_ms, end_ms)``."""
    return max(0, math.ceil((end_ms - start_ms) / frame_period_ms))


def assemble_row(
    pooled: Mapping[StreamId, tuple[FloatArray, FloatArray, BoolArray]], layout: FeatureLayout
) -> tuple[FloatArray, BoolArray]:
    """Concatenates per-stream pooled blocks into one frame row in layout order.

    Streams absent from ``pooled`` are fully masked.
    """
    row = np.full(layout.pooled_dim, np.nan)
    mask = np.ones(layout.pooled_dim, dtype=np.bool_)
    for stream_id in layout.stream_ids:
        if stream_id not in pooled:
            continue
        mean, variance, stream_mask = pooled[stream_id]
        row[layout.mean_slice(stream_id)] = mean
        row[layout.var_slice(stream_id)] = variance
        mask[layout.mean_slice(stream_id)] = stream_mask
        mask[layout.var_slice(stream_id)] = stream_mask
    return row, mask


def align_streams(
    integrated: Mapping[StreamId, IntegratedStream],
    layout: FeatureLayout,
    *,
    interaction_id: str,
    n_frames: int,
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS,
    origin_ms: int = 0,
) -> FrameSequence:
    """Concatenates integrated streams into one pooled row per window.

    Rows follow the layout order, a mean block then a variance block per stream; absent
    streams or windows stay masked.

    Raises:
        LayoutError: When a stream's dimension disagrees with the layout, naming the stream.
    """
    frames = np.full((n_frames, layout.pooled_dim), np.nan)
    mask = np.ones((n_frames, layout.pooled_dim), dtype=np.bool_)
    for stream_id, pooled in integrated.items():
        expected = layout.dimension(stream_id)
        observed = int(pooled.mean.shape[1])
        if observed != expected:
            raise LayoutError(
                f"stream {stream_id} has {observed} features but layout {layout.name!r} declares {expected}"
            )
        rows = min(n_frames, len(pooled))
        frames[:rows, layout.mean_slice(stream_id)] = pooled.mean[:rows]
        frames[:rows, layout.var_slice(stream_id)] = pooled.variance[:rows]
        mask[:rows, layout.mean_slice(stream_id)] = pooled.mask[:rows]
        mask[:rows, layout.var_slice(stream_id)] = pooled.mask[:rows]
    return FrameSequence(interaction_id, frames, mask, frame_period_ms, origin_ms)


def frame_sequence(
    series: Mapping[StreamId, StreamSeries],
    layout: FeatureLayout,
    *,
    interaction_id: str,
    start_ms: int,
    end_ms: int,
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS,
) -> FrameSequence:
    """Integrates and aligns every stream of an interaction over ``[start_ms, end_ms)``."""
    n_frames = frame_count(start_ms, end_ms, frame_period_ms)
    integrated = {
        stream_id: integrate_stream(s, frame_period_ms, origin_ms=start_ms, n_windows=n_frames)
        for stream_id, s in series.items()
    }
    logger.debug("%s: %d frames of %d ms", interaction_id, n_frames, frame_period_ms)
    return align_streams(
        integrated,
        layout,
        interaction_id=interaction_id,
        n_frames=n_frames,
        frame_period_ms=frame_period_ms,
        origin_ms=start_ms,
    )


# --- Imputation ---


@dataclass(frozen=True, slots=True)
class ImputationModel:
    """Per-coordinate training means used to fill missing entries."""

    means: FloatArray

    def to_dict(self) -> dict[str, Any]:
        """Bit-exact JSON form."""
        return {"means": encode_array(self.means)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Inverse of `to_dict`."""
        return cls(decode_array(data["means"]))

    def impute(self, rows: FloatArray, mask: BoolArray) -> FloatArray:
        """Replaces masked entries of ``rows`` by the training means."""
        return np.where(mask, self.means, rows)


def fit_imputer(
    training: Sequence[FrameSequence], coordinate_names: Sequence[str] | None = None
) -> ImputationModel:
    """Fits per-coordinate means over the unmasked training entries.

    Raises:
        FittingError: If the training set is empty or a coordinate is never observed.
    """
    if not training:
        raise FittingError("cannot fit the imputer on an empty training set")
    frames = np.vstack([seq.frames for seq in training])
    observed = ~np.vstack([seq.missing_mask for seq in training])
    counts = observed.sum(axis=0)
    never = np.flatnonzero(counts == 0)
    if never.size:
        names = (
            [coordinate_names[i] for i in never] if coordinate_names is not None else [str(i) for i in never]
        )
        raise FittingError("coordinates never observed in training", names)
    means = np.where(observed, frames, 0.0).sum(axis=0) / counts
    return ImputationModel(means)


def apply_imputer(model: ImputationModel, sequence: FrameSequence) -> FrameSequence:
    """Fills masked entries with the training means and clears the mask."""
    if model.means.shape[0] != sequence.dimension:
        raise LayoutError(
            f"imputer fitted on {model.means.shape[0]} coordinates, frames have {sequence.dimension}"
        )
    return replace(
        sequence,
        frames=model.impute(sequence.frames, sequence.missing_mask),
        missing_mask=np.zeros_like(sequence.missing_mask),
    )


# --- Normalization ---


@dataclass(frozen=True, slots=True)
class NormalizationModel:
    """Per-coordinate z-score statistics; degenerate sds are stored as 1."""

    mean: FloatArray
    std: FloatArray
    degenerate: BoolArray = field(default_factory=lambda: np.zeros(0, dtype=np.bool_))

    def to_dict(self) -> dict[str, Any]:
        """Bit-exact JSON form."""
        return {"mean": encode_array(self.mean), "std": encode_array(self.std)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Inverse of `to_dict`."""
        return cls(decode_array(data["mean"]), decode_array(data["std"]))

    def transform(self, rows: FloatArray) -> FloatArray:
        """z-scores rows with the fitted statistics."""
        return (rows - self.mean) / self.std

    def inverse(self, rows: FloatArray) -> FloatArray:
        """Maps z-scored rows back to the original scale."""
        return rows * self.std + self.mean


def fit_normalizer(training: Sequence[FrameSequence]) -> NormalizationModel:
    """Fits per-coordinate mean and population sd over imputed training frames.

    Raises:
        FittingError: If the training set is empty or still holds masked entries.
    """
    if not training:
        raise FittingError("cannot fit the normalizer on an empty training set")
    if any(seq.missing_mask.any() for seq in training):
        raise FittingError("normalizer must be fitted on imputed frames")
    frames = np.vstack([seq.frames for seq in training])
    mean = frames.mean(axis=0)
    std = frames.std(axis=0)
    degenerate = std < DEGENERATE_SD
    if degenerate.any():
        logger.debug("%d constant training coordinates normalize to 0", int(degenerate.sum()))
    return NormalizationModel(mean, np.where(degenerate, 1.0, std), degenerate)


def apply_normalizer(model: NormalizationModel, sequence: FrameSequence) -> FrameSequence:
    """z-scores every frame of an imputed sequence."""
    if model.mean.shape[0] != sequence.dimension:
        raise LayoutError(
            f"normalizer fitted on {model.mean.shape[0]} coordinates, frames have {sequence.dimension}"
        )
    return replace(sequence, frames=model.transform(sequence.frames))


__all__ = [
    "DEGENERATE_SD",
    "FrameSequence",
    "ImputationModel",
    "IntegratedStream",
    "NormalizationModel",
    "PooledWindow",
    "StreamSample",
    "StreamSeries",
    "align_streams",
    "apply_imputer",
    "apply_normalizer",
    "assemble_row",
    "fit_imputer",
    "fit_normalizer",
    "frame_count",
    "frame_sequence",
    "integrate_stream",
    "pool_window",
    "window_bounds",
]
