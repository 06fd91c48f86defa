"""
`utilities/detector` module.

Online SED detection. Samples arrive one at a time in timestamp order; each 500 ms frame is
pooled when a later sample (or the end of the stream) closes it, then imputed and
normalized with the model's training statistics and pushed into a ring buffer of the last
``tau/L + 1`` frames. Once the buffer is full every closed frame yields one decision about
the user state ``eta`` seconds earlier.

The detector and `batch_decisions` share pooling, preprocessing and the per-window forward
pass, so their probabilities agree bit for bit.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging
import time

from collections import deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from sed_detect.models import DECISION_SCHEMA, DecisionRecord, FeatureLayout
from sed_detect.types import SED, FloatArray, LayoutError, StreamError, StreamId
from sed_detect.utilities.metrics import DECISION_THRESHOLD
from sed_detect.utilities.streams import FrameSequence, StreamSample, assemble_row, frame_count, pool_window
from sed_detect.utilities.training import TrainedModel


logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Decision:
    """One detector output.

    Attributes:
        interaction_id (str): Interaction the decision belongs to.
        frame (int): Decision frame t.
        t_ms (int): Start of frame t on the interaction clock.
        labeled_t_ms (int): Time the decision is about, ``t_ms - eta``.
        label (int): 1 for SED, 0 for engaged.
        p_sed (float): SED probability.
        model (str): Model id.
        compute_ms (float | None): Preprocessing and inference time, when requested.
    """

    interaction_id: str
    frame: int
    t_ms: int
    labeled_t_ms: int
    label: int
    p_sed: float
    model: str
    compute_ms: float | None = None

    def to_record(self) -> DecisionRecord:
        """Output-file form."""
        return DecisionRecord(
            interaction=self.interaction_id,
            frame=self.frame,
            t_ms=self.t_ms,
            labeled_t_ms=self.labeled_t_ms,
            label=SED if self.label == SED else 0,
            p_sed=self.p_sed,
            model=self.model,
            compute_ms=self.compute_ms,
        )


def make_decision(model: TrainedModel, interaction_id: str, frame: int, t_ms: int, p_sed: float) -> Decision:
    """Decision for frame ``frame`` starting at ``t_ms``."""
    return Decision(
        interaction_id,
        frame,
        t_ms,
        t_ms - model.window_config.eta_ms,
        int(p_sed > DECISION_THRESHOLD),
        p_sed,
        model.model_id,
    )


@dataclass(slots=True)
class DetectorState:
    """Mutable state of one detector session.

    Attributes:
        buffer (deque[FloatArray]): Preprocessed rows of the most recent closed frames.
        pending (dict[StreamId, list[FloatArray]]): Samples of the open frame, per stream.
        frame (int): Index of the open frame.
        last_t_ms (int | None): Timestamp of the latest accepted sample.
        emitted (int): Decisions emitted so far.
    """

    buffer: deque[FloatArray]
    pending: dict[StreamId, list[FloatArray]] = field(default_factory=dict)
    frame: int = 0
    last_t_ms: int | None = None
    emitted: int = 0


class StreamingDetector:
    """Frame-by-frame SED detector for one interaction session.

    Feed it from a single producer; independent sessions may run side by side.
    """

    def __init__(
        self,
        model: TrainedModel,
        layout: FeatureLayout,
        *,
        interaction_id: str,
        origin_ms: int = 0,
        end_ms: int | None = None,
        report_latency: bool = False,
    ) -> None:
        """Checks the layout against the model and opens frame 0 at ``origin_ms``.

        Samples before ``origin_ms``, or at or after ``end_ms`` when given, are ignored.

        Raises:
            LayoutError: If the layout differs from the model's training layout.
        """
        model.check_layout(layout)
        self.model = model
        self.layout = layout
        self.interaction_id = interaction_id
        self.origin_ms = origin_ms
        self.end_ms = end_ms
        self.report_latency = report_latency
        self.frame_period_ms = model.window_config.frame_period_ms
        self.state = DetectorState(buffer=deque(maxlen=model.window_config.n_rows))

    @property
    def is_ready(self) -> bool:
        """True once the ring buffer holds a full window."""
        return len(self.state.buffer) == self.state.buffer.maxlen

    def push(self, sample: StreamSample) -> list[Decision]:
        """Accepts one sample; returns the decisions of the frames it closes.

        Raises:
            StreamError: If the timestamp precedes the previous sample's.
            LayoutError: If the sample's dimension differs from the layout's.
        """
        state = self.state
        if state.last_t_ms is not None and sample.t_ms < state.last_t_ms:
            raise StreamError(
                f"{self.interaction_id}: timestamp {sample.t_ms} ms after {state.last_t_ms} ms on stream {sample.stream}"
            )
        state.last_t_ms = sample.t_ms
        if sample.t_ms < self.origin_ms or (self.end_ms is not None and sample.t_ms >= self.end_ms):
            return []
        expected = self.layout.dimension(sample.stream)
        if sample.values.shape != (expected,):
            raise LayoutError(
                f"stream {sample.stream} sample at {sample.t_ms} ms has {sample.values.shape[0]} features, layout declares {expected}"
            )
        frame = (sample.t_ms - self.origin_ms) // self.frame_period_ms
        decisions = self._close_until(frame)
        state.pending.setdefault(sample.stream, []).append(sample.values)
        return decisions

    def finish(self) -> list[Decision]:
        """Closes the remaining frames at the end of the stream.

        With an ``end_ms`` every frame up to the one containing ``end_ms - 1`` is closed;
        otherwise frames are closed through the one holding the last accepted sample.
        """
        if self.end_ms is not None:
            n_frames = frame_count(self.origin_ms, self.end_ms, self.frame_period_ms)
        elif self.state.last_t_ms is not None and self.state.last_t_ms >= self.origin_ms:
            n_frames = (self.state.last_t_ms - self.origin_ms) // self.frame_period_ms + 1
        else:
            n_frames = 0
        decisions = self._close_until(n_frames)
        logger.debug("%s: %d frames, %d decisions", self.interaction_id, self.state.frame, self.state.emitted)
        return decisions

    def _close_until(self, frame: int) -> list[Decision]:
        decisions: list[Decision] = []
        while self.state.frame < frame:
            if (decision := self._close_frame()) is not None:
                decisions.append(decision)
        return decisions

    def _close_frame(self) -> Decision | None:
        state = self.state
        started = time.perf_counter() if self.report_latency else 0.0
        pooled = {
            sid: pool_window(np.vstack(rows), self.layout.dimension(sid)) for sid, rows in state.pending.items()
        }
        row, mask = assemble_row(pooled, self.layout)
        state.buffer.append(self.model.preprocess_row(row, mask))
        t = state.frame
        state.frame += 1
        state.pending = {}
        if not self.is_ready:
            return None
        p_sed = self.model.predict_window(np.stack(state.buffer))
        decision = make_decision(self.model, self.interaction_id, t, self.origin_ms + t * self.frame_period_ms, p_sed)
        if self.report_latency:
            decision = replace(decision, compute_ms=(time.perf_counter() - started) * 1000.0)
        state.emitted += 1
        return decision


def detect_stream(
    model: TrainedModel,
    layout: FeatureLayout,
    samples: Iterable[StreamSample],
    *,
    interaction_id: str,
    origin_ms: int = 0,
    end_ms: int | None = None,
    report_latency: bool = False,
) -> Iterator[Decision]:
    """Runs a detector over a sample source, yielding decisions as frames close."""
    detector = StreamingDetector(
        model,
        layout,
        interaction_id=interaction_id,
        origin_ms=origin_ms,
        end_ms=end_ms,
        report_latency=report_latency,
    )
    for sample in samples:
        yield from detector.push(sample)
    yield from detector.finish()


def batch_decisions(model: TrainedModel, frames: FrameSequence) -> list[Decision]:
    """Decisions over precomputed pooled frames, the offline counterpart of `detect_stream`."""
    prepared = model.preprocess(frames).frames
    tau = model.window_config.tau_frames
    return [
        make_decision(
            model,
            frames.interaction_id,
            t,
            frames.frame_start_ms(t),
            model.predict_window(np.ascontiguousarray(prepared[t - tau : t + 1])),
        )
        for t in range(tau, frames.n_frames)
    ]


def decision_header(model: TrainedModel) -> dict[str, Any]:
    """First record of a decision file."""
    return {
        "schema": DECISION_SCHEMA,
        "model": model.model_id,
        "window_config": model.window_config.to_dict(),
        "layout_hash": model.layout_hash,
    }


__all__ = [
    "Decision",
    "DetectorState",
    "StreamingDetector",
    "batch_decisions",
    "decision_header",
    "detect_stream",
    "make_decision",
]
