from collections.abc import Callable

import numpy as np
import pytest

from sed_detect.models import DECISION_SCHEMA, FeatureLayout, GeneratorConfig, WindowConfig
from sed_detect.types import LayoutError, ModelKind, StreamError, StreamId
from sed_detect.utilities import (
    PreparedInteraction,
    StreamingDetector,
    StreamSample,
    SyntheticInteraction,
    TrainedModel,
    batch_decisions,
    decision_header,
    detect_stream,
    generate_interactions,
    prepare_frames,
    retrieve_layout,
)


ZeroModelFactory = Callable[[FeatureLayout, WindowConfig], TrainedModel]

RandomModelFactory = Callable[[FeatureLayout, WindowConfig, ModelKind, list[PreparedInteraction]], TrainedModel]


def assert_stream_matches_batch(model: TrainedModel, layout: FeatureLayout, interaction: SyntheticInteraction):
    streamed = list(
        detect_stream(
            model,
            layout,
            interaction.samples(),
            interaction_id=interaction.interaction_id,
            end_ms=interaction.duration_ms,
        )
    )
    batch = batch_decisions(model, prepare_frames(interaction.to_interaction(), layout))
    assert len(streamed) == len(batch) > 0
    assert [d.frame for d in streamed] == [d.frame for d in batch]
    assert [d.t_ms for d in streamed] == [d.t_ms for d in batch]
    assert [d.p_sed for d in streamed] == [d.p_sed for d in batch]


def test_streaming_matches_batch_for_a_trained_model(
    lstm_model: TrainedModel, layout: FeatureLayout, interaction: SyntheticInteraction
):
    assert_stream_matches_batch(lstm_model, layout, interaction)


@pytest.mark.parametrize("kind", list(ModelKind))
@pytest.mark.parametrize(("tau", "eta"), [(0.0, 0.0), (2.0, 1.0), (5.0, 3.0)])
def test_streaming_matches_batch_bit_for_bit(
    kind: ModelKind,
    tau: float,
    eta: float,
    layout: FeatureLayout,
    interactions: list[SyntheticInteraction],
    prepared: list[PreparedInteraction],
    make_random_model: RandomModelFactory,
):
    model = make_random_model(layout, WindowConfig(tau, eta), kind, prepared[:4])
    for interaction in interactions:
        assert_stream_matches_batch(model, layout, interaction)


@pytest.mark.slow
@pytest.mark.parametrize("kind", list(ModelKind))
@pytest.mark.parametrize(("tau", "eta"), [(0.0, 0.0), (2.0, 1.0), (5.0, 3.0)])
def test_streaming_matches_batch_over_twenty_interactions(
    kind: ModelKind,
    tau: float,
    eta: float,
    generator_config: GeneratorConfig,
    layout: FeatureLayout,
    prepared: list[PreparedInteraction],
    make_random_model: RandomModelFactory,
):
    model = make_random_model(layout, WindowConfig(tau, eta), kind, prepared[:4])
    for interaction in generate_interactions(generator_config.model_copy(update={"seed": 21}), layout, 20):
        assert_stream_matches_batch(model, layout, interaction)


def test_first_decision_waits_for_a_full_window(layout: FeatureLayout, make_zero_model: ZeroModelFactory):
    model = make_zero_model(layout, WindowConfig(5.0, 2.0))
    detector = StreamingDetector(model, layout, interaction_id="s")
    values = np.zeros(layout.dimension(StreamId.GAZE))
    decisions = []
    for t in range(0, 6000, 100):
        decisions.extend(detector.push(StreamSample(t, StreamId.GAZE, values)))
    first = decisions[0]
    assert (first.frame, first.t_ms, first.labeled_t_ms) == (10, 5000, 3000)
    assert first.label == 0
    assert first.p_sed == 0.5
    assert first.model == "logreg-tau5-eta2"
    assert [d.frame for d in decisions] == [10]
    assert [d.frame for d in detector.finish()] == [11]


def test_empty_frames_still_produce_decisions(layout: FeatureLayout, make_zero_model: ZeroModelFactory):
    model = make_zero_model(layout, WindowConfig(1.0, 0.0))
    decisions = list(
        detect_stream(
            model,
            layout,
            [StreamSample(0, StreamId.HEAD, np.zeros(layout.dimension(StreamId.HEAD)))],
            interaction_id="s",
            end_ms=3000,
        )
    )
    assert [d.frame for d in decisions] == [2, 3, 4, 5]
    assert all(d.labeled_t_ms == d.t_ms for d in decisions)


def test_samples_outside_the_session_are_ignored(layout: FeatureLayout, make_zero_model: ZeroModelFactory):
    model = make_zero_model(layout, WindowConfig(0.0, 0.0))
    detector = StreamingDetector(model, layout, interaction_id="s", origin_ms=1000, end_ms=2000)
    values = np.zeros(layout.dimension(StreamId.GAZE))
    assert detector.push(StreamSample(500, StreamId.GAZE, values)) == []
    assert detector.push(StreamSample(1200, StreamId.GAZE, values)) == []
    assert [d.t_ms for d in detector.push(StreamSample(1600, StreamId.GAZE, values))] == [1000]
    assert detector.push(StreamSample(2500, StreamId.GAZE, values)) == []
    assert [d.t_ms for d in detector.finish()] == [1500]


def test_timestamp_regression_is_rejected(layout: FeatureLayout, make_zero_model: ZeroModelFactory):
    detector = StreamingDetector(make_zero_model(layout, WindowConfig(1.0, 0.0)), layout, interaction_id="s")
    detector.push(StreamSample(1000, StreamId.GAZE, np.zeros(layout.dimension(StreamId.GAZE))))
    with pytest.raises(StreamError):
        detector.push(StreamSample(999, StreamId.HEAD, np.zeros(layout.dimension(StreamId.HEAD))))


def test_wrong_sample_dimension_is_rejected(layout: FeatureLayout, make_zero_model: ZeroModelFactory):
    detector = StreamingDetector(make_zero_model(layout, WindowConfig(1.0, 0.0)), layout, interaction_id="s")
    with pytest.raises(LayoutError):
        detector.push(StreamSample(0, StreamId.GAZE, np.zeros(layout.dimension(StreamId.GAZE) + 1)))


def test_model_layout_must_match(layout: FeatureLayout, make_zero_model: ZeroModelFactory):
    model = make_zero_model(layout, WindowConfig(1.0, 0.0))
    with pytest.raises(LayoutError):
        StreamingDetector(model, retrieve_layout("okao"), interaction_id="s")


def test_latency_is_reported_on_request(layout: FeatureLayout, make_zero_model: ZeroModelFactory):
    model = make_zero_model(layout, WindowConfig(0.5, 0.0))
    samples = [StreamSample(t, StreamId.GAZE, np.zeros(layout.dimension(StreamId.GAZE))) for t in (0, 600, 1100)]
    timed = list(detect_stream(model, layout, samples, interaction_id="s", report_latency=True))
    untimed = list(detect_stream(model, layout, samples, interaction_id="s"))
    assert all(d.compute_ms is not None and d.compute_ms >= 0.0 for d in timed)
    assert all(d.compute_ms is None for d in untimed)
    record = timed[0].to_record()
    assert record.label == 0
    assert record.model == model.model_id


def test_decision_header(logreg_model: TrainedModel):
    header = decision_header(logreg_model)
    assert header["schema"] == DECISION_SCHEMA
    assert header["model"] == "logreg-tau1-eta0.5"
    assert header["window_config"] == logreg_model.window_config.to_dict()
    assert header["layout_hash"] == logreg_model.layout_hash
