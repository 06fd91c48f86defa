import numpy as np
import pytest

from sed_detect.models import FeatureLayout
from sed_detect.types import FittingError, LayoutError, StreamError, StreamId
from sed_detect.utilities import (
    FrameSequence,
    StreamSample,
    StreamSeries,
    SyntheticInteraction,
    apply_imputer,
    apply_normalizer,
    assemble_row,
    fit_imputer,
    fit_normalizer,
    frame_count,
    frame_sequence,
    integrate_stream,
    pool_window,
)


def sequence(rows: list[list[float]], mask: list[list[bool]] | None = None) -> FrameSequence:
    frames = np.array(rows, dtype=np.float64)
    missing = np.zeros_like(frames, dtype=np.bool_) if mask is None else np.array(mask)
    return FrameSequence("x", frames, missing)


def test_pool_window_mean_and_population_variance():
    mean, variance, mask = pool_window(np.array([[1.0], [3.0]]))
    assert mean[0] == pytest.approx(2.0)
    assert variance[0] == pytest.approx(1.0)
    assert not mask[0]


def test_pool_window_skips_missing_entries_per_coordinate():
    mean, variance, mask = pool_window(np.array([[1.0, np.nan], [3.0, np.nan], [np.nan, np.nan]]))
    assert mean[0] == pytest.approx(2.0)
    assert variance[0] == pytest.approx(1.0)
    assert mask.tolist() == [False, True]
    assert np.isnan(mean[1])


def test_pool_window_empty_window_is_fully_masked():
    mean, _, mask = pool_window(np.empty((0, 3)), 3)
    assert mask.all()
    assert np.isnan(mean).all()


def test_sample_from_record_maps_none_to_nan():
    sample = StreamSample.from_record(250, "gaze", [0.1, None, 1.0])
    assert sample.stream is StreamId.GAZE
    assert np.isnan(sample.values[1])
    with pytest.raises(StreamError):
        StreamSample.from_record(-1, "gaze", [0.0])
    with pytest.raises(StreamError):
        StreamSample.from_record(0, "smell", [0.0])


def test_series_must_be_sorted():
    with pytest.raises(StreamError):
        StreamSeries(StreamId.HEAD, np.array([10, 5]), np.zeros((2, 3)))


def test_series_checks_sample_dimension():
    samples = [StreamSample(0, StreamId.HEAD, np.zeros(2))]
    with pytest.raises(LayoutError):
        StreamSeries.from_samples(StreamId.HEAD, samples, 3)


def test_sixty_seconds_at_half_second_frames():
    assert frame_count(0, 60_000, 500) == 120
    assert frame_count(0, 60_001, 500) == 121
    t = np.arange(0, 60_000, 100, dtype=np.int64)
    series = StreamSeries(StreamId.DISTANCE, t, np.ones((t.size, 6)))
    integrated = integrate_stream(series, 500, n_windows=120)
    assert len(integrated) == 120
    assert not integrated.mask.any()


def test_integration_windows_are_half_open():
    t = np.array([0, 499, 500, 1200], dtype=np.int64)
    series = StreamSeries(StreamId.GAZE, t, np.array([[1.0], [3.0], [10.0], [7.0]]))
    integrated = integrate_stream(series, 500, n_windows=3)
    assert integrated.mean[:, 0].tolist() == [2.0, 10.0, 7.0]
    assert integrated.variance[:, 0].tolist() == [1.0, 0.0, 0.0]


def test_window_without_samples_is_masked():
    series = StreamSeries(StreamId.GAZE, np.array([0, 1600], dtype=np.int64), np.ones((2, 1)))
    integrated = integrate_stream(series, 500, n_windows=4)
    assert integrated.mask[:, 0].tolist() == [False, True, True, False]


def test_assemble_row_masks_absent_streams(layout: FeatureLayout):
    dim = layout.dimension(StreamId.HEAD)
    pooled = {StreamId.HEAD: pool_window(np.ones((2, dim)))}
    row, mask = assemble_row(pooled, layout)
    assert row.shape == (layout.pooled_dim,)
    assert not mask[layout.mean_slice(StreamId.HEAD)].any()
    assert not mask[layout.var_slice(StreamId.HEAD)].any()
    assert mask[layout.mean_slice(StreamId.SPEECH)].all()
    assert mask.sum() == layout.pooled_dim - 2 * dim


def test_frame_sequence_covers_the_interaction(interaction: SyntheticInteraction, layout: FeatureLayout):
    frames = frame_sequence(
        interaction.series, layout, interaction_id=interaction.interaction_id, start_ms=0, end_ms=interaction.duration_ms
    )
    assert frames.n_frames == frame_count(0, interaction.duration_ms, 500)
    assert frames.dimension == layout.pooled_dim
    assert frames.frame_start_ms(3) == 1500


def test_imputer_fills_with_training_means():
    training = sequence([[1.0, 5.0], [3.0, 0.0]], [[False, False], [False, True]])
    model = fit_imputer([training])
    assert model.means.tolist() == [2.0, 5.0]
    imputed = apply_imputer(model, training)
    assert imputed.frames.tolist() == [[1.0, 5.0], [3.0, 5.0]]
    assert not imputed.missing_mask.any()


def test_imputer_names_coordinates_never_observed():
    training = sequence([[1.0, 0.0]], [[False, True]])
    with pytest.raises(FittingError) as error:
        fit_imputer([training], ["a.mean", "b.mean"])
    assert error.value.coordinates == ("b.mean",)


def test_normalizer_z_scores_and_inverts():
    training = sequence([[0.0, 4.0], [2.0, 4.0]])
    model = fit_normalizer([training])
    normalized = apply_normalizer(model, training)
    assert normalized.frames[:, 0].tolist() == [-1.0, 1.0]
    # constant coordinates map to zero instead of dividing by a zero sd
    assert normalized.frames[:, 1].tolist() == [0.0, 0.0]
    assert model.degenerate.tolist() == [False, True]
    assert model.inverse(normalized.frames) == pytest.approx(training.frames)


def test_normalizer_requires_imputed_frames():
    with pytest.raises(FittingError):
        fit_normalizer([sequence([[1.0]], [[True]])])
    with pytest.raises(FittingError):
        fit_normalizer([])
