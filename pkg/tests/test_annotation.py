from typing import Any

import numpy as np
import pytest

from sklearn.metrics import cohen_kappa_score

from sed_detect.models import Segment
from sed_detect.types import AnnotationError
from sed_detect.utilities import (
    AnnotationTrack,
    annotation_stats,
    cohen_kappa,
    corpus_kappa,
    frame_labels,
    merge_short_gaps,
    track_frame_labels,
    track_labels,
)


def seg(start: int, end: int, annotator: str = "A1", **extra: Any) -> Segment:
    return Segment(annotator=annotator, interaction="x", start_ms=start, end_ms=end, **extra)


def track(*bounds: tuple[int, int], annotator: str = "A1", end_ms: int = 10_000) -> AnnotationTrack:
    return AnnotationTrack(annotator, "x", 0, end_ms, tuple(seg(s, e, annotator) for s, e in bounds))


def test_track_rejects_overlapping_segments():
    with pytest.raises(AnnotationError):
        track((0, 1000), (900, 2000))
    with pytest.raises(AnnotationError):
        track((0, 1000), end_ms=500)


def test_short_gap_is_merged():
    merged = merge_short_gaps(track((0, 1000), (1500, 3000)), 1.0)
    assert [(s.start_ms, s.end_ms) for s in merged.segments] == [(0, 3000)]


def test_gap_of_exactly_the_threshold_is_kept():
    merged = merge_short_gaps(track((0, 1000), (2000, 3000)), 1.0)
    assert len(merged.segments) == 2


def test_merging_chains_in_one_pass():
    merged = merge_short_gaps(track((0, 1000), (1200, 2000), (2500, 3000), (5000, 6000)), 1.0)
    assert [(s.start_ms, s.end_ms) for s in merged.segments] == [(0, 3000), (5000, 6000)]


def test_merged_segments_unite_cues_and_causes():
    a = seg(0, 1000, cues=["eye gaze"], cause="distraction")
    b = seg(1500, 2000, cues=["head motion", "eye gaze"], cause="waiting for the robot")
    merged = merge_short_gaps(AnnotationTrack("A1", "x", 0, 5000, (a, b)))
    (only,) = merged.segments
    assert [str(c) for c in only.cues] == ["eye gaze", "head motion"]
    assert only.cause == "distraction; waiting for the robot"


def test_merge_is_idempotent():
    once = merge_short_gaps(track((0, 1000), (1500, 2000), (4000, 4200)), 1.0)
    assert merge_short_gaps(once, 1.0) == once


def test_frame_labels_use_the_frame_midpoint():
    labels = track_frame_labels(track((600, 1400), end_ms=2000), 500)
    assert labels.tolist() == [0, 1, 1, 0]
    # midpoint 250 is outside [0, 250)
    assert track_frame_labels(track((0, 250), end_ms=1000), 500).tolist() == [0, 0]


def test_frame_labels_of_two_annotators():
    labels = frame_labels(track((0, 1000), end_ms=2000), track((500, 1000), annotator="A2", end_ms=2000), 500)
    assert labels.labels_a.tolist() == [1, 1, 0, 0]
    assert labels.labels_b.tolist() == [0, 1, 0, 0]
    assert labels.agreement.tolist() == [False, True, True, True]


def test_frame_labels_require_matching_bounds():
    with pytest.raises(AnnotationError):
        frame_labels(track(end_ms=2000), track(annotator="A2", end_ms=3000))


def test_single_annotator_agrees_with_itself():
    labels = track_labels("x", [track((0, 1000), end_ms=2000)], 500)
    assert labels.agreement.all()
    with pytest.raises(AnnotationError):
        track_labels("x", [])


def test_kappa_worked_example():
    assert cohen_kappa(np.array([1, 1, 0, 0]), np.array([1, 0, 0, 0])) == pytest.approx(0.5)


def test_kappa_of_identical_constant_labels_is_one():
    assert cohen_kappa(np.zeros(5), np.zeros(5)) == 1.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kappa_matches_sklearn(seed: int):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, 200)
    b = np.where(rng.random(200) < 0.8, a, 1 - a)
    assert cohen_kappa(a, b) == pytest.approx(cohen_kappa_score(a, b))


def test_kappa_rejects_bad_input():
    with pytest.raises(AnnotationError):
        cohen_kappa(np.array([]), np.array([]))
    with pytest.raises(AnnotationError):
        cohen_kappa(np.zeros(3), np.zeros(4))


def test_corpus_kappa_pools_frames():
    first = frame_labels(track((0, 1000), end_ms=2000), track((0, 1000), annotator="A2", end_ms=2000), 500)
    second = frame_labels(track((0, 500), end_ms=2000), track(annotator="A2", end_ms=2000), 500)
    report = corpus_kappa([first, second])
    a = np.concatenate([first.labels_a, second.labels_a])
    b = np.concatenate([first.labels_b, second.labels_b])
    assert report.n_frames == 8
    assert report.overall == pytest.approx(cohen_kappa_score(a, b))
    assert report.per_interaction["x"] == pytest.approx(cohen_kappa(second.labels_a, second.labels_b))


def test_annotation_stats_counts_cues_and_durations():
    a = seg(0, 1000, cues=["eye gaze", "head motion"], affects=["boredom"], cause="distraction")
    b = seg(2000, 5000, cues=["head motion"], cause="end of interaction")
    c = seg(1000, 2000, annotator="A2", cues=["acoustic"])
    stats = annotation_stats(
        [AnnotationTrack("A1", "x", 0, 10_000, (a, b)), AnnotationTrack("A2", "x", 0, 10_000, (c,))]
    )
    assert stats.n_tracks == 2
    assert stats.n_interactions == 1
    assert stats.cue_counts["head motion"] == 2
    assert stats.counts.primary_cues["eye gaze"] == 1
    assert stats.per_annotator["A2"].segments == 1
    assert stats.cause_counts["distraction"] == 1
    assert stats.sed_duration_mean_s == pytest.approx(5.0 / 3.0)
    assert stats.sed_fraction == pytest.approx(5000 / 20_000)
    assert stats.to_dict()["n_tracks"] == 2
