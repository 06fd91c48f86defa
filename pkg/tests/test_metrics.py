import numpy as np
import pytest

from sklearn.metrics import roc_auc_score

from sed_detect.types import DataError, ShapeError
from sed_detect.utilities import (
    NOT_SIGNIFICANT,
    UNDEFINED,
    BehaviorState,
    ConfusionMatrix,
    FrameLabels,
    FrameSequence,
    auc,
    balanced_resample_eval,
    behavior_contrast,
    predict_labels,
    resample_partitions,
    roc_points,
    significance_stars,
    welch_test,
)


def pairwise_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    positives = scores[labels == 1]
    negatives = scores[labels == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in positives for n in negatives)
    return wins / (positives.size * negatives.size)


def test_confusion_counts_and_metrics():
    confusion = ConfusionMatrix.from_labels(np.array([1, 1, 0, 0, 0]), np.array([1, 0, 1, 0, 0]))
    assert confusion.to_dict() == {"tp": 1, "fp": 1, "tn": 2, "fn": 1}
    assert confusion.accuracy == pytest.approx(3 / 5)
    assert confusion.f1 == pytest.approx(2 / 4)
    assert confusion.balanced_accuracy == pytest.approx((1 / 2 + 2 / 3) / 2)
    assert (confusion + confusion).total == 10
    assert confusion.rows()[2] == ["SED", "1", "1"]


def test_ties_at_the_threshold_are_engaged():
    assert predict_labels(np.array([0.5, 0.50001, 0.2])).tolist() == [0, 1, 0]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_auc_matches_pairwise_count_and_sklearn(seed: int):
    rng = np.random.default_rng(seed)
    labels = (rng.random(60) < 0.3).astype(np.int8)
    labels[:2] = [0, 1]
    # rounding creates ties
    scores = np.round(rng.random(60) + 0.3 * labels, 1)
    assert auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels))
    assert auc(scores, labels) == pytest.approx(roc_auc_score(labels, scores))


@pytest.mark.parametrize("transform", [np.exp, np.log1p, lambda s: s**3 - 4.0])
def test_auc_ignores_strictly_monotone_transforms(transform):
    rng = np.random.default_rng(11)
    labels = (rng.random(80) < 0.4).astype(np.int8)
    labels[:2] = [0, 1]
    scores = np.round(rng.random(80) + 0.4 * labels, 1)
    assert auc(transform(scores), labels) == pytest.approx(auc(scores, labels))


def test_constant_classifier_has_chance_auc():
    labels = np.array([0, 0, 1, 0, 1])
    assert auc(np.full(5, 0.3), labels) == pytest.approx(0.5)


def test_auc_needs_both_classes():
    with pytest.raises(DataError):
        auc(np.array([0.1, 0.2]), np.array([1, 1]))
    with pytest.raises(ShapeError):
        auc(np.array([0.1, 0.2]), np.array([1, 0, 1]))


def test_roc_points_run_from_origin_to_corner():
    points = roc_points(np.array([0.9, 0.8, 0.8, 0.1]), np.array([1, 0, 1, 0]))
    assert points[0][:2] == (0.0, 0.0)
    assert points[-1][:2] == (1.0, 1.0)
    assert [p[:2] for p in points] == [(0.0, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, 1.0)]


def test_resampling_builds_disjoint_balanced_sets():
    labels = np.array([1] * 3 + [0] * 10)
    partitions, flagged = resample_partitions(labels, seed=5)
    assert not flagged
    assert len(partitions) == 10 // 3
    engaged = [set(p[labels[p] == 0].tolist()) for p in partitions]
    for subset, part in zip(engaged, partitions, strict=True):
        assert len(subset) == 3
        assert set(part[labels[part] == 1].tolist()) == {0, 1, 2}
    assert len(set().union(*engaged)) == 9


def test_resampling_flags_a_small_engaged_class():
    partitions, flagged = resample_partitions(np.array([1, 1, 1, 0]), seed=0)
    assert flagged
    assert len(partitions) == 1
    assert sorted(partitions[0].tolist()) == [0, 1, 2, 3]


def test_balanced_evaluation_is_seeded():
    rng = np.random.default_rng(0)
    labels = (rng.random(100) < 0.2).astype(np.int8)
    scores = rng.random(100) * 0.5 + 0.4 * labels
    first = balanced_resample_eval(scores, labels, seed=3, config={"fold": 1})
    second = balanced_resample_eval(scores, labels, seed=3)
    assert first.accuracy == second.accuracy
    assert first.f1 == second.f1
    assert first.auc == pytest.approx(roc_auc_score(labels, scores))
    assert first.accuracy == pytest.approx(float(np.mean(first.resample_accuracies)))
    assert first.confusion.total == 100
    report = first.to_dict()
    assert report["fold"] == 1
    assert report["n_resamples"] == len(first.resamples)


def test_perfect_scores_give_perfect_metrics():
    labels = np.array([0, 0, 0, 0, 1, 1])
    report = balanced_resample_eval(labels.astype(np.float64), labels)
    assert (report.accuracy, report.f1, report.auc) == (1.0, 1.0, 1.0)


@pytest.mark.parametrize(
    ("p_value", "stars"), [(0.00001, "****"), (0.0001, "***"), (0.005, "**"), (0.03, "*"), (0.2, NOT_SIGNIFICANT), (None, UNDEFINED)]
)
def test_significance_stars(p_value: float | None, stars: str):
    assert significance_stars(p_value) == stars


def test_welch_test_undefined_cases():
    assert welch_test(np.array([1.0]), np.array([1.0, 2.0])) == (None, None)
    assert welch_test(np.zeros(4), np.ones(3)) == (None, None)
    t, p = welch_test(np.array([0.0, 0.1, -0.1, 0.05]), np.array([1.0, 1.1, 0.9, 1.05]))
    assert t is not None
    assert t < 0
    assert p is not None
    assert p < 0.001


def test_welch_test_on_identical_states_is_not_significant():
    t, p = welch_test(np.ones(4), np.ones(3))
    assert (t, p) == (0.0, 1.0)
    assert significance_stars(p) == NOT_SIGNIFICANT
    sample = np.random.default_rng(3).normal(size=50)
    t, p = welch_test(sample, sample.copy())
    assert t == pytest.approx(0.0, abs=1e-12)
    assert p == pytest.approx(1.0)
    assert significance_stars(p) == NOT_SIGNIFICANT


def test_behavior_contrast_separates_states():
    rng = np.random.default_rng(0)
    a = np.array([0] * 20 + [1] * 20 + [1] * 5 + [0] * 5, dtype=np.int8)
    b = np.array([0] * 20 + [1] * 20 + [0] * 5 + [1] * 5, dtype=np.int8)
    values = np.column_stack([5.0 * a * b + rng.normal(scale=0.1, size=a.size), rng.normal(size=a.size)])
    mask = np.zeros_like(values, dtype=np.bool_)
    mask[0, 0] = True
    frames = FrameSequence("x", values, mask)
    labels = FrameLabels("x", a, b, a == b)
    rows = behavior_contrast([frames], [labels], ["signal", "noise"])
    signal = rows[0]
    assert signal.counts[BehaviorState.ENGAGED_AGREED] == 19
    assert signal.counts[BehaviorState.SED_A1_ONLY] == 5
    assert signal.means[BehaviorState.SED_AGREED] == pytest.approx(5.0, abs=0.1)
    assert signal.stars == "****"
    assert rows[1].counts[BehaviorState.ENGAGED_AGREED] == 20


def test_behavior_contrast_needs_both_agreed_states():
    a = np.zeros(4, dtype=np.int8)
    frames = FrameSequence("x", np.zeros((4, 1)), np.zeros((4, 1), dtype=np.bool_))
    with pytest.raises(DataError):
        behavior_contrast([frames], [FrameLabels("x", a, a, a == a)], ["f"])
