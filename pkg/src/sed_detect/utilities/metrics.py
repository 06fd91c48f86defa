"""
`utilities/metrics` module.

Evaluation metrics with SED as the positive class: confusion matrices, rank-based AUC and
ROC points, the balanced-resampling protocol for accuracy and F1, and the engaged-vs-SED
behaviour contrast with Welch t-tests.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Self

import numpy as np

from scipy import stats

from sed_detect.types import ENGAGED, SED, SIGNIFICANCE_STARS, BoolArray, DataError, FloatArray, IntArray, LabelArray, ShapeError
from sed_detect.utilities.annotation import FrameLabels
from sed_detect.utilities.streams import FrameSequence


logger = logging.getLogger(__name__)

DECISION_THRESHOLD = 0.5
NOT_SIGNIFICANT = "-"
UNDEFINED = "undefined"


def predict_labels(p_sed: FloatArray, threshold: float = DECISION_THRESHOLD) -> LabelArray:
    """SED iff the probability exceeds the threshold; ties go to engaged."""
    return (np.asarray(p_sed) > threshold).astype(np.int8)


@dataclass(frozen=True, slots=True)
class ConfusionMatrix:
    """Counts with SED as the positive class."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @classmethod
    def from_labels(cls, y_true: LabelArray, y_pred: LabelArray) -> Self:
        """Counts agreement between true and predicted labels."""
        t = np.asarray(y_true)
        p = np.asarray(y_pred)
        if t.shape != p.shape:
            raise ShapeError(f"{t.shape[0]} labels but {p.shape[0]} predictions")
        return cls(
            tp=int(np.count_nonzero((t == SED) & (p == SED))),
            fp=int(np.count_nonzero((t == ENGAGED) & (p == SED))),
            tn=int(np.count_nonzero((t == ENGAGED) & (p == ENGAGED))),
            fn=int(np.count_nonzero((t == SED) & (p == ENGAGED))),
        )

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Sums counts."""
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        """Number of evaluated windows."""
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        """``(TP + TN) / total``."""
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def f1(self) -> float:
        """``2TP / (2TP + FP + FN)``; 0 when undefined."""
        denominator = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denominator if denominator else 0.0

    @property
    def recall(self) -> float:
        """True positive rate."""
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def specificity(self) -> float:
        """True negative rate."""
        return self.tn / (self.tn + self.fp) if self.tn + self.fp else 0.0

    @property
    def balanced_accuracy(self) -> float:
        """Mean per-class recall over the classes present."""
        rates = [
            rate
            for rate, present in ((self.recall, self.tp + self.fn), (self.specificity, self.tn + self.fp))
            if present
        ]
        return float(np.mean(rates)) if rates else 0.0

    def to_dict(self) -> dict[str, int]:
        """JSON form."""
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}

    def rows(self) -> list[list[str]]:
        """Table form: rows are the actual class, columns the predicted one."""
        return [
            ["actual \\ predicted", "engaged", "SED"],
            ["engaged", str(self.tn), str(self.fp)],
            ["SED", str(self.fn), str(self.tp)],
        ]


def _check_binary(scores: FloatArray, labels: LabelArray) -> tuple[FloatArray, LabelArray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ShapeError(f"{s.shape} scores for {y.shape} labels")
    if not (np.any(y == SED) and np.any(y == ENGAGED)):
        raise DataError("AUC needs both classes")
    return s, y


def auc(scores: FloatArray, labels: LabelArray) -> float:
    """Mann-Whitney AUC: the share of (SED, engaged) pairs ranked correctly, ties counting 1/2.

    Raises:
        DataError: If only one class is present.
    """
    s, y = _check_binary(scores, labels)
    ranks = stats.rankdata(s, method="average")
    positives = int(np.count_nonzero(y == SED))
    negatives = y.shape[0] - positives
    u = float(ranks[y == SED].sum()) - positives * (positives + 1) / 2.0
    return u / (positives * negatives)


def roc_points(scores: FloatArray, labels: LabelArray) -> list[tuple[float, float, float]]:
    """ROC curve as ``(fpr, tpr, threshold)`` points, one per distinct score, from (0, 0)."""
    s, y = _check_binary(scores, labels)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    distinct = np.flatnonzero(np.diff(s)) if s.size > 1 else np.empty(0, dtype=np.int64)
    cut = np.concatenate([distinct, [s.size - 1]])
    tps = np.cumsum(y == SED)[cut]
    fps = (cut + 1) - tps
    positives, negatives = tps[-1], fps[-1]
    points = [(0.0, 0.0, float("inf"))]
    points.extend(
        (float(fp / negatives), float(tp / positives), float(s[i])) for fp, tp, i in zip(fps, tps, cut, strict=True)
    )
    return points


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Test-fold metrics: accuracy and F1 averaged over balanced resamples, AUC on the full fold.

    Attributes:
        accuracy (float): Mean resample accuracy.
        f1 (float): Mean resample F1.
        auc (float): AUC over every test window.
        confusion (ConfusionMatrix): Confusion over every test window.
        resamples (tuple[ConfusionMatrix, ...]): One confusion per balanced resample.
        flagged (bool): True when the majority class was smaller than the minority.
        config (dict[str, Any]): tau, eta, model kind, fold and similar context.
    """

    accuracy: float
    f1: float
    auc: float
    confusion: ConfusionMatrix
    resamples: tuple[ConfusionMatrix, ...]
    flagged: bool = False
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def resample_accuracies(self) -> list[float]:
        """Accuracy of every resample."""
        return [cm.accuracy for cm in self.resamples]

    @property
    def resample_f1s(self) -> list[float]:
        """F1 of every resample."""
        return [cm.f1 for cm in self.resamples]

    @property
    def resample_confusion(self) -> ConfusionMatrix:
        """Confusion summed over the balanced resamples."""
        total = ConfusionMatrix()
        for cm in self.resamples:
            total += cm
        return total

    def to_dict(self) -> dict[str, Any]:
        """JSON form."""
        return {
            **self.config,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "auc": self.auc,
            "n_windows": self.confusion.total,
            "n_resamples": len(self.resamples),
            "flagged": self.flagged,
            "confusion": self.confusion.to_dict(),
            "resample_confusion": self.resample_confusion.to_dict(),
            "resample_accuracy": self.resample_accuracies,
            "resample_f1": self.resample_f1s,
        }


def resample_partitions(labels: LabelArray, seed: int) -> tuple[list[IntArray], bool]:
    """Balanced index sets: every SED window plus one disjoint slice of the shuffled engaged ones.

    Returns:
        tuple[list, bool]: The index sets and whether the engaged class was the smaller one
        (then a single set of all windows is returned).
    """
    y = np.asarray(labels)
    minority = np.flatnonzero(y == SED)
    majority = np.flatnonzero(y == ENGAGED)
    if minority.size == 0 or majority.size == 0:
        raise DataError("balanced resampling needs both classes in the test fold")
    if majority.size < minority.size:
        logger.warning(
            "test fold has fewer engaged (%d) than SED (%d) windows; using a single resample",
            majority.size,
            minority.size,
        )
        return [np.concatenate([minority, majority])], True
    shuffled = np.random.default_rng(seed).permutation(majority)
    n_sets = majority.size // minority.size
    size = minority.size
    return [np.concatenate([minority, shuffled[i * size : (i + 1) * size]]) for i in range(n_sets)], False


def balanced_resample_eval(
    p_sed: FloatArray,
    labels: LabelArray,
    seed: int = 0,
    *,
    threshold: float = DECISION_THRESHOLD,
    config: dict[str, Any] | None = None,
) -> EvalReport:
    """Balanced-resampling evaluation of SED probabilities on one test fold.

    Raises:
        DataError: If the fold holds a single class.
    """
    scores = np.asarray(p_sed, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int8)
    partitions, flagged = resample_partitions(y, seed)
    predictions = predict_labels(scores, threshold)
    resamples = tuple(ConfusionMatrix.from_labels(y[idx], predictions[idx]) for idx in partitions)
    return EvalReport(
        accuracy=float(np.mean([cm.accuracy for cm in resamples])),
        f1=float(np.mean([cm.f1 for cm in resamples])),
        auc=auc(scores, y),
        confusion=ConfusionMatrix.from_labels(y, predictions),
        resamples=resamples,
        flagged=flagged,
        config=dict(config or {}),
    )


# --- Behaviour contrast ---


class BehaviorState(StrEnum):
    """Annotation states compared in the behaviour contrast."""

    ENGAGED_AGREED = "engaged agreed"
    SED_AGREED = "SED agreed"
    SED_A1_ONLY = "SED: A1"
    SED_A2_ONLY = "SED: A2"

    def __str__(self) -> str:
        """Returns the string representation of the enum value."""
        return self.value

    def select(self, labels: FrameLabels) -> BoolArray:
        """Frames of an interaction in this state."""
        a, b = labels.labels_a, labels.labels_b
        match self:
            case BehaviorState.ENGAGED_AGREED:
                return (a == ENGAGED) & (b == ENGAGED)
            case BehaviorState.SED_AGREED:
                return (a == SED) & (b == SED)
            case BehaviorState.SED_A1_ONLY:
                return (a == SED) & (b == ENGAGED)
            case _:
                return (a == ENGAGED) & (b == SED)


def significance_stars(p_value: float | None) -> str:
    """Star bucket of a p-value; ``-`` when not significant."""
    if p_value is None or not np.isfinite(p_value):
        return UNDEFINED
    for threshold, stars in SIGNIFICANCE_STARS:
        if p_value < threshold:
            return stars
    return NOT_SIGNIFICANT


@dataclass(frozen=True, slots=True)
class ContrastRow:
    """One pooled coordinate in the behaviour contrast."""

    name: str
    means: dict[BehaviorState, float | None]
    counts: dict[BehaviorState, int]
    t: float | None
    p: float | None

    @property
    def stars(self) -> str:
        """Significance bucket of the engaged-vs-SED test."""
        return significance_stars(self.p)

    def to_dict(self) -> dict[str, Any]:
        """JSON form."""
        return {
            "feature": self.name,
            "means": {str(state): value for state, value in self.means.items()},
            "counts": {str(state): value for state, value in self.counts.items()},
            "t": self.t,
            "p": self.p,
            "stars": self.stars,
        }


def welch_test(engaged: FloatArray, sed: FloatArray) -> tuple[float | None, float | None]:
    """Welch's unequal-variance t-test; ``(None, None)`` when undefined.

    Two constant states with the same value do not differ: ``t = 0``, ``p = 1``. The test
    stays undefined with fewer than two values in a state, or for two constant states with
    different values, where t is unbounded.
    """
    if engaged.size < 2 or sed.size < 2:
        return None, None
    if np.var(engaged) == 0.0 and np.var(sed) == 0.0:
        return (0.0, 1.0) if engaged[0] == sed[0] else (None, None)
    result = stats.ttest_ind(engaged, sed, equal_var=False)
    t, p = float(result.statistic), float(result.pvalue)
    if not (np.isfinite(t) and np.isfinite(p)):
        return None, None
    return t, p


def behavior_contrast(
    frames: Sequence[FrameSequence], labels: Sequence[FrameLabels], names: Sequence[str]
) -> list[ContrastRow]:
    """Per-coordinate state means and the engaged-agreed vs SED-agreed Welch t-test.

    Uses the pooled (not imputed) frames; masked entries are left out per coordinate.

    Raises:
        DataError: If either agreed state is absent.
        ShapeError: If frames and labels disagree.
    """
    if len(frames) != len(labels):
        raise ShapeError(f"{len(frames)} frame sequences but {len(labels)} label sets")
    for seq, fl in zip(frames, labels, strict=True):
        if seq.n_frames != len(fl):
            raise ShapeError(f"{seq.interaction_id}: {seq.n_frames} frames but {len(fl)} labels")
    values = np.vstack([seq.frames for seq in frames])
    observed = ~np.vstack([seq.missing_mask for seq in frames])
    if values.shape[1] != len(names):
        raise ShapeError(f"{values.shape[1]} coordinates but {len(names)} names")
    selections = {
        state: np.concatenate([state.select(fl) for fl in labels]) for state in BehaviorState
    }
    for state in (BehaviorState.ENGAGED_AGREED, BehaviorState.SED_AGREED):
        if not selections[state].any():
            raise DataError(f"behaviour contrast needs frames in state {state!r}")
    rows: list[ContrastRow] = []
    for j, name in enumerate(names):
        column: dict[BehaviorState, FloatArray] = {
            state: values[selection & observed[:, j], j] for state, selection in selections.items()
        }
        t, p = welch_test(column[BehaviorState.ENGAGED_AGREED], column[BehaviorState.SED_AGREED])
        rows.append(
            ContrastRow(
                name,
                {state: float(v.mean()) if v.size else None for state, v in column.items()},
                {state: int(v.size) for state, v in column.items()},
                t,
                p,
            )
        )
    return rows


__all__ = [
    "DECISION_THRESHOLD",
    "NOT_SIGNIFICANT",
    "UNDEFINED",
    "BehaviorState",
    "ConfusionMatrix",
    "ContrastRow",
    "EvalReport",
    "auc",
    "balanced_resample_eval",
    "behavior_contrast",
    "predict_labels",
    "resample_partitions",
    "roc_points",
    "significance_stars",
    "welch_test",
]
