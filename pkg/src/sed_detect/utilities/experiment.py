"""
`utilities/experiment` module.

The evaluation protocol around the classifiers: preprocessing fitted on training folds only,
model training from prepared interactions, balanced-resampling evaluation, k-fold
cross-validation, and the (tau, eta) sweep with its CSV and table renderings.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import csv
import logging

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from rich.table import Table

from sed_detect.models import FeatureLayout, TrainConfig, WindowConfig
from sed_detect.types import ConfigError, DataError, ModelKind
from sed_detect.utilities.corpus import PreparedInteraction
from sed_detect.utilities.logreg import logreg_train
from sed_detect.utilities.metrics import (
    BehaviorState,
    ConfusionMatrix,
    ContrastRow,
    EvalReport,
    balanced_resample_eval,
    roc_points,
)
from sed_detect.utilities.networks import NetworkSpec
from sed_detect.utilities.streams import (
    ImputationModel,
    NormalizationModel,
    apply_imputer,
    apply_normalizer,
    fit_imputer,
    fit_normalizer,
)
from sed_detect.utilities.training import TrainedModel, train_network
from sed_detect.utilities.utilities import make_dirs
from sed_detect.utilities.windowing import FoldPlan, LabeledWindow, build_windows, class_weights, stack_windows


logger = logging.getLogger(__name__)

SWEEP_TAUS = tuple(range(7))
SWEEP_ETAS = tuple(range(6))
SWEEP_METRICS = ("accuracy", "f1", "auc")


# --- Preprocessing ---


def fit_preprocessing(
    training: Sequence[PreparedInteraction], layout: FeatureLayout
) -> tuple[ImputationModel, NormalizationModel]:
    """Imputer and normalizer fitted on training interactions only."""
    frames = [p.frames for p in training]
    imputation = fit_imputer(frames, layout.pooled_names)
    normalization = fit_normalizer([apply_imputer(imputation, f) for f in frames])
    return imputation, normalization


def preprocess_interactions(
    prepared: Iterable[PreparedInteraction],
    imputation: ImputationModel,
    normalization: NormalizationModel,
) -> list[PreparedInteraction]:
    """Imputes and normalizes the frames of every interaction with fixed statistics."""
    return [
        replace(p, frames=apply_normalizer(normalization, apply_imputer(imputation, p.frames)))
        for p in prepared
    ]


def interaction_windows(
    prepared: Iterable[PreparedInteraction],
    config: WindowConfig,
    *,
    include_disagreed: bool = False,
) -> list[LabeledWindow]:
    """Windows of every interaction, in input order."""
    windows: list[LabeledWindow] = []
    for p in prepared:
        windows.extend(build_windows(p.frames, p.labels, config, include_disagreed=include_disagreed))
    return windows


def select(prepared: Sequence[PreparedInteraction], ids: Iterable[str]) -> list[PreparedInteraction]:
    """Interactions with the given ids, in the order of ``ids``."""
    by_id = {p.interaction_id: p for p in prepared}
    try:
        return [by_id[i] for i in ids]
    except KeyError as e:
        raise DataError(f"interaction {e.args[0]!r} is not in the prepared corpus") from e


# --- Training and evaluation ---


def train_model(
    kind: ModelKind,
    training: Sequence[PreparedInteraction],
    layout: FeatureLayout,
    window_config: WindowConfig,
    config: TrainConfig,
) -> TrainedModel:
    """Fits preprocessing and a classifier on the training interactions.

    Raises:
        DataError: If the training interactions yield no windows or a single class.
    """
    imputation, normalization = fit_preprocessing(training, layout)
    windows = interaction_windows(preprocess_interactions(training, imputation, normalization), window_config)
    if not windows:
        raise DataError(f"training interactions yield no windows for {window_config}")
    x, y, ids = stack_windows(windows)
    weights = dict(config.class_weights) if config.class_weights else class_weights(y)
    spec = NetworkSpec(kind, layout.pooled_dim, window_config.n_rows, config.hidden_sizes, config.readout, config.dropout)
    meta: dict[str, Any] = {
        "seed": config.seed,
        "n_windows": int(y.shape[0]),
        "n_sed": int(np.count_nonzero(y)),
        "class_weights": {str(c): w for c, w in weights.items()},
        "train_ids": sorted(set(ids)),
    }
    if kind is ModelKind.LOGREG:
        params, solver = logreg_train(
            x, y, weights, c=config.logreg_c, max_iter=config.logreg_max_iter, tol=config.logreg_tol
        )
        meta |= {"solver": "L-BFGS-B", "c": config.logreg_c, **solver}
    else:
        fit = train_network(spec, x, y, ids, config.model_copy(update={"class_weights": weights}))
        params = fit.params
        meta |= {
            "optimizer": {
                "name": "rmsprop",
                "learning_rate": config.learning_rate,
                "rho": config.rho,
                "epsilon": config.epsilon,
                "clip_norm": config.clip_norm,
            },
            "epochs_run": fit.history.epochs_run,
            "best_epoch": fit.history.best_epoch,
            "best_validation": fit.history.best_score,
            "stopped_early": fit.history.stopped_early,
            "monitor": str(config.monitor),
            "validation_ids": list(fit.validation_ids),
        }
    logger.info("trained %s %s on %d windows", kind, window_config, meta["n_windows"])
    return TrainedModel(
        spec=spec,
        window_config=window_config,
        layout_hash=layout.layout_hash,
        layout_name=layout.name,
        params=params,
        imputation=imputation,
        normalization=normalization,
        train_meta=meta,
    )


def model_windows(model: TrainedModel, prepared: Iterable[PreparedInteraction]) -> list[LabeledWindow]:
    """Agreed windows of raw prepared interactions, preprocessed with the model's statistics."""
    return interaction_windows(
        preprocess_interactions(prepared, model.imputation, model.normalization), model.window_config
    )


def evaluate_model(
    model: TrainedModel,
    test: Sequence[PreparedInteraction],
    seed: int = 0,
    *,
    config: dict[str, Any] | None = None,
) -> EvalReport:
    """Balanced-resampling evaluation of a trained model on held-out interactions.

    Raises:
        DataError: If the interactions yield no windows or a single class.
    """
    windows = model_windows(model, test)
    if not windows:
        raise DataError(f"test interactions yield no windows for {model.window_config}")
    x, y, _ = stack_windows(windows)
    context = {
        "model": str(model.kind),
        "tau_s": model.window_config.tau_s,
        "eta_s": model.window_config.eta_s,
        **(config or {}),
    }
    return balanced_resample_eval(model.predict_proba(x), y, seed, config=context)


def model_scores(model: TrainedModel, test: Sequence[PreparedInteraction]) -> tuple[np.ndarray, np.ndarray]:
    """SED probabilities and labels of every agreed test window."""
    x, y, _ = stack_windows(model_windows(model, test))
    return model.predict_proba(x), y


@dataclass(frozen=True, slots=True)
class FoldResult:
    """One fold of a cross-validation: the trained model and its test report."""

    fold: int
    model: TrainedModel
    report: EvalReport
    test_ids: tuple[str, ...]


def cross_validate(
    kind: ModelKind,
    prepared: Sequence[PreparedInteraction],
    plan: FoldPlan,
    layout: FeatureLayout,
    window_config: WindowConfig,
    config: TrainConfig,
    *,
    eval_seed: int | None = None,
) -> list[FoldResult]:
    """Trains on k-1 folds and evaluates on the held-out fold, for every fold.

    Test interactions never reach the imputer, the normalizer or the training windows.
    """
    results: list[FoldResult] = []
    seed = config.seed if eval_seed is None else eval_seed
    for split in plan:
        if set(split.train_ids) & set(split.test_ids):
            raise DataError(f"fold {split.fold}: train and test interactions overlap")
        model = train_model(kind, select(prepared, split.train_ids), layout, window_config, config)
        report = evaluate_model(model, select(prepared, split.test_ids), seed, config={"fold": split.fold})
        logger.info(
            "%s %s fold %d: accuracy %.4f, F1 %.4f, AUC %.4f",
            kind,
            window_config,
            split.fold,
            report.accuracy,
            report.f1,
            report.auc,
        )
        results.append(FoldResult(split.fold, model, report, split.test_ids))
    return results


# --- Sweep ---


@dataclass(frozen=True, slots=True)
class CellSummary:
    """Fold-averaged metrics of one model at one (tau, eta) setting."""

    kind: ModelKind
    tau_s: float
    eta_s: float
    accuracy: float
    f1: float
    auc: float
    accuracy_sd: float
    f1_sd: float
    auc_sd: float
    n_folds: int
    confusion: ConfusionMatrix

    @classmethod
    def from_reports(
        cls, kind: ModelKind, window_config: WindowConfig, reports: Sequence[EvalReport]
    ) -> "CellSummary":
        """Means and population sds over the folds; confusions are summed."""
        if not reports:
            raise DataError("no fold reports to summarize")

        def stats(values: list[float]) -> tuple[float, float]:
            return float(np.mean(values)), float(np.std(values))

        accuracy, accuracy_sd = stats([r.accuracy for r in reports])
        f1, f1_sd = stats([r.f1 for r in reports])
        auc_mean, auc_sd = stats([r.auc for r in reports])
        confusion = ConfusionMatrix()
        for r in reports:
            confusion += r.confusion
        return cls(
            kind,
            window_config.tau_s,
            window_config.eta_s,
            accuracy,
            f1,
            auc_mean,
            accuracy_sd,
            f1_sd,
            auc_sd,
            len(reports),
            confusion,
        )

    def metric(self, name: str) -> float:
        """One of ``accuracy``, ``f1`` or ``auc``."""
        if name not in SWEEP_METRICS:
            raise ConfigError(f"unknown metric {name!r}; choose from {', '.join(SWEEP_METRICS)}")
        return float(getattr(self, name))

    def to_dict(self) -> dict[str, Any]:
        """One CSV row."""
        return {
            "model": str(self.kind),
            "tau_s": self.tau_s,
            "eta_s": self.eta_s,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "auc": self.auc,
            "accuracy_sd": self.accuracy_sd,
            "f1_sd": self.f1_sd,
            "auc_sd": self.auc_sd,
            "n_folds": self.n_folds,
            **self.confusion.to_dict(),
        }


def sweep_grid(
    taus: Iterable[float] = SWEEP_TAUS,
    etas: Iterable[float] = SWEEP_ETAS,
    frame_period_ms: int = 500,
) -> list[WindowConfig]:
    """Every (tau, eta) configuration with tau >= eta, tau-major."""
    eta_values = sorted(etas)
    return [
        WindowConfig(float(tau), float(eta), frame_period_ms)
        for tau in sorted(taus)
        for eta in eta_values
        if tau >= eta
    ]


def sweep(
    kinds: Sequence[ModelKind],
    prepared: Sequence[PreparedInteraction],
    plan: FoldPlan,
    layout: FeatureLayout,
    config: TrainConfig,
    *,
    grid: Sequence[WindowConfig] | None = None,
) -> list[CellSummary]:
    """Cross-validates every model kind at every grid cell; tau < eta cells are never run."""
    grid = sweep_grid() if grid is None else grid
    cells: list[CellSummary] = []
    for window_config in grid:
        if window_config.tau_s < window_config.eta_s:
            continue
        for kind in kinds:
            results = cross_validate(kind, prepared, plan, layout, window_config, config)
            cell = CellSummary.from_reports(kind, window_config, [r.report for r in results])
            logger.info("%s %s: AUC %.4f (+- %.4f)", kind, window_config, cell.auc, cell.auc_sd)
            cells.append(cell)
    return cells


SWEEP_COLUMNS = (
    "model",
    "tau_s",
    "eta_s",
    "accuracy",
    "f1",
    "auc",
    "accuracy_sd",
    "f1_sd",
    "auc_sd",
    "n_folds",
    "tp",
    "fp",
    "tn",
    "fn",
)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    make_dirs([path.parent])
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_sweep_csv(path: Path, cells: Iterable[CellSummary]) -> Path:
    """One row per (model, tau, eta) cell."""
    return _write_csv(path, SWEEP_COLUMNS, ([cell.to_dict()[c] for c in SWEEP_COLUMNS] for cell in cells))


def write_confusion_csv(path: Path, confusion: ConfusionMatrix) -> Path:
    """2 x 2 confusion matrix, true classes in rows."""
    header, *rows = confusion.rows()
    return _write_csv(path, header, rows)


def write_roc_csv(path: Path, scores: np.ndarray, labels: np.ndarray) -> Path:
    """ROC points for external plotting."""
    return _write_csv(path, ["fpr", "tpr", "threshold"], roc_points(scores, labels))


def _format_metric(name: str, value: float) -> str:
    return f"{100 * value:.2f}" if name == "accuracy" else f"{value:.3f}"


def sweep_table(cells: Sequence[CellSummary], kind: ModelKind, metric: str = "auc") -> Table:
    """tau rows by eta columns for one model; cells with tau < eta stay blank."""
    own = [c for c in cells if c.kind is kind]
    taus = sorted({c.tau_s for c in own})
    etas = sorted({c.eta_s for c in own})
    lookup = {(c.tau_s, c.eta_s): c for c in own}
    table = Table(title=f"{kind} {metric} by observation window tau (rows) and buffer eta (columns), seconds")
    table.add_column("tau \\ eta", justify="right")
    for eta in etas:
        table.add_column(f"{eta:g}", justify="right")
    for tau in taus:
        row = [f"{tau:g}"]
        for eta in etas:
            cell = lookup.get((tau, eta))
            row.append("" if cell is None else _format_metric(metric, cell.metric(metric)))
        table.add_row(*row)
    return table


def comparison_table(cells: Sequence[CellSummary], metric: str = "auc") -> Table:
    """Model kinds side by side for every (tau, eta) cell that was run."""
    kinds = list(dict.fromkeys(c.kind for c in cells))
    settings = sorted({(c.tau_s, c.eta_s) for c in cells})
    lookup = {(c.kind, c.tau_s, c.eta_s): c for c in cells}
    table = Table(title=f"{metric} by model")
    table.add_column("tau", justify="right")
    table.add_column("eta", justify="right")
    for kind in kinds:
        table.add_column(str(kind), justify="right")
    for tau, eta in settings:
        row = [f"{tau:g}", f"{eta:g}"]
        for kind in kinds:
            cell = lookup.get((kind, tau, eta))
            row.append("" if cell is None else _format_metric(metric, cell.metric(metric)))
        table.add_row(*row)
    return table


# --- Behaviour contrast output ---

CONTRAST_COLUMNS = ("feature", *(str(state) for state in BehaviorState), "t", "p", "stars")


def _contrast_cells(row: ContrastRow) -> list[Any]:
    return [row.name, *(row.means[state] for state in BehaviorState), row.t, row.p, row.stars]


def write_contrast_csv(path: Path, rows: Iterable[ContrastRow]) -> Path:
    """One row per pooled coordinate; undefined values are left empty."""
    return _write_csv(
        path, CONTRAST_COLUMNS, ([("" if v is None else v) for v in _contrast_cells(row)] for row in rows)
    )


def contrast_table(rows: Sequence[ContrastRow], top: int | None = None) -> Table:
    """Coordinates ordered by p-value, most significant first; untestable ones last."""
    ordered = sorted(rows, key=lambda r: (r.p is None, r.p if r.p is not None else 0.0, r.name))
    shown = ordered if top is None else ordered[:top]
    table = Table(title="Mean pooled value per annotation state; engaged vs SED (agreed) by Welch's t-test")
    for column in CONTRAST_COLUMNS:
        table.add_column(column, justify="left" if column == "feature" else "right")
    for row in shown:
        numbers = [*(row.means[state] for state in BehaviorState), row.t, row.p]
        table.add_row(row.name, *("" if v is None else f"{v:.3g}" for v in numbers), row.stars)
    return table


__all__ = [
    "CONTRAST_COLUMNS",
    "SWEEP_COLUMNS",
    "SWEEP_ETAS",
    "SWEEP_METRICS",
    "SWEEP_TAUS",
    "CellSummary",
    "FoldResult",
    "comparison_table",
    "contrast_table",
    "cross_validate",
    "evaluate_model",
    "fit_preprocessing",
    "interaction_windows",
    "model_scores",
    "model_windows",
    "preprocess_interactions",
    "select",
    "sweep",
    "sweep_grid",
    "sweep_table",
    "train_model",
    "write_confusion_csv",
    "write_contrast_csv",
    "write_roc_csv",
    "write_sweep_csv",
]
