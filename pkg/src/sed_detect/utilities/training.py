"""
`utilities/training` module.

Training loop of the network classifiers (RMSprop, inverted dropout, early stopping with
best-epoch restoration), finite-difference gradient verification, and the `TrainedModel`
artifact with its bit-exact JSON persistence.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from pydantic import ValidationError

from sed_detect.models import FeatureLayout, ModelFile, TrainConfig, WindowConfig
from sed_detect.types import (
    ConfigError,
    DataError,
    FloatArray,
    LabelArray,
    LayoutError,
    ModelKind,
    Monitor,
    ParamDict,
    Readout,
    ShapeError,
    TrainingDivergedError,
)
from sed_detect.utilities.logreg import logreg_objective, logreg_predict
from sed_detect.utilities.metrics import ConfusionMatrix, predict_labels
from sed_detect.utilities.networks import (
    DropoutMasks,
    NetworkSpec,
    dropout_masks,
    init_params,
    loss_and_grads,
    network_forward,
)
from sed_detect.utilities.streams import (
    FrameSequence,
    ImputationModel,
    NormalizationModel,
    apply_imputer,
    apply_normalizer,
)
from sed_detect.utilities.utilities import (
    decode_array,
    encode_array,
    load_file,
    package_version,
    write_json,
)
from sed_detect.utilities.windowing import class_weights


logger = logging.getLogger(__name__)

GRADIENT_CHECK_STEP = 1e-5
GRADIENT_CHECK_TOLERANCE = 1e-4
PREDICT_CHUNK = 512


# --- Optimizer ---


def global_norm(grads: Mapping[str, FloatArray]) -> float:
    """Euclidean norm of every gradient block taken together."""
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


class RMSprop:
    """RMSprop with optional global gradient-norm clipping.

    ``s <- rho*s + (1-rho)*g^2`` and ``p <- p - lr*g/(sqrt(s) + eps)`` per block.
    """

    def __init__(
        self,
        params: Mapping[str, FloatArray],
        *,
        learning_rate: float = 1e-3,
        rho: float = 0.9,
        epsilon: float = 1e-7,
        clip_norm: float | None = 5.0,
    ) -> None:
        """Initialize the squared-gradient averages at zero."""
        self.learning_rate = learning_rate
        self.rho = rho
        self.epsilon = epsilon
        self.clip_norm = clip_norm
        self.square_avg = {name: np.zeros_like(p) for name, p in params.items()}

    @classmethod
    def from_config(cls, params: Mapping[str, FloatArray], config: TrainConfig) -> "RMSprop":
        """Optimizer with the settings of a TrainConfig."""
        return cls(
            params,
            learning_rate=config.learning_rate,
            rho=config.rho,
            epsilon=config.epsilon,
            clip_norm=config.clip_norm,
        )

    def step(self, params: ParamDict, grads: Mapping[str, FloatArray]) -> float:
        """Updates ``params`` in place; returns the gradient norm before clipping."""
        norm = global_norm(grads)
        scale = self.clip_norm / norm if self.clip_norm is not None and norm > self.clip_norm else 1.0
        for name, p in params.items():
            g = grads[name] * scale
            s = self.square_avg[name]
            s *= self.rho
            s += (1.0 - self.rho) * g * g
            p -= self.learning_rate * g / (np.sqrt(s) + self.epsilon)
        return norm


# --- Training loop ---


def split_validation(
    interaction_ids: Sequence[str], fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray[Any, np.dtype[np.bool_]], list[str]]:
    """Holds out a share of the training interactions for validation.

    Returns:
        tuple: A per-window validation mask and the held-out interaction ids.

    Raises:
        DataError: With fewer than two training interactions.
    """
    unique = sorted(set(interaction_ids))
    if len(unique) < 2:
        raise DataError("a validation split needs at least two training interactions")
    n_val = min(len(unique) - 1, max(1, round(fraction * len(unique))))
    order = rng.permutation(len(unique))
    held_out = sorted(unique[i] for i in order[:n_val])
    members = set(held_out)
    return np.array([i in members for i in interaction_ids], dtype=np.bool_), held_out


def monitor_score(monitor: Monitor, p_sed: FloatArray, y: LabelArray) -> float:
    """Validation score watched by early stopping."""
    confusion = ConfusionMatrix.from_labels(y, predict_labels(p_sed))
    return confusion.balanced_accuracy if monitor is Monitor.BALANCED_ACCURACY else confusion.accuracy


def predict_network(params: ParamDict, spec: NetworkSpec, x: FloatArray) -> FloatArray:
    """SED probabilities of a batch of windows, computed in fixed-size chunks."""
    if x.shape[0] == 0:
        return np.empty(0)
    return np.concatenate(
        [network_forward(params, spec, x[i : i + PREDICT_CHUNK])[:, 1] for i in range(0, x.shape[0], PREDICT_CHUNK)]
    )


@dataclass(slots=True)
class TrainingHistory:
    """Per-epoch record of one training run."""

    train_loss: list[float] = field(default_factory=list)
    val_score: list[float] = field(default_factory=list)
    best_epoch: int = 0
    best_score: float = float("-inf")
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        """Number of completed epochs."""
        return len(self.train_loss)


@dataclass(frozen=True, slots=True)
class NetworkFit:
    """Result of `train_network`: restored best parameters and the run history."""

    spec: NetworkSpec
    params: ParamDict
    history: TrainingHistory
    weights: dict[int, float]
    validation_ids: tuple[str, ...]


def train_network(
    spec: NetworkSpec,
    x: FloatArray,
    y: LabelArray,
    interaction_ids: Sequence[str],
    config: TrainConfig,
) -> NetworkFit:
    """Trains a DNN, GRU or LSTM with class-weighted cross-entropy and RMSprop.

    A seeded interaction-level validation split is held out; the validation score is
    checked after every epoch, the best epoch's parameters are restored, and training
    stops after ``patience`` epochs without improvement. One seeded generator drives the
    split, the initialization, the shuffling and the dropout masks, so a fixed seed gives
    bit-identical runs.

    Raises:
        ConfigError: For logistic regression, which has its own solver.
        DataError: If the training split lacks a class.
        TrainingDivergedError: If the loss becomes non-finite.
    """
    if spec.kind is ModelKind.LOGREG:
        raise ConfigError("logistic regression is trained with logreg_train")
    if x.shape[0] != y.shape[0] or x.shape[0] != len(interaction_ids):
        raise ShapeError(f"{x.shape[0]} windows, {y.shape[0]} labels, {len(interaction_ids)} ids")
    rng = np.random.default_rng(config.seed)
    val_mask, held_out = split_validation(interaction_ids, config.validation_fraction, rng)
    x_train, y_train = x[~val_mask], np.asarray(y[~val_mask], dtype=np.int64)
    x_val, y_val = x[val_mask], np.asarray(y[val_mask], dtype=np.int8)
    weights = dict(config.class_weights) if config.class_weights else class_weights(y_train)
    params = init_params(spec, rng)
    optimizer = RMSprop.from_config(params, config)
    history = TrainingHistory()
    best = {name: p.copy() for name, p in params.items()}
    stale = 0
    n_train = x_train.shape[0]
    logger.debug(
        "%s: %d train / %d validation windows, weights %s", spec.kind, n_train, x_val.shape[0], weights
    )
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n_train)
        epoch_loss = 0.0
        for start in range(0, n_train, config.batch_size):
            batch = order[start : start + config.batch_size]
            masks = dropout_masks(spec, batch.shape[0], rng)
            loss, grads = loss_and_grads(params, spec, x_train[batch], y_train[batch], weights, masks)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, loss)
            optimizer.step(params, grads)
            epoch_loss += loss * batch.shape[0]
        history.train_loss.append(epoch_loss / n_train)
        score = monitor_score(config.monitor, predict_network(params, spec, x_val), y_val)
        history.val_score.append(score)
        logger.debug("epoch %d: loss %.5f, validation %s %.4f", epoch, epoch_loss / n_train, config.monitor, score)
        if score > history.best_score:
            history.best_score, history.best_epoch = score, epoch
            best = {name: p.copy() for name, p in params.items()}
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                history.stopped_early = True
                break
    return NetworkFit(spec, best, history, weights, tuple(held_out))


# --- Gradient verification ---


@dataclass(frozen=True, slots=True)
class GradientReport:
    """Worst relative error per parameter block between analytic and numeric gradients."""

    kind: ModelKind
    tolerance: float
    errors: dict[str, float]

    @property
    def failed(self) -> list[str]:
        """Blocks whose error reaches the tolerance."""
        return [name for name, error in self.errors.items() if not error < self.tolerance]

    @property
    def passed(self) -> bool:
        """True when every block is within tolerance."""
        return not self.failed

    @property
    def max_error(self) -> float:
        """Largest error over all blocks."""
        return max(self.errors.values())


def relative_error(analytic: FloatArray, numeric: FloatArray) -> FloatArray:
    """``|a - n| / max(|a|, |n|, 1e-6)`` elementwise."""
    return np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)


def numeric_gradient(
    loss: Callable[[ParamDict], float], params: ParamDict, step: float = GRADIENT_CHECK_STEP
) -> ParamDict:
    """Central finite differences of ``loss`` with respect to every parameter entry."""
    grads: ParamDict = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        flat, out = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = loss(params)
            flat[i] = original - step
            minus = loss(params)
            flat[i] = original
            out[i] = (plus - minus) / (2.0 * step)
        grads[name] = g
    return grads


def gradient_check(
    kind: ModelKind,
    *,
    n_rows: int = 3,
    input_dim: int = 3,
    hidden_sizes: tuple[int, int] = (2, 2),
    batch: int = 4,
    readout: Readout = Readout.RELU,
    dropout: float = 0.5,
    tolerance: float = GRADIENT_CHECK_TOLERANCE,
    seed: int = 0,
    corrupt: str | None = None,
) -> GradientReport:
    """Compares analytic gradients of a toy model with central finite differences.

    Dropout masks are drawn once and held fixed. ``corrupt`` scales one analytic block by
    1.01 to show that a faulty gradient is caught.
    """
    rng = np.random.default_rng(seed)
    spec = NetworkSpec(kind, input_dim, n_rows, hidden_sizes, readout, dropout)
    x = rng.normal(size=(batch, n_rows, input_dim))
    y = np.arange(batch, dtype=np.int64) % 2
    weights = {0: 0.75, 1: 1.5}
    if kind is ModelKind.LOGREG:
        params = {name: rng.normal(scale=0.5, size=shape) for name, shape in spec.param_shapes().items()}
        sample_weights = np.array([weights[0], weights[1]])[y]

        def loss(p: ParamDict) -> float:
            return logreg_objective(p, x, y, sample_weights)[0]

        analytic = logreg_objective(params, x, y, sample_weights)[1]
    else:
        params = init_params(spec, rng)
        for name in params:
            # non-zero biases so every term of the backward pass is exercised
            params[name] += rng.normal(scale=0.1, size=params[name].shape)
        masks = dropout_masks(spec, batch, rng) if dropout else DropoutMasks()

        def loss(p: ParamDict) -> float:
            return loss_and_grads(p, spec, x, y, weights, masks)[0]

        analytic = loss_and_grads(params, spec, x, y, weights, masks)[1]
    if corrupt is not None:
        if corrupt not in analytic:
            raise ConfigError(f"no parameter block {corrupt!r} in a {kind} model")
        analytic[corrupt] = analytic[corrupt] * 1.01
    numeric = numeric_gradient(loss, params)
    errors = {name: float(relative_error(analytic[name], numeric[name]).max()) for name in params}
    report = GradientReport(kind, tolerance, errors)
    logger.debug("gradient check %s: max relative error %.2e", kind, report.max_error)
    return report


# --- Trained model artifact ---


@dataclass(frozen=True, slots=True)
class TrainedModel:
    """A classifier with everything needed to run it on raw frames.

    Attributes:
        spec (NetworkSpec): Architecture, including the kind and window shape.
        window_config (WindowConfig): tau, eta and L the model was trained for.
        layout_hash (str): Digest of the feature layout of the training frames.
        layout_name (str): Catalog name of that layout.
        params (ParamDict): Learned parameters.
        imputation (ImputationModel): Training-fold means for missing entries.
        normalization (NormalizationModel): Training-fold z-score statistics.
        train_meta (dict[str, Any]): Seed, epochs run, optimizer settings and metrics.
        version (str): Package version that wrote the model.
    """

    spec: NetworkSpec
    window_config: WindowConfig
    layout_hash: str
    layout_name: str
    params: ParamDict
    imputation: ImputationModel
    normalization: NormalizationModel
    train_meta: dict[str, Any] = field(default_factory=dict)
    version: str = field(default_factory=package_version)

    @property
    def kind(self) -> ModelKind:
        """Classifier family."""
        return self.spec.kind

    @property
    def model_id(self) -> str:
        """Short id used in decision records, e.g. ``lstm-tau5-eta2``."""
        return f"{self.kind}-{self.window_config}"

    def check_layout(self, layout: FeatureLayout) -> None:
        """Raises LayoutError unless the layout matches the training layout."""
        if layout.layout_hash != self.layout_hash:
            raise LayoutError(
                f"model was trained on layout {self.layout_name!r} ({self.layout_hash}), got {layout.name!r} ({layout.layout_hash})"
            )

    def preprocess(self, frames: FrameSequence) -> FrameSequence:
        """Imputes and normalizes pooled frames with the training statistics."""
        return apply_normalizer(self.normalization, apply_imputer(self.imputation, frames))

    def preprocess_row(self, row: FloatArray, mask: np.ndarray[Any, np.dtype[np.bool_]]) -> FloatArray:
        """Same as `preprocess` for one pooled row."""
        return self.normalization.transform(self.imputation.impute(row, mask))

    def predict_window(self, block: FloatArray) -> float:
        """SED probability of one ``N x D`` window.

        The streaming detector and `batch_decisions` both call this, so their outputs agree
        bit for bit.
        """
        if block.shape != (self.spec.n_rows, self.spec.input_dim):
            raise ShapeError(
                f"window of shape {block.shape} does not match the model's {self.spec.n_rows} x {self.spec.input_dim}"
            )
        if self.kind is ModelKind.LOGREG:
            return float(logreg_predict(self.params, block.reshape(-1)))
        return float(network_forward(self.params, self.spec, block)[1])

    def predict_proba(self, x: FloatArray) -> FloatArray:
        """SED probabilities of a ``n x N x D`` batch."""
        if x.ndim != 3 or x.shape[1:] != (self.spec.n_rows, self.spec.input_dim):
            raise ShapeError(
                f"windows of shape {x.shape[1:]} do not match the model's {self.spec.n_rows} x {self.spec.input_dim}"
            )
        if self.kind is ModelKind.LOGREG:
            return logreg_predict(self.params, x)
        return predict_network(self.params, self.spec, x)

    def to_file(self) -> ModelFile:
        """The serializable form; arrays are hex-encoded."""
        return ModelFile(
            version=self.version,
            kind=str(self.kind),
            window_config=self.window_config.to_dict(),
            layout_hash=self.layout_hash,
            layout_name=self.layout_name,
            network=self.spec.to_dict(),
            normalization=self.normalization.to_dict(),
            imputation=self.imputation.to_dict(),
            params={name: encode_array(p) for name, p in self.params.items()},
            train_meta=self.train_meta,
        )

    @classmethod
    def from_file(cls, model_file: ModelFile) -> "TrainedModel":
        """Rebuilds a model from its serialized form."""
        spec = NetworkSpec.from_dict(model_file.network)
        window_config = WindowConfig.from_dict(model_file.window_config)
        if spec.n_rows != window_config.n_rows:
            raise ConfigError(f"network expects {spec.n_rows} frames, window config gives {window_config.n_rows}")
        shapes = spec.param_shapes()
        params: ParamDict = {}
        for name, shape in shapes.items():
            if name not in model_file.params:
                raise ConfigError(f"model file lacks parameter block {name!r}")
            params[name] = decode_array(model_file.params[name]).reshape(shape)
        return cls(
            spec=spec,
            window_config=window_config,
            layout_hash=model_file.layout_hash,
            layout_name=model_file.layout_name,
            params=params,
            imputation=ImputationModel.from_dict(model_file.imputation),
            normalization=NormalizationModel.from_dict(model_file.normalization),
            train_meta=model_file.train_meta,
            version=model_file.version,
        )


def save_model(path: Path, model: TrainedModel) -> Path:
    """Writes a model file; reloading it is bit-exact."""
    return write_json(path, model.to_file())


def load_model(path: Path) -> TrainedModel:
    """Reads a model file written by `save_model`.

    Raises:
        ConfigError: If the file is not a valid model file.
    """
    try:
        model_file = ModelFile.model_validate_json(load_file(path))
    except ValidationError as e:
        raise ConfigError(f"invalid model file {path}: {e.error_count()} validation errors") from e
    return TrainedModel.from_file(model_file)


__all__ = [
    "GRADIENT_CHECK_STEP",
    "GRADIENT_CHECK_TOLERANCE",
    "GradientReport",
    "NetworkFit",
    "RMSprop",
    "TrainedModel",
    "TrainingHistory",
    "global_norm",
    "gradient_check",
    "load_model",
    "monitor_score",
    "numeric_gradient",
    "predict_network",
    "relative_error",
    "save_model",
    "split_validation",
    "train_network",
]
