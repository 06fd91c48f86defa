# sourcery skip: no-complex-if-expressions
"""
`utilities/networks` module.

From-scratch numpy networks of the detector: LSTM and GRU cells, two stacked recurrent
layers read many-to-one, the feedforward (DNN) variant, and the class-weighted softmax
cross-entropy with its gradients (backpropagation through time for the recurrent kinds).

Parameters live in flat dictionaries:

- recurrent: ``l1.W`` ``l1.U`` ``l1.b`` ``l2.W`` ``l2.U`` ``l2.b`` ``out.W`` ``out.b``
- dnn: ``d1.W`` ``d1.b`` ``d2.W`` ``d2.b`` ``out.W`` ``out.b``

Gate blocks are stacked along the columns: LSTM ``[i, f, g, o]``, GRU ``[z, r, n]``.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from dataclasses import dataclass
from typing import Any, NamedTuple, Self

import numpy as np

from scipy.special import expit, log_softmax, softmax

from sed_detect.types import ConfigError, FloatArray, LabelArray, ModelKind, ParamDict, Readout, ShapeError


DEFAULT_HIDDEN_SIZES = (32, 2)
LSTM_FORGET_BIAS = 1.0


@dataclass(frozen=True, slots=True)
class NetworkSpec:
    """Architecture of one classifier.

    Attributes:
        kind (ModelKind): Classifier family.
        input_dim (int): Pooled frame dimension D.
        n_rows (int): Frames per window N.
        hidden_sizes (tuple[int, int]): Widths of the two hidden layers.
        readout (Readout): Activation on the last hidden layer before the output.
        dropout (float): Training-time drop probability on hidden-layer outputs.
    """

    kind: ModelKind
    input_dim: int
    n_rows: int
    hidden_sizes: tuple[int, int] = DEFAULT_HIDDEN_SIZES
    readout: Readout = Readout.RELU
    dropout: float = 0.1

    def __post_init__(self) -> None:
        """Validates sizes.

        Raises:
            ConfigError: On non-positive sizes or a dropout outside [0, 1).
        """
        if self.input_dim < 1 or self.n_rows < 1 or min(self.hidden_sizes) < 1:
            raise ConfigError(f"network sizes must be positive: {self}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")

    @property
    def flat_dim(self) -> int:
        """Length of a flattened window."""
        return self.n_rows * self.input_dim

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        """Shapes of every parameter block, in a fixed order."""
        h1, h2 = self.hidden_sizes
        match self.kind:
            case ModelKind.LOGREG:
                return {"w": (self.flat_dim,), "b": (1,)}
            case ModelKind.DNN:
                return {
                    "d1.W": (self.flat_dim, h1),
                    "d1.b": (h1,),
                    "d2.W": (h1, h2),
                    "d2.b": (h2,),
                    "out.W": (h2, 2),
                    "out.b": (2,),
                }
            case _:
                g = self.kind.gate_count
                return {
                    "l1.W": (self.input_dim, g * h1),
                    "l1.U": (h1, g * h1),
                    "l1.b": (g * h1,),
                    "l2.W": (h1, g * h2),
                    "l2.U": (h2, g * h2),
                    "l2.b": (g * h2,),
                    "out.W": (h2, 2),
                    "out.b": (2,),
                }

    @property
    def n_params(self) -> int:
        """Total number of scalar parameters."""
        return sum(int(np.prod(shape)) for shape in self.param_shapes().values())

    def to_dict(self) -> dict[str, Any]:
        """JSON form stored in model files."""
        return {
            "kind": str(self.kind),
            "input_dim": self.input_dim,
            "n_rows": self.n_rows,
            "hidden_sizes": list(self.hidden_sizes),
            "readout": str(self.readout),
            "dropout": self.dropout,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Inverse of `to_dict`."""
        h1, h2 = data.get("hidden_sizes", DEFAULT_HIDDEN_SIZES)
        return cls(
            ModelKind.from_value(data["kind"]),
            int(data["input_dim"]),
            int(data["n_rows"]),
            (int(h1), int(h2)),
            Readout(data.get("readout", Readout.RELU)),
            float(data.get("dropout", 0.0)),
        )


class CellParams(NamedTuple):
    """Input matrix, recurrent matrix and bias of one recurrent layer."""

    W: FloatArray
    U: FloatArray
    b: FloatArray


def cell_params(params: ParamDict, layer: str) -> CellParams:
    """The ``l1`` or ``l2`` block of a recurrent parameter dict."""
    return CellParams(params[f"{layer}.W"], params[f"{layer}.U"], params[f"{layer}.b"])


def init_params(spec: NetworkSpec, rng: np.random.Generator) -> ParamDict:
    """Seeded initialization.

    Recurrent input and recurrent matrices are uniform in ``+-1/sqrt(fan_in)`` with a +1
    forget-gate bias for LSTMs; DNN hidden layers are He-uniform; the output layer is
    uniform in ``+-1/sqrt(fan_in)``; logistic regression starts at zero.
    """
    params: ParamDict = {}
    for name, shape in spec.param_shapes().items():
        if spec.kind is ModelKind.LOGREG or name.endswith(".b"):
            params[name] = np.zeros(shape)
            continue
        fan_in = shape[0]
        bound = np.sqrt(6.0 / fan_in) if name.startswith("d") else 1.0 / np.sqrt(fan_in)
        params[name] = rng.uniform(-bound, bound, size=shape)
    if spec.kind is ModelKind.LSTM:
        for layer, width in zip(("l1", "l2"), spec.hidden_sizes, strict=True):
            params[f"{layer}.b"][width : 2 * width] = LSTM_FORGET_BIAS
    return params


def check_params(params: ParamDict, spec: NetworkSpec) -> None:
    """Raises ShapeError unless ``params`` has exactly the blocks and shapes of ``spec``."""
    expected = spec.param_shapes()
    if set(params) != set(expected):
        raise ShapeError(f"parameter blocks {sorted(params)} do not match {spec.kind} {sorted(expected)}")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ShapeError(f"parameter {name} has shape {params[name].shape}, expected {shape}")


# --- Cells ---


def _check_cell(cell: CellParams, x: FloatArray, h_prev: FloatArray, gates: int) -> int:
    width = cell.U.shape[0]
    if cell.W.shape[1] != gates * width or cell.U.shape[1] != gates * width or cell.b.shape != (gates * width,):
        raise ShapeError(f"cell parameters do not form {gates} gate blocks of width {width}")
    if x.shape[-1] != cell.W.shape[0]:
        raise ShapeError(f"cell input has {x.shape[-1]} features, expected {cell.W.shape[0]}")
    if h_prev.shape[-1] != width:
        raise ShapeError(f"hidden state has {h_prev.shape[-1]} units, expected {width}")
    return width


class LstmStep(NamedTuple):
    """Activations of one LSTM step, kept for backpropagation."""

    i: FloatArray
    f: FloatArray
    g: FloatArray
    o: FloatArray
    c: FloatArray
    tanh_c: FloatArray
    h: FloatArray


def _lstm_step(cell: CellParams, x: FloatArray, h_prev: FloatArray, c_prev: FloatArray) -> LstmStep:
    n = cell.U.shape[0]
    a = x @ cell.W + h_prev @ cell.U + cell.b
    i = expit(a[..., :n])
    f = expit(a[..., n : 2 * n])
    g = np.tanh(a[..., 2 * n : 3 * n])
    o = expit(a[..., 3 * n :])
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    return LstmStep(i, f, g, o, c, tanh_c, o * tanh_c)


def lstm_cell_forward(
    cell: CellParams, x_t: FloatArray, h_prev: FloatArray, c_prev: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """One LSTM step: ``c = f*c_prev + i*g``, ``h = o*tanh(c)``.

    Works on a single vector or on a batch (rows).

    Raises:
        ShapeError: If inputs and parameters disagree.
    """
    _check_cell(cell, x_t, h_prev, gates=4)
    if c_prev.shape != h_prev.shape:
        raise ShapeError(f"cell state shape {c_prev.shape} differs from hidden state {h_prev.shape}")
    step = _lstm_step(cell, x_t, h_prev, c_prev)
    return step.h, step.c


class GruStep(NamedTuple):
    """Activations of one GRU step, kept for backpropagation."""

    z: FloatArray
    r: FloatArray
    n: FloatArray
    h: FloatArray


def _gru_step(cell: CellParams, x: FloatArray, h_prev: FloatArray) -> GruStep:
    width = cell.U.shape[0]
    a = x @ cell.W + cell.b
    zr = a[..., : 2 * width] + h_prev @ cell.U[:, : 2 * width]
    z = expit(zr[..., :width])
    r = expit(zr[..., width:])
    n = np.tanh(a[..., 2 * width :] + (r * h_prev) @ cell.U[:, 2 * width :])
    return GruStep(z, r, n, (1.0 - z) * h_prev + z * n)


def gru_cell_forward(cell: CellParams, x_t: FloatArray, h_prev: FloatArray) -> FloatArray:
    """One GRU step: ``h = (1-z)*h_prev + z*tanh(x Wn + (r*h_prev) Un + bn)``.

    Raises:
        ShapeError: If inputs and parameters disagree.
    """
    _check_cell(cell, x_t, h_prev, gates=3)
    return _gru_step(cell, x_t, h_prev).h


# --- Recurrent layers with backpropagation through time ---


type LayerCache = tuple[FloatArray, list[Any], list[FloatArray], list[FloatArray]]


def recurrent_layer_forward(kind: ModelKind, cell: CellParams, xs: FloatArray) -> tuple[FloatArray, LayerCache]:
    """Unrolls a layer over ``xs`` (``B x N x D``) from zero state; returns ``B x N x H``."""
    batch, steps, _ = xs.shape
    width = cell.U.shape[0]
    _check_cell(cell, xs[:, 0, :], np.zeros((batch, width)), kind.gate_count)
    h = np.zeros((batch, width))
    c = np.zeros((batch, width))
    hs = np.empty((batch, steps, width))
    trace: list[Any] = []
    h_prevs: list[FloatArray] = []
    c_prevs: list[FloatArray] = []
    for t in range(steps):
        h_prevs.append(h)
        c_prevs.append(c)
        if kind is ModelKind.LSTM:
            step = _lstm_step(cell, xs[:, t, :], h, c)
            c = step.c
        else:
            step = _gru_step(cell, xs[:, t, :], h)
        h = step.h
        hs[:, t, :] = h
        trace.append(step)
    return hs, (xs, trace, h_prevs, c_prevs)


def _lstm_layer_backward(
    cell: CellParams, cache: LayerCache, dhs: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    xs, trace, h_prevs, c_prevs = cache
    dW, dU, db = np.zeros_like(cell.W), np.zeros_like(cell.U), np.zeros_like(cell.b)
    dxs = np.zeros_like(xs)
    dh_next = np.zeros_like(dhs[:, 0, :])
    dc_next = np.zeros_like(dh_next)
    for t in reversed(range(xs.shape[1])):
        step: LstmStep = trace[t]
        dh = dhs[:, t, :] + dh_next
        do = dh * step.tanh_c
        dc = dh * step.o * (1.0 - step.tanh_c**2) + dc_next
        da = np.concatenate(
            [
                dc * step.g * step.i * (1.0 - step.i),
                dc * c_prevs[t] * step.f * (1.0 - step.f),
                dc * step.i * (1.0 - step.g**2),
                do * step.o * (1.0 - step.o),
            ],
            axis=-1,
        )
        dW += xs[:, t, :].T @ da
        dU += h_prevs[t].T @ da
        db += da.sum(axis=0)
        dxs[:, t, :] = da @ cell.W.T
        dh_next = da @ cell.U.T
        dc_next = dc * step.f
    return dxs, dW, dU, db


def _gru_layer_backward(
    cell: CellParams, cache: LayerCache, dhs: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    xs, trace, h_prevs, _ = cache
    width = cell.U.shape[0]
    u_zr, u_n = cell.U[:, : 2 * width], cell.U[:, 2 * width :]
    dW, dU, db = np.zeros_like(cell.W), np.zeros_like(cell.U), np.zeros_like(cell.b)
    dxs = np.zeros_like(xs)
    dh_next = np.zeros_like(dhs[:, 0, :])
    for t in reversed(range(xs.shape[1])):
        step: GruStep = trace[t]
        h_prev = h_prevs[t]
        dh = dhs[:, t, :] + dh_next
        dn_pre = dh * step.z * (1.0 - step.n**2)
        dz_pre = dh * (step.n - h_prev) * step.z * (1.0 - step.z)
        d_rh = dn_pre @ u_n.T
        dr_pre = d_rh * h_prev * step.r * (1.0 - step.r)
        dzr = np.concatenate([dz_pre, dr_pre], axis=-1)
        da = np.concatenate([dzr, dn_pre], axis=-1)
        dW += xs[:, t, :].T @ da
        dU[:, : 2 * width] += h_prev.T @ dzr
        dU[:, 2 * width :] += (step.r * h_prev).T @ dn_pre
        db += da.sum(axis=0)
        dxs[:, t, :] = da @ cell.W.T
        dh_next = dh * (1.0 - step.z) + d_rh * step.r + dzr @ u_zr.T
    return dxs, dW, dU, db


def recurrent_layer_backward(
    kind: ModelKind, cell: CellParams, cache: LayerCache, dhs: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """Backpropagation through time; returns input gradients and ``dW, dU, db``."""
    if kind is ModelKind.LSTM:
        return _lstm_layer_backward(cell, cache, dhs)
    return _gru_layer_backward(cell, cache, dhs)


# --- Whole networks ---


class DropoutMasks(NamedTuple):
    """Inverted-dropout masks of the two hidden-layer outputs; ``None`` disables a mask."""

    hidden: FloatArray | None = None
    readout: FloatArray | None = None


def dropout_masks(spec: NetworkSpec, batch: int, rng: np.random.Generator) -> DropoutMasks:
    """Draws training masks; kept units are scaled by ``1/(1-p)``. Masks are shared across time."""
    if spec.dropout == 0.0 or spec.kind is ModelKind.LOGREG:
        return DropoutMasks()
    keep = 1.0 - spec.dropout
    h1, h2 = spec.hidden_sizes
    hidden = (rng.random((batch, h1)) < keep) / keep
    readout = (rng.random((batch, h2)) < keep) / keep
    return DropoutMasks(hidden, readout)


def _readout(spec: NetworkSpec, pre: FloatArray) -> FloatArray:
    return np.maximum(pre, 0.0) if spec.readout is Readout.RELU else pre


def _as_batch(spec: NetworkSpec, x: FloatArray) -> FloatArray:
    if x.ndim == 2:
        x = x[np.newaxis]
    if x.ndim != 3 or x.shape[1:] != (spec.n_rows, spec.input_dim):
        raise ShapeError(
            f"windows of shape {x.shape[-2:]} do not match the model's {spec.n_rows} x {spec.input_dim}"
        )
    return x


def _forward(
    params: ParamDict, spec: NetworkSpec, x: FloatArray, masks: DropoutMasks
) -> tuple[FloatArray, dict[str, Any]]:
    cache: dict[str, Any] = {}
    if spec.kind is ModelKind.DNN:
        flat = x.reshape(x.shape[0], -1)
        a1 = flat @ params["d1.W"] + params["d1.b"]
        h1 = np.maximum(a1, 0.0)
        h1d = h1 if masks.hidden is None else h1 * masks.hidden
        last = h1d @ params["d2.W"] + params["d2.b"]
        cache |= {"flat": flat, "a1": a1, "h1d": h1d}
    else:
        h1s, cache1 = recurrent_layer_forward(spec.kind, cell_params(params, "l1"), x)
        in2 = h1s if masks.hidden is None else h1s * masks.hidden[:, np.newaxis, :]
        h2s, cache2 = recurrent_layer_forward(spec.kind, cell_params(params, "l2"), in2)
        last = h2s[:, -1, :]
        cache |= {"cache1": cache1, "cache2": cache2, "steps": x.shape[1]}
    r = _readout(spec, last)
    rd = r if masks.readout is None else r * masks.readout
    logits = rd @ params["out.W"] + params["out.b"]
    cache |= {"last": last, "rd": rd, "logits": logits}
    return logits, cache


def network_forward(params: ParamDict, spec: NetworkSpec, window: FloatArray) -> FloatArray:
    """Class probabilities ``[p_engaged, p_sed]`` of one ``N x D`` window or a ``B x N x D`` batch.

    Dropout is never applied here.

    Raises:
        ShapeError: If the window shape differs from the model's.
    """
    if spec.kind is ModelKind.LOGREG:
        raise ConfigError("logistic regression has no network forward; use logreg_predict")
    single = window.ndim == 2
    logits, _ = _forward(params, spec, _as_batch(spec, window), DropoutMasks())
    probabilities = softmax(logits, axis=-1)
    return probabilities[0] if single else probabilities


def weighted_cross_entropy(
    probabilities_log: FloatArray, y: LabelArray, weights: dict[int, float] | None = None
) -> float:
    """Mean over the batch of ``w_y * -log p_y`` given log-probabilities."""
    picked = -probabilities_log[np.arange(y.shape[0]), y]
    if weights is not None:
        picked = picked * np.array([weights[0], weights[1]])[y]
    return float(picked.mean())


def loss_and_grads(
    params: ParamDict,
    spec: NetworkSpec,
    x: FloatArray,
    y: LabelArray,
    weights: dict[int, float] | None = None,
    masks: DropoutMasks | None = None,
) -> tuple[float, ParamDict]:
    """Class-weighted cross-entropy of a batch and its gradient with respect to every block."""
    x = _as_batch(spec, x)
    y = np.asarray(y, dtype=np.int64)
    masks = masks or DropoutMasks()
    logits, cache = _forward(params, spec, x, masks)
    log_p = log_softmax(logits, axis=-1)
    loss = weighted_cross_entropy(log_p, y, weights)
    batch = x.shape[0]
    sample_w = np.ones(batch) if weights is None else np.array([weights[0], weights[1]])[y]
    dlogits = np.exp(log_p)
    dlogits[np.arange(batch), y] -= 1.0
    dlogits *= (sample_w / batch)[:, np.newaxis]
    grads: ParamDict = {
        "out.W": cache["rd"].T @ dlogits,
        "out.b": dlogits.sum(axis=0),
    }
    dr = dlogits @ params["out.W"].T
    if masks.readout is not None:
        dr = dr * masks.readout
    dlast = dr * (cache["last"] > 0.0) if spec.readout is Readout.RELU else dr
    if spec.kind is ModelKind.DNN:
        grads["d2.W"] = cache["h1d"].T @ dlast
        grads["d2.b"] = dlast.sum(axis=0)
        dh1 = dlast @ params["d2.W"].T
        if masks.hidden is not None:
            dh1 = dh1 * masks.hidden
        da1 = dh1 * (cache["a1"] > 0.0)
        grads["d1.W"] = cache["flat"].T @ da1
        grads["d1.b"] = da1.sum(axis=0)
    else:
        dh2s = np.zeros((batch, cache["steps"], spec.hidden_sizes[1]))
        dh2s[:, -1, :] = dlast
        din2, grads["l2.W"], grads["l2.U"], grads["l2.b"] = recurrent_layer_backward(
            spec.kind, cell_params(params, "l2"), cache["cache2"], dh2s
        )
        dh1s = din2 if masks.hidden is None else din2 * masks.hidden[:, np.newaxis, :]
        _, grads["l1.W"], grads["l1.U"], grads["l1.b"] = recurrent_layer_backward(
            spec.kind, cell_params(params, "l1"), cache["cache1"], dh1s
        )
    return loss, grads


__all__ = [
    "DEFAULT_HIDDEN_SIZES",
    "LSTM_FORGET_BIAS",
    "CellParams",
    "DropoutMasks",
    "GruStep",
    "LstmStep",
    "NetworkSpec",
    "cell_params",
    "check_params",
    "dropout_masks",
    "gru_cell_forward",
    "init_params",
    "loss_and_grads",
    "lstm_cell_forward",
    "network_forward",
    "recurrent_layer_backward",
    "recurrent_layer_forward",
    "weighted_cross_entropy",
]
