import math

import numpy as np
import pytest

from sed_detect.types import ConfigError, ModelKind, Readout, ShapeError
from sed_detect.utilities import (
    CellParams,
    NetworkSpec,
    check_params,
    dropout_masks,
    gru_cell_forward,
    init_params,
    loss_and_grads,
    lstm_cell_forward,
    network_forward,
    weighted_cross_entropy,
)


def sigmoid(v: float) -> float:
    return 1.0 / (1.0 + math.exp(-v))


def random_cell(rng: np.random.Generator, input_dim: int, width: int, gates: int) -> CellParams:
    return CellParams(
        rng.normal(size=(input_dim, gates * width)),
        rng.normal(size=(width, gates * width)),
        rng.normal(size=gates * width),
    )


def affine(cell: CellParams, x: np.ndarray, h: np.ndarray, column: int, *, recurrent: bool = True) -> float:
    total = float(cell.b[column])
    total += sum(float(x[k]) * float(cell.W[k, column]) for k in range(x.shape[0]))
    if recurrent:
        total += sum(float(h[k]) * float(cell.U[k, column]) for k in range(h.shape[0]))
    return total


@pytest.mark.parametrize("seed", range(100))
def test_lstm_cell_matches_scalar_loop(seed: int):
    rng = np.random.default_rng(seed)
    width = 3
    cell = random_cell(rng, 4, width, 4)
    x, h, c = rng.normal(size=4), rng.normal(size=width), rng.normal(size=width)
    h_new, c_new = lstm_cell_forward(cell, x, h, c)
    for j in range(width):
        i = sigmoid(affine(cell, x, h, j))
        f = sigmoid(affine(cell, x, h, width + j))
        g = math.tanh(affine(cell, x, h, 2 * width + j))
        o = sigmoid(affine(cell, x, h, 3 * width + j))
        expected_c = f * c[j] + i * g
        assert c_new[j] == pytest.approx(expected_c, rel=0, abs=1e-12)
        assert h_new[j] == pytest.approx(o * math.tanh(expected_c), rel=0, abs=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_gru_cell_matches_scalar_loop(seed: int):
    rng = np.random.default_rng(seed)
    width = 3
    cell = random_cell(rng, 2, width, 3)
    x, h = rng.normal(size=2), rng.normal(size=width)
    h_new = gru_cell_forward(cell, x, h)
    r = [sigmoid(affine(cell, x, h, width + k)) for k in range(width)]
    for j in range(width):
        z = sigmoid(affine(cell, x, h, j))
        column = 2 * width + j
        candidate = affine(cell, x, h, column, recurrent=False)
        candidate += sum(r[k] * float(h[k]) * float(cell.U[k, column]) for k in range(width))
        expected = (1.0 - z) * h[j] + z * math.tanh(candidate)
        assert h_new[j] == pytest.approx(expected, rel=0, abs=1e-12)


def test_saturated_lstm_cell_carries_its_state():
    rng = np.random.default_rng(11)
    width = 3
    cell = random_cell(rng, 4, width, 4)
    cell = CellParams(cell.W * 0.01, cell.U * 0.01, np.zeros(4 * width))
    cell.b[:width] = -20.0
    cell.b[width : 2 * width] = 20.0
    c0 = rng.uniform(-1.0, 1.0, size=width)
    h, c = np.zeros(width), c0
    for x in rng.normal(size=(100, 4)):
        h, c = lstm_cell_forward(cell, x, h, c)
    assert float(np.linalg.norm(c - c0)) < 1e-6


def test_cells_reject_mismatched_shapes():
    rng = np.random.default_rng(2)
    cell = random_cell(rng, 4, 3, 4)
    with pytest.raises(ShapeError):
        lstm_cell_forward(cell, np.zeros(5), np.zeros(3), np.zeros(3))
    with pytest.raises(ShapeError):
        lstm_cell_forward(cell, np.zeros(4), np.zeros(3), np.zeros(2))
    with pytest.raises(ShapeError):
        gru_cell_forward(cell, np.zeros(4), np.zeros(3))


@pytest.mark.parametrize("kind", [ModelKind.DNN, ModelKind.GRU, ModelKind.LSTM])
def test_forward_gives_probabilities(kind: ModelKind):
    spec = NetworkSpec(kind, 5, 4, (6, 2))
    params = init_params(spec, np.random.default_rng(0))
    check_params(params, spec)
    batch = np.random.default_rng(1).normal(size=(7, 4, 5))
    probabilities = network_forward(params, spec, batch)
    assert probabilities.shape == (7, 2)
    assert probabilities.sum(axis=1) == pytest.approx(np.ones(7))
    single = network_forward(params, spec, batch[3])
    assert single.shape == (2,)
    assert np.array_equal(single, probabilities[3])


def test_forward_rejects_wrong_window_shape():
    spec = NetworkSpec(ModelKind.LSTM, 5, 4, (6, 2))
    params = init_params(spec, np.random.default_rng(0))
    with pytest.raises(ShapeError):
        network_forward(params, spec, np.zeros((3, 5)))
    with pytest.raises(ConfigError):
        network_forward({}, NetworkSpec(ModelKind.LOGREG, 5, 4), np.zeros((4, 5)))


def test_dnn_forward_matches_manual_computation():
    spec = NetworkSpec(ModelKind.DNN, 3, 2, (4, 2), Readout.IDENTITY)
    params = init_params(spec, np.random.default_rng(5))
    window = np.random.default_rng(6).normal(size=(2, 3))
    hidden = np.maximum(window.reshape(-1) @ params["d1.W"] + params["d1.b"], 0.0)
    last = hidden @ params["d2.W"] + params["d2.b"]
    logits = last @ params["out.W"] + params["out.b"]
    expected = np.exp(logits - logits.max())
    expected /= expected.sum()
    assert network_forward(params, spec, window) == pytest.approx(expected)


def test_initialization_is_seeded_and_sets_the_forget_bias():
    spec = NetworkSpec(ModelKind.LSTM, 5, 4, (6, 2))
    first = init_params(spec, np.random.default_rng(9))
    second = init_params(spec, np.random.default_rng(9))
    assert all(np.array_equal(first[name], second[name]) for name in first)
    assert first["l1.b"][6:12].tolist() == [1.0] * 6
    assert first["l1.b"][:6].tolist() == [0.0] * 6


def test_parameter_shapes():
    spec = NetworkSpec(ModelKind.GRU, 96, 11)
    shapes = spec.param_shapes()
    assert shapes["l1.W"] == (96, 96)
    assert shapes["l2.U"] == (2, 6)
    assert NetworkSpec(ModelKind.LOGREG, 96, 11).n_params == 96 * 11 + 1
    assert NetworkSpec.from_dict(spec.to_dict()) == spec


def test_network_spec_validation():
    with pytest.raises(ConfigError):
        NetworkSpec(ModelKind.DNN, 0, 3)
    with pytest.raises(ConfigError):
        NetworkSpec(ModelKind.DNN, 3, 3, dropout=1.0)


def test_weighted_cross_entropy():
    log_p = np.log(np.array([[0.8, 0.2], [0.4, 0.6]]))
    y = np.array([0, 1])
    assert weighted_cross_entropy(log_p, y) == pytest.approx(-(math.log(0.8) + math.log(0.6)) / 2)
    weighted = weighted_cross_entropy(log_p, y, {0: 0.5, 1: 2.0})
    assert weighted == pytest.approx(-(0.5 * math.log(0.8) + 2.0 * math.log(0.6)) / 2)


def test_dropout_masks_scale_kept_units():
    spec = NetworkSpec(ModelKind.GRU, 3, 2, (50, 40), dropout=0.25)
    masks = dropout_masks(spec, 20, np.random.default_rng(0))
    assert masks.hidden is not None
    assert masks.readout is not None
    assert masks.hidden.shape == (20, 50)
    assert set(np.unique(masks.hidden).tolist()) <= {0.0, 1.0 / 0.75}
    assert dropout_masks(NetworkSpec(ModelKind.GRU, 3, 2, dropout=0.0), 4, np.random.default_rng(0)).hidden is None


def test_loss_matches_forward_without_dropout():
    spec = NetworkSpec(ModelKind.LSTM, 3, 3, (4, 2))
    params = init_params(spec, np.random.default_rng(3))
    x = np.random.default_rng(4).normal(size=(5, 3, 3))
    y = np.array([0, 1, 1, 0, 1])
    loss, grads = loss_and_grads(params, spec, x, y)
    p = network_forward(params, spec, x)
    assert loss == pytest.approx(float(np.mean(-np.log(p[np.arange(5), y]))))
    assert set(grads) == set(params)
