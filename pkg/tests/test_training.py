from pathlib import Path

import numpy as np
import pytest

from sklearn.linear_model import LogisticRegression

from sed_detect.models import FeatureLayout, TrainConfig
from sed_detect.types import ConfigError, DataError, ModelKind, Readout, ShapeError
from sed_detect.utilities import (
    NetworkSpec,
    RMSprop,
    TrainedModel,
    gradient_check,
    load_model,
    logreg_predict,
    logreg_train,
    predict_network,
    save_model,
    split_validation,
    train_network,
)


def toy_data(seed: int = 0, n_interactions: int = 8, per_interaction: int = 6):
    rng = np.random.default_rng(seed)
    n = n_interactions * per_interaction
    y = np.arange(n) % 2
    x = rng.normal(size=(n, 3, 4)) + y[:, np.newaxis, np.newaxis]
    ids = [f"i{k // per_interaction}" for k in range(n)]
    return x, y.astype(np.int8), ids


@pytest.mark.parametrize("kind", list(ModelKind))
def test_analytic_gradients_match_finite_differences(kind: ModelKind):
    report = gradient_check(kind)
    assert report.passed, report.errors


@pytest.mark.parametrize(("kind", "block"), [(ModelKind.LSTM, "l1.U"), (ModelKind.GRU, "l2.W"), (ModelKind.DNN, "d1.W")])
def test_gradient_check_catches_a_faulty_block(kind: ModelKind, block: str):
    report = gradient_check(kind, corrupt=block)
    assert report.failed == [block]


def test_gradient_check_without_dropout_or_readout():
    report = gradient_check(ModelKind.GRU, dropout=0.0, readout=Readout.IDENTITY)
    assert report.passed


def test_rmsprop_single_step():
    params = {"w": np.array([1.0, -2.0])}
    grads = {"w": np.array([0.5, -0.1])}
    optimizer = RMSprop(params, learning_rate=0.01, rho=0.9, epsilon=1e-7, clip_norm=None)
    optimizer.step(params, grads)
    square = 0.1 * grads["w"] ** 2
    expected = np.array([1.0, -2.0]) - 0.01 * grads["w"] / (np.sqrt(square) + 1e-7)
    assert params["w"] == pytest.approx(expected)


def test_rmsprop_clips_the_global_norm():
    params = {"w": np.zeros(2)}
    clipped = RMSprop(params, learning_rate=1.0, clip_norm=1.0)
    norm = clipped.step(params, {"w": np.array([3.0, 4.0])})
    assert norm == pytest.approx(5.0)
    assert clipped.square_avg["w"] == pytest.approx(0.1 * np.array([0.6, 0.8]) ** 2)


def test_validation_split_holds_out_whole_interactions():
    ids = ["a", "a", "b", "b", "c", "d"]
    mask, held_out = split_validation(ids, 0.25, np.random.default_rng(0))
    assert len(held_out) == 1
    assert [i for i, m in zip(ids, mask, strict=True) if m] == [i for i in ids if i in held_out]
    with pytest.raises(DataError):
        split_validation(["a", "a"], 0.1, np.random.default_rng(0))


def test_training_is_deterministic():
    x, y, ids = toy_data()
    spec = NetworkSpec(ModelKind.GRU, 4, 3, (4, 2), dropout=0.2)
    config = TrainConfig(seed=11, max_epochs=3, batch_size=8)
    first = train_network(spec, x, y, ids, config)
    second = train_network(spec, x, y, ids, config)
    assert all(np.array_equal(first.params[name], second.params[name]) for name in first.params)
    assert first.history.train_loss == second.history.train_loss
    assert first.validation_ids == second.validation_ids


def test_early_stopping_restores_the_best_epoch():
    x, y, ids = toy_data(1)
    spec = NetworkSpec(ModelKind.DNN, 4, 3, (4, 2))
    # a vanishing learning rate leaves the validation score flat after the first epoch
    config = TrainConfig(seed=2, max_epochs=50, patience=1, learning_rate=1e-12)
    fit = train_network(spec, x, y, ids, config)
    assert fit.history.stopped_early
    assert fit.history.epochs_run == 2
    assert fit.history.best_epoch == 1


def test_training_rejects_logistic_regression_and_mismatched_inputs():
    x, y, ids = toy_data()
    with pytest.raises(ConfigError):
        train_network(NetworkSpec(ModelKind.LOGREG, 4, 3), x, y, ids, TrainConfig())
    with pytest.raises(ShapeError):
        train_network(NetworkSpec(ModelKind.DNN, 4, 3), x, y[:-1], ids, TrainConfig())


@pytest.mark.parametrize("kind", [ModelKind.DNN, ModelKind.GRU, ModelKind.LSTM])
def test_training_fits_a_separable_set(kind: ModelKind):
    rng = np.random.default_rng(4)
    pattern = rng.normal(size=(3, 4))
    y = np.arange(20) % 2
    x = np.where(y[:, np.newaxis, np.newaxis] == 1, pattern, -pattern) + rng.normal(scale=0.01, size=(20, 3, 4))
    ids = [f"i{k // 2}" for k in range(20)]
    spec = NetworkSpec(kind, 4, 3, (8, 4), Readout.IDENTITY, dropout=0.0)
    config = TrainConfig(seed=0, max_epochs=100, batch_size=4, learning_rate=1e-2, patience=100)
    fit = train_network(spec, x, y.astype(np.int8), ids, config)
    p_sed = predict_network(fit.params, spec, x)
    assert float(np.mean((p_sed > 0.5) == y)) == 1.0


def test_logreg_matches_sklearn():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(200, 5))
    y = (x @ np.array([1.0, -2.0, 0.5, 0.0, 1.5]) + rng.normal(size=200) > 0).astype(np.int8)
    params, meta = logreg_train(x, y, c=1.0, max_iter=10_000, tol=1e-10)
    reference = LogisticRegression(C=1.0, tol=1e-10, max_iter=10_000).fit(x, y)
    assert params["w"] == pytest.approx(reference.coef_[0], abs=1e-4)
    assert params["b"][0] == pytest.approx(reference.intercept_[0], abs=1e-4)
    assert logreg_predict(params, x) == pytest.approx(reference.predict_proba(x)[:, 1], abs=1e-4)
    assert meta["iterations"] > 0


def test_logreg_predict_dispatches_on_rank():
    rng = np.random.default_rng(2)
    params = {"w": rng.normal(size=6), "b": np.array([0.3])}
    vector = rng.normal(size=6)
    single = logreg_predict(params, vector)
    assert single.shape == ()
    one_row = logreg_predict(params, vector[np.newaxis])
    assert one_row.shape == (1,)
    assert one_row[0] == pytest.approx(float(single))
    windows = logreg_predict(params, rng.normal(size=(4, 1, 6)))
    assert windows.shape == (4,)
    with pytest.raises(ShapeError):
        logreg_predict(params, rng.normal(size=5))
    with pytest.raises(ShapeError):
        logreg_predict(params, rng.normal(size=(2, 2, 2, 2)))


def test_weighted_logreg_matches_sklearn_class_weights():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(150, 3))
    y = (x[:, 0] + 0.5 * rng.normal(size=150) > 0.8).astype(np.int8)
    weights = {0: 0.6, 1: 2.5}
    params, _ = logreg_train(x, y, weights, max_iter=10_000, tol=1e-10)
    reference = LogisticRegression(C=1.0, class_weight=weights, tol=1e-10, max_iter=10_000).fit(x, y)
    assert params["w"] == pytest.approx(reference.coef_[0], abs=1e-4)


def test_logreg_needs_finite_features_and_two_classes():
    with pytest.raises(DataError):
        logreg_train(np.array([[np.nan], [1.0]]), np.array([0, 1]))
    with pytest.raises(DataError):
        logreg_train(np.zeros((3, 2)), np.zeros(3, dtype=np.int8))


def test_saved_model_reloads_bit_exact(tmp_path: Path, lstm_model: TrainedModel, layout: FeatureLayout):
    path = save_model(tmp_path / "model.json", lstm_model)
    loaded = load_model(path)
    assert loaded.model_id == lstm_model.model_id == "lstm-tau2-eta1"
    assert loaded.spec == lstm_model.spec
    assert all(np.array_equal(loaded.params[k], lstm_model.params[k]) for k in lstm_model.params)
    assert np.array_equal(loaded.imputation.means, lstm_model.imputation.means)
    assert np.array_equal(loaded.normalization.std, lstm_model.normalization.std)
    window = np.random.default_rng(0).normal(size=(lstm_model.spec.n_rows, layout.pooled_dim))
    assert loaded.predict_window(window) == lstm_model.predict_window(window)
    loaded.check_layout(layout)


def test_trained_model_records_its_training(lstm_model: TrainedModel, logreg_model: TrainedModel):
    meta = lstm_model.train_meta
    assert meta["train_ids"] == ["synth-0000", "synth-0001", "synth-0002", "synth-0003"]
    assert meta["epochs_run"] <= 2
    assert meta["optimizer"]["name"] == "rmsprop"
    assert logreg_model.train_meta["solver"] == "L-BFGS-B"
    assert 0.0 <= logreg_model.predict_window(np.zeros((3, 96))) <= 1.0


def test_invalid_model_file_is_a_config_error(tmp_path: Path):
    path = tmp_path / "model.json"
    path.write_text('{"kind": "lstm"}')
    with pytest.raises(ConfigError):
        load_model(path)
