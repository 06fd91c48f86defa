"""
`utilities/logreg` module.

Class-weighted, l2-regularized logistic regression on flattened windows: the baseline
classifier. The objective follows the usual ``C`` parametrization,

    0.5 * ||w||^2 + C * sum_i s_i * (log(1 + exp(z_i)) - y_i * z_i),  z = X w + b,

with per-sample weights ``s_i`` taken from the class weights and an unpenalized bias. It
is minimized with scipy's L-BFGS-B, which is deterministic.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging

from typing import Any

import numpy as np

from scipy.optimize import minimize
from scipy.special import expit

from sed_detect.types import DataError, FloatArray, LabelArray, ParamDict, ShapeError


logger = logging.getLogger(__name__)


def _flatten(x: FloatArray) -> FloatArray:
    return x.reshape(x.shape[0], -1) if x.ndim == 3 else x


def logreg_objective(
    params: ParamDict,
    x: FloatArray,
    y: LabelArray,
    sample_weights: FloatArray | None = None,
    c: float = 1.0,
) -> tuple[float, ParamDict]:
    """Regularized weighted negative log-likelihood and its gradient."""
    x = _flatten(x)
    target = np.asarray(y, dtype=np.float64)
    s = np.ones(x.shape[0]) if sample_weights is None else sample_weights
    w, b = params["w"], params["b"]
    z = x @ w + b[0]
    loss = 0.5 * float(w @ w) + c * float(np.sum(s * (np.logaddexp(0.0, z) - target * z)))
    residual = c * s * (expit(z) - target)
    return loss, {"w": w + x.T @ residual, "b": np.array([residual.sum()])}


def logreg_train(
    x: FloatArray,
    y: LabelArray,
    weights: dict[int, float] | None = None,
    *,
    c: float = 1.0,
    max_iter: int = 1000,
    tol: float = 1e-6,
) -> tuple[ParamDict, dict[str, Any]]:
    """Fits logistic regression from a zero start.

    Args:
        x (FloatArray): ``n x N x D`` windows or ``n x F`` flattened features.
        y (LabelArray): Binary labels.
        weights (dict[int, float] | None): Class weights; unweighted when omitted.
        c (float): Inverse regularization strength.
        max_iter (int): Iteration cap.
        tol (float): Gradient tolerance.

    Returns:
        tuple[ParamDict, dict[str, Any]]: ``{"w", "b"}`` and solver metadata.

    Raises:
        DataError: On non-finite features or a single class.
    """
    x = _flatten(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.int8)
    if not np.all(np.isfinite(x)):
        raise DataError("logistic regression features must be finite; impute them first")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} windows but {y.shape[0]} labels")
    if np.unique(y).size < 2:
        raise DataError("logistic regression needs windows of both classes")
    sample_weights = None if weights is None else np.array([weights[0], weights[1]])[y]
    n_features = x.shape[1]

    def fun(theta: FloatArray) -> tuple[float, FloatArray]:
        loss, grads = logreg_objective({"w": theta[:-1], "b": theta[-1:]}, x, y, sample_weights, c)
        return loss, np.concatenate([grads["w"], grads["b"]])

    result = minimize(
        fun,
        np.zeros(n_features + 1),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15},
    )
    theta = np.asarray(result.x, dtype=np.float64)
    gradient_norm = float(np.linalg.norm(np.asarray(result.jac)))
    if not result.success:
        logger.debug("logreg stopped after %d iterations: %s", result.nit, result.message)
    meta = {
        "iterations": int(result.nit),
        "converged": bool(gradient_norm < tol or result.success),
        "gradient_norm": gradient_norm,
        "objective": float(result.fun),
    }
    return {"w": theta[:-1].copy(), "b": theta[-1:].copy()}, meta


def logreg_predict(params: ParamDict, x: FloatArray) -> FloatArray:
    """SED probability ``sigmoid(w . x + b)`` by input rank.

    A flat vector gives a 0-d array; an ``n x d`` matrix of flat rows or an ``n x N x D``
    batch of windows gives one value per row or window.
    """
    w, b = params["w"], params["b"]
    if x.ndim == 1:
        if x.shape[0] != w.shape[0]:
            raise ShapeError(f"window has {x.shape[0]} features, model expects {w.shape[0]}")
        return np.asarray(expit(x @ w + b[0]))
    if x.ndim not in (2, 3):
        raise ShapeError(f"expected a vector, a matrix or a batch of windows, got {x.ndim} dimensions")
    flat = _flatten(x)
    if flat.shape[1] != w.shape[0]:
        raise ShapeError(f"windows have {flat.shape[1]} features, model expects {w.shape[0]}")
    return expit(flat @ w + b[0])


__all__ = ["logreg_objective", "logreg_predict", "logreg_train"]
