"""Gaussian kernel evaluation and the closed-form cell solver.

Each working set is fit by kernel least squares: for inputs
``x_1..x_m``, labels ``y``, regularization weight ``lam`` (normalized
by a global sample count ``n``) and kernel width ``gamma``, the
coefficient vector solves

    (K + n * lam * I) alpha = y,

where ``K[i, j] = exp(-||x_i - x_j||^2 / gamma^2)``.  The fitted
function is ``f(x) = sum_i alpha_i k(x, x_i)`` and predictions are
clipped to ``[-M, M]``; clipping can only reduce least-squares risk
when labels lie in that range.  The same solver serves both
conventions: ``lam`` weighted against the full training size, or the
working-set-local weight ``lambda_tilde = n * lam / m``.

The regularized matrix is symmetric positive definite, so the system is
solved by Cholesky factorization; on breakdown (possible for tiny
ridges with duplicated points) a small diagonal jitter is added and the
factorization retried a bounded number of times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .errors import ConfigError, DimensionMismatchError, NumericalError

# scratch-size cap for cross-kernel blocks, in float64 elements
_BLOCK_ELEMENTS = 4_000_000

_JITTER_RELATIVE = 1e-12
_MAX_FACTOR_ATTEMPTS = 3


def kernel_eval(x: np.ndarray, z: np.ndarray, gamma: float) -> float:
    """Gaussian kernel ``exp(-||x - z||^2 / gamma^2)`` for two points."""
    if gamma <= 0:
        raise ConfigError(f"kernel width must be positive, got {gamma}")
    x = np.asarray(x, dtype=np.float64).ravel()
    z = np.asarray(z, dtype=np.float64).ravel()
    if x.shape != z.shape:
        raise DimensionMismatchError(f"kernel arguments differ in shape: {x.shape} vs {z.shape}")
    diff = x - z
    return float(np.exp(-(diff @ diff) / (gamma * gamma)))


def gaussian_gram(X: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel matrix of a point set with itself (unit diagonal)."""
    if gamma <= 0:
        raise ConfigError(f"kernel width must be positive, got {gamma}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    sq = cdist(X, X, "sqeuclidean")
    np.multiply(sq, -1.0 / (gamma * gamma), out=sq)
    return np.exp(sq, out=sq)


def gaussian_cross(X: np.ndarray, Z: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel matrix between query points ``X`` and supports ``Z``."""
    if gamma <= 0:
        raise ConfigError(f"kernel width must be positive, got {gamma}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if X.shape[1] != Z.shape[1]:
        raise DimensionMismatchError(
            f"query dimension {X.shape[1]} does not match support dimension {Z.shape[1]}"
        )
    sq = cdist(X, Z, "sqeuclidean")
    np.multiply(sq, -1.0 / (gamma * gamma), out=sq)
    return np.exp(sq, out=sq)


def clip(values, bound: float):
    """Truncate values to ``[-bound, bound]``."""
    if bound <= 0:
        raise ConfigError(f"clip bound must be positive, got {bound}")
    return np.clip(values, -bound, bound)


@dataclass
class CellModel:
    """One fitted working set: supports, coefficients, and parameters.

    A zero model (``support_inputs`` empty, NaN parameters) stands in
    for cells that received no training points; it predicts 0.
    """

    support_inputs: np.ndarray
    alpha: np.ndarray
    gamma: float
    lambda_tilde: float
    clip_bound: float

    @property
    def is_zero(self) -> bool:
        return self.support_inputs.shape[0] == 0


def zero_model(d: int, clip_bound: float) -> CellModel:
    return CellModel(
        support_inputs=np.zeros((0, d)),
        alpha=np.zeros(0),
        gamma=float("nan"),
        lambda_tilde=float("nan"),
        clip_bound=float(clip_bound),
    )


def _solve_spd(K: np.ndarray, ridge: float, y: np.ndarray) -> np.ndarray:
    n = K.shape[0]
    jitter = _JITTER_RELATIVE * float(np.trace(K)) / n
    extra = 0.0
    for attempt in range(_MAX_FACTOR_ATTEMPTS):
        A = K.copy()
        A.flat[:: n + 1] += ridge + extra
        try:
            factor = cho_factor(A, lower=True, overwrite_a=True, check_finite=False)
            return cho_solve(factor, y, check_finite=False)
        except np.linalg.LinAlgError:
            extra = jitter * 10.0**attempt
    raise NumericalError(
        f"Cholesky factorization failed for a {n}x{n} system after "
        f"{_MAX_FACTOR_ATTEMPTS} jitter attempts (ridge={ridge:g})"
    )


def train_cell(
    inputs: np.ndarray,
    labels: np.ndarray,
    lam: float,
    gamma: float,
    n_global: int,
    clip_bound: float = 1.0,
) -> CellModel:
    """Fit one working set with regularization weighted by ``n_global``.

    ``lam`` is the regularization parameter of the objective whose data
    term averages over ``n_global`` samples; the working set itself may
    be smaller.  An empty working set yields the zero model.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.float64)
    m = inputs.shape[0]
    if labels.shape != (m,):
        raise DimensionMismatchError(f"{m} inputs but label shape {labels.shape}")
    if m == 0:
        return zero_model(inputs.shape[1], clip_bound)
    if lam <= 0:
        raise ConfigError(f"regularization must be positive, got {lam}")
    if n_global < m:
        raise ConfigError(f"n_global={n_global} smaller than the working set ({m})")
    ridge = n_global * lam
    K = gaussian_gram(inputs, gamma)
    alpha = _solve_spd(K, ridge, labels)
    return CellModel(
        support_inputs=inputs,
        alpha=alpha,
        gamma=float(gamma),
        lambda_tilde=ridge / m,
        clip_bound=float(clip_bound),
    )


def train_cell_local(
    inputs: np.ndarray,
    labels: np.ndarray,
    lambda_tilde: float,
    gamma: float,
    clip_bound: float = 1.0,
) -> CellModel:
    """Fit a working set with its own size as the normalizer."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    return train_cell(inputs, labels, lambda_tilde, gamma, inputs.shape[0], clip_bound)


def predict_many(model: CellModel, X: np.ndarray) -> np.ndarray:
    """Unclipped predictions for a batch of query points."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.is_zero:
        return np.zeros(X.shape[0])
    out = np.empty(X.shape[0])
    block = max(1, _BLOCK_ELEMENTS // max(1, model.support_inputs.shape[0]))
    for start in range(0, X.shape[0], block):
        stop = min(X.shape[0], start + block)
        out[start:stop] = gaussian_cross(X[start:stop], model.support_inputs, model.gamma) @ model.alpha
    return out


def predict(model: CellModel, x: np.ndarray) -> float:
    """Unclipped prediction for one query point."""
    return float(predict_many(model, np.atleast_2d(x))[0])


def predict_clipped_many(model: CellModel, X: np.ndarray) -> np.ndarray:
    return clip(predict_many(model, X), model.clip_bound)


def predict_clipped(model: CellModel, x: np.ndarray) -> float:
    return float(clip(predict(model, x), model.clip_bound))


def cell_to_record(model: CellModel) -> dict:
    """JSON-ready dictionary for one cell model."""
    return {
        "support_inputs": model.support_inputs.tolist(),
        "alpha": model.alpha.tolist(),
        "gamma": model.gamma,
        "lambda_tilde": model.lambda_tilde,
        "clip_bound": model.clip_bound,
    }


def cell_from_record(record: dict, d: int) -> CellModel:
    supports = np.asarray(record["support_inputs"], dtype=np.float64)
    if supports.size == 0:
        supports = supports.reshape(0, d)
    return CellModel(
        support_inputs=supports,
        alpha=np.asarray(record["alpha"], dtype=np.float64),
        gamma=float(record["gamma"]),
        lambda_tilde=float(record["lambda_tilde"]),
        clip_bound=float(record["clip_bound"]),
    )
