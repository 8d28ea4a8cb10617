"""Independent reference implementations used to cross-check the solvers.

Nothing here touches the package's linear algebra paths: the conjugate
gradient solver is plain numpy iteration, the gradient descent
minimizer works on the training objective directly, and the risk
helpers recompute means from scratch.
"""

import numpy as np


def conjugate_gradient(A: np.ndarray, b: np.ndarray, tol: float = 1e-12, max_iter: int | None = None) -> np.ndarray:
    """Solve ``A x = b`` for SPD ``A`` to relative residual ``tol``."""
    n = b.shape[0]
    max_iter = max_iter or 20 * n
    x = np.zeros(n)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    threshold = tol * np.linalg.norm(b)
    for _ in range(max_iter):
        if np.sqrt(rs) <= threshold:
            break
        Ap = A @ p
        alpha = rs / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


def objective(alpha: np.ndarray, K: np.ndarray, y: np.ndarray, lam: float, n_global: int) -> float:
    """Training objective ``lam * a'Ka + (1/n) ||y - Ka||^2``."""
    fitted = K @ alpha
    return float(lam * (alpha @ K @ alpha) + np.sum((y - fitted) ** 2) / n_global)


def gradient_descent(K: np.ndarray, y: np.ndarray, lam: float, n_global: int,
                     iters: int = 200_000, tol: float = 1e-14) -> np.ndarray:
    """Minimize :func:`objective` by plain gradient descent."""
    top = float(np.linalg.eigvalsh(K)[-1])
    step = 1.0 / (2.0 * lam * top + 2.0 * top * top / n_global)
    alpha = np.zeros(y.shape[0])
    for _ in range(iters):
        residual = y - K @ alpha
        grad = 2.0 * lam * (K @ alpha) - (2.0 / n_global) * (K @ residual)
        alpha = alpha - step * grad
        if float(np.max(np.abs(grad))) < tol:
            break
    return alpha


def gaussian_kernel_matrix(X: np.ndarray, Z: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel matrix by explicit loops over pairs (slow, unambiguous)."""
    X = np.atleast_2d(X)
    Z = np.atleast_2d(Z)
    out = np.empty((X.shape[0], Z.shape[0]))
    for i in range(X.shape[0]):
        for j in range(Z.shape[0]):
            diff = X[i] - Z[j]
            out[i, j] = np.exp(-float(diff @ diff) / (gamma * gamma))
    return out
