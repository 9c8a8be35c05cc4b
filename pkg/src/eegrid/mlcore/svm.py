"""Binary RBF-kernel SVM trained by sequential minimal optimization.

The solver follows the second-order working-set selection of Fan, Chen and
Lin (2005): the pair (i, j) is the maximal-violating ``i`` and the ``j``
giving the largest guaranteed decrease of the dual objective. Training stops
once the KKT gap ``m(alpha) - M(alpha)`` drops below ``tol``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

TAU = 1e-12


class ConvergenceError(RuntimeError):
    pass


def rbf_kernel(A, B, sigma: float) -> np.ndarray:
    """``exp(-||a - b||^2 / (2 sigma^2))`` for all row pairs."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    d2 = np.sum(A**2, axis=1)[:, None] + np.sum(B**2, axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-np.maximum(d2, 0.0) / (2.0 * sigma**2))


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray   # alpha_i of the support vectors
    sv_labels: np.ndarray   # +-1
    bias: float
    sigma: float
    C: float
    n_iter: int = 0
    kkt_gap: float = 0.0
    train_alpha: np.ndarray | None = None  # alpha of every training sample, zeros included

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64).reshape(len(X), -1)
        if len(self.support_vectors) == 0:
            return np.full(len(X), self.bias)
        K = rbf_kernel(X, self.support_vectors, self.sigma)
        return K @ (self.dual_coef * self.sv_labels) + self.bias

    def predict(self, X) -> np.ndarray:
        """Labels in {0, 1}; a zero decision value maps to 1."""
        return (self.decision_function(X) >= 0).astype(int)


@dataclass
class _Solution:
    alpha: np.ndarray
    grad: np.ndarray
    rho: float
    n_iter: int
    gap: float


def _smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int) -> _Solution:
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 0.5 a'Qa - e'a
    it = 0
    gap = np.inf
    while True:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        v = -y * G
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(v[up])])
        m = v[i]
        M = v[low].min()
        gap = m - M
        if gap < tol:
            break
        if it >= max_iter:
            raise ConvergenceError(f"SMO did not reach KKT gap {tol:g} in {max_iter} iterations (gap {gap:.3g})")
        cand = np.flatnonzero(low & (v < m))
        b = m - v[cand]
        a = diag[i] + diag[cand] - 2.0 * y[i] * y[cand] * Q[i, cand]
        a = np.where(a > 0, a, TAU)
        j = int(cand[np.argmin(-(b * b) / a)])

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = max(diag[i] + diag[j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        G += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
        it += 1

    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub_set = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_set = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yG[ub_set].min() if ub_set.any() else np.inf
        lb = yG[lb_set].max() if lb_set.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub + lb) else 0.0
    return _Solution(alpha, G, rho, it, float(gap))


def svm_train(X, y, sigma: float = 0.4, C: float = 1.0, tol: float = 1e-3,
              max_iter: int | None = None) -> SvmModel:
    """Fit on labels in {0, 1}. Raises ConvergenceError past the iteration cap."""
    X = np.asarray(X, dtype=np.float64)
    X = X.reshape(len(X), -1)
    y01 = np.asarray(y, dtype=int)
    if set(np.unique(y01)) != {0, 1}:
        raise ValueError("SVM training needs both classes 0 and 1")
    if not (C > 0 and sigma > 0 and tol > 0):
        raise ValueError("C, sigma and tol must be positive")
    ypm = np.where(y01 == 1, 1.0, -1.0)
    K = rbf_kernel(X, X, sigma)
    sol = _smo(K, ypm, C, tol, max_iter if max_iter is not None else max(100_000, 100 * len(X)))
    sv = sol.alpha > 0
    return SvmModel(X[sv], sol.alpha[sv], ypm[sv], -sol.rho, sigma, C, sol.n_iter, sol.gap, sol.alpha.copy())


def kkt_violations(model: SvmModel, X, y, alpha_full: np.ndarray | None = None) -> np.ndarray:
    """Per-sample KKT residual of the margin conditions ``y f(x)`` vs alpha bounds.

    ``alpha_full`` gives alpha for every training sample (zeros for non-SVs);
    it defaults to the alphas stored at training time.
    """
    ypm = np.where(np.asarray(y) == 1, 1.0, -1.0)
    margin = ypm * model.decision_function(X)
    alpha = model.train_alpha if alpha_full is None else np.asarray(alpha_full, dtype=float)
    if alpha is None or len(alpha) != len(ypm):
        raise ValueError("need the training alphas of exactly these samples")
    res = np.zeros(len(ypm))
    lower = alpha <= 0
    upper = alpha >= model.C
    free = ~(lower | upper)
    res[lower] = np.maximum(0.0, 1.0 - margin[lower])
    res[upper] = np.maximum(0.0, margin[upper] - 1.0)
    res[free] = np.abs(margin[free] - 1.0)
    return res


def grid_search(X_train, y_train, X_valid, y_valid, C_grid=(0.1, 1.0, 10.0),
                sigma_grid=(0.2, 0.4, 0.8), tol: float = 1e-3) -> tuple[float, float, dict]:
    """Pick (C, sigma) with the best validation accuracy.

    Ties go to the smaller C, then the larger sigma, so the result does not
    depend on grid order. Returns ``(C, sigma, {(C, sigma): accuracy})``.
    """
    C_grid, sigma_grid = list(C_grid), list(sigma_grid)
    if not C_grid or not sigma_grid:
        raise ValueError("empty parameter grid")
    y_valid = np.asarray(y_valid, dtype=int)
    scores = {}
    for C, sigma in itertools.product(C_grid, sigma_grid):
        model = svm_train(X_train, y_train, sigma=sigma, C=C, tol=tol)
        scores[(C, sigma)] = float(np.mean(model.predict(X_valid) == y_valid))
    best = min(scores, key=lambda cs: (-scores[cs], cs[0], -cs[1]))
    return best[0], best[1], scores
