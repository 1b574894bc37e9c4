"""Ridge-penalized hinge-loss SVM: the baseline classifier and the garrote's
initial estimator.

The problem min_β,β0 Σ_i [1 - y_i(x_i·β + β0)]_+ + λ‖β‖² is solved through
its box-constrained dual QP (which only touches the n×n gram matrix, so the
same code powers the SVD-reduced high-dimensional fit), followed by an exact
one-dimensional minimization for the unpenalized intercept.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from cvxopt import matrix, solvers

log = logging.getLogger(__name__)

_QP_OPTIONS = {
    "show_progress": False,
    "abstol": 1e-10,
    "reltol": 1e-10,
    "feastol": 1e-10,
    "maxiters": 200,
}


class NonfiniteFeature(ValueError):
    pass


class SingleClassData(UserWarning):
    pass


@dataclass(frozen=True)
class L2FitResult:
    intercept: float
    coefficients: np.ndarray
    lam: float


def hinge(margins):
    return np.maximum(0.0, margins)


def decision_values(fit, X):
    return np.asarray(X, dtype=float) @ fit.coefficients + fit.intercept


def l2_objective(fit, X, y):
    m = 1.0 - y * decision_values(fit, X)
    return float(hinge(m).sum() + fit.lam * fit.coefficients @ fit.coefficients)


def _best_intercept(margins, y):
    """Exact argmin_b Σ [1 - y_i(m_i + b)]_+ (piecewise linear, convex);
    the minimum is attained at one of the breakpoints b = y_i - m_i."""
    cands = np.sort(y - margins)
    obj = hinge(1.0 - y[None, :] * (margins[None, :] + cands[:, None])).sum(axis=1)
    return float(cands[int(np.argmin(obj))])


def fit_l2_svm(X, y, lam: float) -> L2FitResult:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if not np.all(np.isfinite(X)):
        raise NonfiniteFeature("design matrix contains NaN/Inf")
    n = X.shape[0]
    if np.all(y == y[0]):
        warnings.warn("all labels identical; returning a constant classifier",
                      SingleClassData)
        return L2FitResult(float(y[0]), np.zeros(X.shape[1]), lam)

    K = X @ X.T
    Q = (np.outer(y, y) * K) / (2.0 * lam)
    Q[np.diag_indices_from(Q)] += 1e-10 * (1.0 + np.trace(Q) / n)

    G = np.vstack([-np.eye(n), np.eye(n)])
    h = np.concatenate([np.zeros(n), np.ones(n)])
    solvers.options.update(_QP_OPTIONS)
    res = solvers.qp(
        matrix(Q), matrix(-np.ones(n)),
        matrix(G), matrix(h),
        matrix(y[None, :]), matrix(np.zeros(1)),
    )
    alpha = np.array(res["x"]).ravel()
    beta = X.T @ (alpha * y) / (2.0 * lam)
    b0 = _best_intercept(X @ beta, y)
    return L2FitResult(b0, beta, lam)


def fit_l2_svm_svd_reduced(X, y, lam: float, rank_tol: float = 1e-10) -> L2FitResult:
    """Fit in the n-dimensional row space of X (exact for the ridge-hinge
    objective since it only depends on Xβ and ‖β‖ within the row space)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not np.all(np.isfinite(X)):
        raise NonfiniteFeature("design matrix contains NaN/Inf")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        # zero design: intercept-only classifier
        y = np.asarray(y, dtype=float)
        b0 = _best_intercept(np.zeros(X.shape[0]), y)
        return L2FitResult(b0, np.zeros(X.shape[1]), lam)
    keep = s > rank_tol * s[0]
    R = U[:, keep] * s[keep]
    reduced = fit_l2_svm(R, y, lam)
    coef = Vt[keep].T @ reduced.coefficients
    return L2FitResult(reduced.intercept, coef, lam)


def default_lambda_grid(n: int, p: int, size: int = 20):
    """Log-spaced grid for initial-estimator CV, scaled by the n/p ratio."""
    scale = max(n / max(p, 1), 1e-2)
    return np.geomspace(1e-4 * scale, 1e4 * scale, size)
