"""Lasso-penalized SVM baseline, compiled to a linear program.

min Σ_i [1 - y_i(x_i·β + β0)]_+ + λ‖β‖₁ via the usual splitting
β = β⁺ - β⁻, slack variables for the hinge and a split free intercept.
Solutions are simplex vertices, so inactive coefficients are exactly zero.
"""

from dataclasses import dataclass

import numpy as np

from .lp import GE, LinearProgram, SolverOptions, solve_lp

ZERO_TOL = 1e-8


@dataclass(frozen=True)
class L1FitResult:
    intercept: float
    coefficients: np.ndarray
    lam: float

    @property
    def active_set(self):
        return np.flatnonzero(np.abs(self.coefficients) > ZERO_TOL)


def compile_l1_lp(X, y, lam: float) -> LinearProgram:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    # variables: [beta+ (p), beta- (p), b0+ , b0-, xi (n)]
    nv = 2 * p + 2 + n
    c = np.zeros(nv)
    c[: 2 * p] = lam
    c[2 * p + 2 :] = 1.0
    rows = np.zeros((n, nv))
    rows[:, :p] = y[:, None] * X
    rows[:, p : 2 * p] = -y[:, None] * X
    rows[:, 2 * p] = y
    rows[:, 2 * p + 1] = -y
    rows[:, 2 * p + 2 :] = np.eye(n)
    return LinearProgram(
        objective=c,
        rows=rows,
        relations=np.full(n, GE),
        rhs=np.ones(n),
        nonneg=np.ones(nv, dtype=bool),
    )


def fit_l1_svm(X, y, lam: float, options: SolverOptions = SolverOptions()) -> L1FitResult:
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = X.shape[1]
    sol = solve_lp(compile_l1_lp(X, y, lam), options)
    if sol.status != "optimal":
        raise RuntimeError(f"l1 SVM LP ended with status {sol.status}")
    v = sol.values
    beta = v[:p] - v[p : 2 * p]
    b0 = v[2 * p] - v[2 * p + 1]
    return L1FitResult(float(b0), beta, lam)
