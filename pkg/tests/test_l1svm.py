"""Lasso-hinge SVM tests: exact zeros and LP-oracle agreement."""

import numpy as np
import pytest

from structsvm.l1svm import ZERO_TOL, compile_l1_lp, fit_l1_svm
from structsvm.lp import check_feasible, solve_lp

from oracles import enumerate_lp_optimum


def _toy_data(seed=0, n=20, p=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    w = np.array([2.0, 0.0, -1.0])[:p]
    y = np.where(X @ w + 0.2 * rng.normal(size=n) > 0, 1.0, -1.0)
    return X, y


def _objective(fit, X, y, lam):
    margins = 1.0 - y * (X @ fit.coefficients + fit.intercept)
    return np.maximum(margins, 0.0).sum() + lam * np.abs(fit.coefficients).sum()


def test_separable_lambda_zero():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    fit = fit_l1_svm(X, y, 0.0)
    assert _objective(fit, X, y, 0.0) == pytest.approx(0.0, abs=1e-9)
    assert np.all(y * (X[:, 0] * fit.coefficients[0] + fit.intercept) >= 1 - 1e-9)


def test_large_lambda_intercept_only():
    X, y = _toy_data(seed=1, n=30)
    fit = fit_l1_svm(X, y, 1e6)
    np.testing.assert_array_equal(fit.coefficients, 0.0)
    assert fit.active_set.size == 0
    # best intercept-only hinge: 2 * minority count at b0 = sign(majority)
    n_min = min(np.sum(y > 0), np.sum(y < 0))
    assert _objective(fit, X, y, 0.0) == pytest.approx(2.0 * n_min, abs=1e-8)


def test_matches_lp_vertex_oracle():
    # small enough that the compiled LP itself can be vertex-enumerated
    rng = np.random.default_rng(12)
    X = rng.normal(size=(5, 2))
    y = np.array([1.0, -1.0, 1.0, 1.0, -1.0])
    lam = 0.8
    fit = fit_l1_svm(X, y, lam)
    ref, _ = enumerate_lp_optimum(compile_l1_lp(X, y, lam))
    assert ref is not None
    assert _objective(fit, X, y, lam) == pytest.approx(ref, abs=1e-8)


def test_compiled_lp_solution_feasible():
    X, y = _toy_data(seed=3)
    lp = compile_l1_lp(X, y, 0.5)
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert check_feasible(lp, sol.values, tol=1e-7)


def test_exact_zeros():
    X, y = _toy_data(seed=4, n=50)
    for lam in (0.5, 2.0, 8.0):
        fit = fit_l1_svm(X, y, lam)
        small = np.abs(fit.coefficients) <= ZERO_TOL
        assert np.all(fit.coefficients[small] == 0.0)


def test_l1_norm_monotone_in_lambda():
    X, y = _toy_data(seed=5, n=40)
    norms = [np.abs(fit_l1_svm(X, y, lam).coefficients).sum()
             for lam in np.geomspace(1e-2, 1e2, 9)]
    assert np.all(np.diff(norms) <= 1e-7 * (1.0 + np.array(norms[:-1])))


def test_label_flip_symmetry():
    X, y = _toy_data(seed=6)
    a = fit_l1_svm(X, y, 1.0)
    b = fit_l1_svm(X, -y, 1.0)
    assert _objective(a, X, y, 1.0) == pytest.approx(_objective(b, X, -y, 1.0), abs=1e-8)


def test_negative_lambda_rejected():
    X, y = _toy_data()
    with pytest.raises(ValueError):
        fit_l1_svm(X, y, -1.0)
