"""B-spline bases, tensor products and the nonparametric initial estimator.

Each raw variable gets a clamped (open-uniform) cubic B-spline basis with
interior knots at training quantiles; interaction surfaces use the tensor
product of the two marginal bases. The initial fit is a ridge-penalized
hinge fit on the full basis design, done in n dimensions via the SVD
reduction, and the per-effect score columns feed the structured LP.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .expand import HeredityGraph
from .l2svm import L2FitResult, fit_l2_svm_svd_reduced


@dataclass(frozen=True)
class SplineBasis:
    var_index: int
    degree: int
    knots: np.ndarray       # full clamped knot vector
    lo: float
    hi: float

    @property
    def num_functions(self):
        return self.knots.size - self.degree - 1

    def evaluate(self, x):
        """(n, N) design matrix; inputs are clamped to [lo, hi]."""
        x = np.clip(np.asarray(x, dtype=float).ravel(), self.lo, self.hi)
        return BSpline.design_matrix(x, self.knots, self.degree).toarray()


def build_basis(values, num_functions: int = 5, degree: int = 3,
                var_index: int = 0) -> SplineBasis:
    """Clamped basis with interior knots at equally spaced quantiles of the
    training values; num_functions = interior knots + degree + 1."""
    if num_functions < degree + 1:
        raise ValueError("num_functions must be at least degree + 1")
    values = np.asarray(values, dtype=float).ravel()
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        raise ValueError("cannot build a spline basis on a constant column")
    n_interior = num_functions - degree - 1
    qs = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    interior = np.quantile(values, qs) if n_interior else np.empty(0)
    knots = np.concatenate([
        np.full(degree + 1, lo), interior, np.full(degree + 1, hi)
    ])
    return SplineBasis(var_index, degree, knots, lo, hi)


def build_fixed_basis(lo, hi, interior, degree: int = 3, var_index: int = 0) -> SplineBasis:
    """Basis on explicitly given boundary and interior knots (used by the
    simulation generators, whose bases must not depend on any sample)."""
    knots = np.concatenate([
        np.full(degree + 1, float(lo)), np.asarray(interior, dtype=float),
        np.full(degree + 1, float(hi)),
    ])
    return SplineBasis(var_index, degree, knots, float(lo), float(hi))


def evaluate_tensor(basis_r: SplineBasis, basis_j: SplineBasis, z_r, z_j):
    """(n, N_r * N_j) outer products of the two marginal evaluations."""
    Br = basis_r.evaluate(z_r)
    Bj = basis_j.evaluate(z_j)
    return (Br[:, :, None] * Bj[:, None, :]).reshape(Br.shape[0], -1)


def _pairs(q):
    return [(r, j) for r in range(q) for j in range(r + 1, q)]


def nonparametric_graph(q: int, policy: str = "none") -> HeredityGraph:
    """Effect ids: 0..q-1 the main effect functions, then one id per
    unordered pair (r, j) with the two mains as parents."""
    parents = {j: frozenset() for j in range(q)}
    for k, (r, j) in enumerate(_pairs(q)):
        parents[q + k] = frozenset((r, j))
    return HeredityGraph(parents, policy)


@dataclass
class NonparametricInitial:
    intercept: float
    bases: list                    # per raw variable
    main_coefs: list               # per variable, (N_j,) blocks
    pair_coefs: dict               # (r, j) -> (N_r * N_j,) blocks
    lam: float = field(default=0.0)

    @property
    def q(self):
        return len(self.bases)

    def main_score(self, j, z):
        return self.bases[j].evaluate(z) @ self.main_coefs[j]

    def pair_score(self, r, j, z_r, z_j):
        return evaluate_tensor(self.bases[r], self.bases[j], z_r, z_j) @ self.pair_coefs[(r, j)]

    def effect_scores(self, Z):
        """(n, q + q(q-1)/2) matrix of initial effect-function values, in the
        effect order of `nonparametric_graph`."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        cols = [self.main_score(j, Z[:, j]) for j in range(self.q)]
        cols += [self.pair_score(r, j, Z[:, r], Z[:, j]) for r, j in _pairs(self.q)]
        return np.column_stack(cols)


def basis_design(bases, Z):
    """Full design: main blocks for every variable then tensor blocks for
    every unordered pair, concatenated in order."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    q = len(bases)
    blocks = [bases[j].evaluate(Z[:, j]) for j in range(q)]
    blocks += [evaluate_tensor(bases[r], bases[j], Z[:, r], Z[:, j]) for r, j in _pairs(q)]
    return np.hstack(blocks)


def fit_initial_nonparametric(Z, y, lam: float, num_functions: int = 5,
                              degree: int = 3) -> NonparametricInitial:
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    q = Z.shape[1]
    bases = [build_basis(Z[:, j], num_functions, degree, var_index=j) for j in range(q)]
    B = basis_design(bases, Z)
    fit = fit_l2_svm_svd_reduced(B, y, lam)
    coefs = fit.coefficients
    main_coefs, pos = [], 0
    for j in range(q):
        nj = bases[j].num_functions
        main_coefs.append(coefs[pos : pos + nj])
        pos += nj
    pair_coefs = {}
    for r, j in _pairs(q):
        w = bases[r].num_functions * bases[j].num_functions
        pair_coefs[(r, j)] = coefs[pos : pos + w]
        pos += w
    return NonparametricInitial(fit.intercept, bases, main_coefs, pair_coefs, lam)
