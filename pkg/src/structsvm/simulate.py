"""Simulation data generators, Bayes-error oracle and evaluation helpers.

Five generator presets are bundled: three parametric logistic models (true
model obeying strong heredity, weak heredity, and no heredity) and two
spline-based nonparametric models. Explanatory variables are multivariate
normal with AR(1) correlation rho^|r-j|; labels are Bernoulli draws from
the logistic class probability.
"""

from dataclasses import dataclass

import numpy as np

from .splines import build_fixed_basis, evaluate_tensor

# coefficient blocks of the two nonparametric presets (5 basis functions per
# main effect, 25 per tensor interaction), over the fixed generator basis
_EX4_F1 = np.array([2.1, -2.9, 0.3, 2.7, -0.1])
_EX4_F2 = np.array([-2.8, -1.2, 1.8, 1.7, -0.8])
_EX4_F12 = np.array([
    -2.4, -0.1, 0.6, 3, 2.8, -0.9, 0.3, 1, -0.9, -1.3, 0.9, 2.3, 1.9,
    0.8, -0.2, 1.2, 2.1, 1.0, -0.8, -1.7, -0.8, -1.2, 2.1, -2.8, 0.1,
])
_EX5_F1 = np.array([3.0, -2.5, 2.0, -1.5, 1.0])
_EX5_F2 = np.array([1.5, 2.0, -3.0, -2.5, -2.0])
_EX5_F15 = np.array([
    7.1, -9.8, 1.1, 9.0, -0.3, -8.1, -0.4, 2.0, 10, 9.4, -3.1, 1.0, 3.2,
    -3.1, -4.3, 3.1, 7.7, 6.2, 2.7, -0.7, 3.9, 6.8, 3.4, -2.5, -5.6,
])
_EX5_F23 = np.array([
    -2.6, -3.8, 7.0, -9.4, 0.5, -9.2, -4.0, 6.1, 5.6, -2.7, 5.5, 9.3,
    -5.4, 9.1, -2.8, 5.1, 3.9, 6.6, -0.6, 6.8, 0.8, 8, -3.6, -2.5, -6,
])

# generator-side spline basis: fixed knots so the truth does not depend on
# any sample (boundary +-3 with inputs clamped, one interior knot at 0)
_GEN_BASIS = build_fixed_basis(-3.0, 3.0, [0.0], degree=3)


@dataclass(frozen=True)
class LogisticModelSpec:
    name: str
    q: int
    rho: float
    linear_predictor: callable     # (n, q) -> (n,)


def _eta_example1(Z):
    return 2 * Z[:, 0] + 4 * Z[:, 2] + 3 * Z[:, 0] * Z[:, 2] + 1


def _eta_example2(Z):
    z1 = Z[:, 0]
    return (3.5 * z1 + 3 * z1 * Z[:, 1] + 2.5 * z1 * Z[:, 2]
            + 2 * z1 * Z[:, 3] + 1.5 * z1 * Z[:, 4] + z1 * Z[:, 5] + 1)


def _eta_example3(Z):
    return (3 * Z[:, 0] + 2.5 * Z[:, 1] + 2 * Z[:, 2] * Z[:, 3]
            + 1.5 * Z[:, 3] * Z[:, 4] + 1)


def _spline_eta(Z, mains, pairs, const):
    eta = np.full(Z.shape[0], const)
    for j, coef in mains:
        eta += _GEN_BASIS.evaluate(Z[:, j]) @ coef
    for (r, j), coef in pairs:
        eta += evaluate_tensor(_GEN_BASIS, _GEN_BASIS, Z[:, r], Z[:, j]) @ coef
    return eta


def _eta_example4(Z):
    return _spline_eta(Z, [(0, _EX4_F1), (1, _EX4_F2)], [((0, 1), _EX4_F12)], 1.0)


def _eta_example5(Z):
    return _spline_eta(Z, [(0, _EX5_F1), (1, _EX5_F2)],
                       [((0, 4), _EX5_F15), ((1, 2), _EX5_F23)], -1.0)


_ETAS = {
    "example1": (7, _eta_example1),
    "example2": (7, _eta_example2),
    "example3": (5, _eta_example3),
    "example4": (5, _eta_example4),
    "example5": (5, _eta_example5),
}

NONPARAMETRIC_EXAMPLES = ("example4", "example5")


def example_spec(name: str, rho: float = None) -> LogisticModelSpec:
    if name not in _ETAS:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(_ETAS)}")
    if rho is None:
        rho = 0.5 if name in NONPARAMETRIC_EXAMPLES else 0.0
    q, eta = _ETAS[name]
    return LogisticModelSpec(name, q, float(rho), eta)


def ar1_covariance(q: int, rho: float):
    idx = np.arange(q)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def generate_example(spec: LogisticModelSpec, n: int, rng):
    """n iid samples (Z, y) with y in {+1, -1} from the logistic model."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    cov = ar1_covariance(spec.q, spec.rho)
    L = np.linalg.cholesky(cov)
    Z = rng.standard_normal((n, spec.q)) @ L.T
    p = 1.0 / (1.0 + np.exp(-spec.linear_predictor(Z)))
    y = np.where(rng.random(n) < p, 1.0, -1.0)
    return Z, y


def bayes_error(spec: LogisticModelSpec, mc_samples: int, seed) -> float:
    """Monte-Carlo E[min(p, 1-p)], the error of predicting the likelier class."""
    rng = np.random.default_rng(seed)
    cov = ar1_covariance(spec.q, spec.rho)
    L = np.linalg.cholesky(cov)
    total, left = 0.0, int(mc_samples)
    while left > 0:
        chunk = min(left, 200_000)
        Z = rng.standard_normal((chunk, spec.q)) @ L.T
        p = 1.0 / (1.0 + np.exp(-spec.linear_predictor(Z)))
        total += np.minimum(p, 1.0 - p).sum()
        left -= chunk
    return total / mc_samples


def generalization_error(decisions, y) -> float:
    """Fraction misclassified, with an exact-zero decision counted as +1."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("empty test set")
    pred = np.where(np.asarray(decisions, dtype=float) >= 0.0, 1.0, -1.0)
    return float(np.mean(pred != y))


def obeys_heredity(active: set, parents: dict, policy: str) -> bool:
    """Does an active-effect set satisfy the policy's predicate? Strong:
    every active effect's parents are all active; weak: at least one is."""
    for e in active:
        ps = parents.get(e, frozenset())
        if not ps:
            continue
        if policy == "strong" and not ps.issubset(active):
            return False
        if policy == "weak" and not (ps & active):
            return False
    return True


def active_effects_from_columns(coefficients, column_map, tol: float = 1e-8):
    coefficients = np.asarray(coefficients, dtype=float)
    return {
        e for e, (start, stop) in column_map.items()
        if np.max(np.abs(coefficients[start:stop]), initial=0.0) > tol
    }


def heredity_frequency(active_sets, graph, policy: str) -> float:
    """Fraction of fits whose active set satisfies the policy predicate."""
    if not active_sets:
        return 0.0
    hits = sum(obeys_heredity(set(a), graph.parents, policy) for a in active_sets)
    return hits / len(active_sets)
