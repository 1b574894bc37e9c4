"""Garrote-scaled SVMs with heredity constraints, compiled to LPs.

Each effect keeps its initial coefficients fixed and receives a single
nonnegative scaling parameter theta. Sparsity comes from penalizing the sum
of the thetas (Lagrangian form) or bounding it (big-M constraint form);
heredity comes from extra linear rows tying each child's theta to its
parents' (strong: theta_child <= theta_parent for every parent; weak:
theta_child <= sum of parent thetas, the convex relaxation of "at least one
parent active"). The returned model satisfies its heredity policy by
construction of the feasible region.
"""

from dataclasses import dataclass, field

import numpy as np

from .expand import HeredityGraph
from .lp import GE, LE, LinearProgram, SolverOptions, solve_lp

ZERO_TOL = 1e-8
COMPLIANCE_TOL = 1e-8

# running tally over every structured fit in the process; the test suite
# asserts the violation count stays at zero
COMPLIANCE_STATS = {"checked": 0, "violations": 0}


class EmptyInitial(ValueError):
    """Every effect's initial coefficient is zero (or heredity pruning left
    nothing); garrote scaling cannot resurrect a dead effect."""


@dataclass
class StructuredFitSpec:
    initial_coefficients: np.ndarray   # per design column
    graph: HeredityGraph               # carries the heredity policy
    column_map: dict                   # effect_id -> (start, stop) design columns
    penalty_form: str = "lagrangian"   # "lagrangian" (lambda) | "constraint" (big M)
    value: float = 1.0                 # lambda or M

    def __post_init__(self):
        if self.penalty_form not in ("lagrangian", "constraint"):
            raise ValueError(f"unknown penalty form {self.penalty_form!r}")
        if self.value < 0:
            raise ValueError("tuning value must be nonnegative")


@dataclass(frozen=True)
class StructuredFitResult:
    intercept: float
    theta: dict                          # effect_id -> scaling parameter
    effective_coefficients: np.ndarray   # per design column, initial * theta
    policy: str = "none"

    @property
    def active_effects(self):
        return sorted(e for e, t in self.theta.items() if t > ZERO_TOL)


def _kept_effects(spec):
    """Effects that stay in the LP: zero-initial effects are fixed at
    theta = 0 and pruning propagates through the heredity constraints."""
    beta = np.asarray(spec.initial_coefficients, dtype=float)
    kept = set()
    for e, (start, stop) in spec.column_map.items():
        if np.max(np.abs(beta[start:stop]), initial=0.0) > 1e-12:
            kept.add(e)
    policy = spec.graph.policy
    if policy in ("strong", "weak"):
        changed = True
        while changed:
            changed = False
            for e in sorted(kept):
                ps = spec.graph.parents.get(e, frozenset())
                if not ps:
                    continue
                alive = [p for p in ps if p in kept]
                dead = (policy == "strong" and len(alive) < len(ps)) or (
                    policy == "weak" and not alive
                )
                if dead:
                    kept.discard(e)
                    changed = True
    return sorted(kept)


def compile_structured_lp(X, y, spec: StructuredFitSpec) -> LinearProgram:
    lp, _ = _compile(X, y, spec)
    return lp


def _compile(X, y, spec):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    beta = np.asarray(spec.initial_coefficients, dtype=float)
    kept = _kept_effects(spec)
    if not kept:
        raise EmptyInitial("no effect survives the initial estimator")
    col_of = {e: i for i, e in enumerate(kept)}
    k = len(kept)

    # per-effect scaled score column: D[:, e] = X[:, cols_e] @ beta[cols_e]
    D = np.empty((n, k))
    for e in kept:
        start, stop = spec.column_map[e]
        D[:, col_of[e]] = X[:, start:stop] @ beta[start:stop]

    # variables: [theta (k), b0+, b0-, xi (n)]
    nv = k + 2 + n
    rows, rels, rhs = [], [], []

    hinge = np.zeros((n, nv))
    hinge[:, :k] = y[:, None] * D
    hinge[:, k] = y
    hinge[:, k + 1] = -y
    hinge[:, k + 2 :] = np.eye(n)
    rows.append(hinge)
    rels.extend([GE] * n)
    rhs.extend([1.0] * n)

    policy = spec.graph.policy
    if policy in ("strong", "weak"):
        hrows = []
        for e in kept:
            ps = sorted(p for p in spec.graph.parents.get(e, frozenset()) if p in col_of)
            if not ps:
                continue
            if policy == "strong":
                for p in ps:
                    row = np.zeros(nv)
                    row[col_of[e]] = 1.0
                    row[col_of[p]] = -1.0
                    hrows.append(row)
            else:
                row = np.zeros(nv)
                row[col_of[e]] = 1.0
                for p in ps:
                    row[col_of[p]] -= 1.0
                hrows.append(row)
        if hrows:
            rows.append(np.array(hrows))
            rels.extend([LE] * len(hrows))
            rhs.extend([0.0] * len(hrows))

    c = np.zeros(nv)
    c[k + 2 :] = 1.0
    if spec.penalty_form == "lagrangian":
        c[:k] = spec.value
    else:
        budget = np.zeros((1, nv))
        budget[0, :k] = 1.0
        rows.append(budget)
        rels.append(LE)
        rhs.append(spec.value)

    lp = LinearProgram(
        objective=c,
        rows=np.vstack(rows),
        relations=np.array(rels, dtype=int),
        rhs=np.array(rhs, dtype=float),
        nonneg=np.ones(nv, dtype=bool),
    )
    return lp, (kept, col_of, beta)


def heredity_violations(theta: dict, graph: HeredityGraph, tol: float = COMPLIANCE_TOL):
    """Effect ids whose scaling parameters break the graph's policy."""
    bad = []
    for e, ps in graph.parents.items():
        if not ps or theta.get(e, 0.0) <= tol:
            continue
        pvals = [theta.get(p, 0.0) for p in ps]
        if graph.policy == "strong" and min(pvals) < theta[e] - tol:
            bad.append(e)
        elif graph.policy == "weak" and sum(pvals) < theta[e] - tol:
            bad.append(e)
    return bad


def fit_structured(X, y, spec: StructuredFitSpec,
                   options: SolverOptions = SolverOptions()) -> StructuredFitResult:
    lp, (kept, col_of, beta) = _compile(X, y, spec)
    sol = solve_lp(lp, options)
    if sol.status != "optimal":
        raise RuntimeError(f"structured SVM LP ended with status {sol.status}")
    k = len(kept)
    v = sol.values
    theta = {e: 0.0 for e in spec.graph.parents}
    for e in kept:
        theta[e] = max(float(v[col_of[e]]), 0.0)
    b0 = float(v[k] - v[k + 1])

    # snap float dust off the heredity constraints so the compliance
    # invariant holds exactly, not just to solver feasibility tolerance
    # (parents are main effects, so one pass over the children suffices)
    policy = spec.graph.policy
    if policy in ("strong", "weak"):
        for e in kept:
            ps = [p for p in spec.graph.parents.get(e, frozenset()) if p in col_of]
            if not ps:
                continue
            cap = (min(theta[p] for p in ps) if policy == "strong"
                   else sum(theta[p] for p in ps))
            if theta[e] > cap:
                theta[e] = cap

    effective = np.zeros_like(np.asarray(beta, dtype=float))
    for e in kept:
        start, stop = spec.column_map[e]
        effective[start:stop] = beta[start:stop] * theta[e]

    COMPLIANCE_STATS["checked"] += 1
    if heredity_violations(theta, spec.graph):
        COMPLIANCE_STATS["violations"] += 1
    return StructuredFitResult(b0, theta, effective, spec.graph.policy)


def fit_nonparametric_structured(effect_scores, y, graph: HeredityGraph,
                                 penalty_form: str, value: float,
                                 options: SolverOptions = SolverOptions()) -> StructuredFitResult:
    """Structured fit where each effect is a single precomputed score column
    (the initial estimate of its effect function evaluated at the samples)."""
    scores = np.atleast_2d(np.asarray(effect_scores, dtype=float))
    p = scores.shape[1]
    spec = StructuredFitSpec(
        initial_coefficients=np.ones(p),
        graph=graph,
        column_map={e: (i, i + 1) for i, e in enumerate(sorted(graph.parents))},
        penalty_form=penalty_form,
        value=value,
    )
    return fit_structured(scores, y, spec, options)


def decision_values(result, X):
    if hasattr(result, "decision"):
        return result.decision(X)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    coef = (result.effective_coefficients
            if isinstance(result, StructuredFitResult) else result.coefficients)
    return X @ coef + result.intercept


def predict(result, X):
    """Elementwise sign of the decision value; an exact zero maps to +1."""
    return np.where(decision_values(result, X) >= 0.0, 1.0, -1.0)


def hinge_objective(result, X, y, lam: float = 0.0):
    margins = 1.0 - np.asarray(y, dtype=float) * decision_values(result, X)
    obj = float(np.maximum(margins, 0.0).sum())
    if lam and isinstance(result, StructuredFitResult):
        obj += lam * sum(result.theta.values())
    return obj
