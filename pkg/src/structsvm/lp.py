"""Standard-form linear programs and a deterministic dense simplex solver.

Every structured-SVM formulation in this package is compiled down to a
`LinearProgram` and handed to `solve_lp`. Constraint relations are coded as
-1 (<=), 0 (=), +1 (>=). Variables flagged in `nonneg` are restricted to be
nonnegative; the rest are free and get split into differences of
nonnegative variables before the simplex kernel runs.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    STATUS_INFEASIBLE,
    STATUS_MAX_PIVOTS,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    solve_standard_form,
)

LE, EQ, GE = -1, 0, 1


class MalformedProgram(ValueError):
    """The LinearProgram violates its own invariants."""


class MaxPivotsExceeded(RuntimeError):
    """The simplex kernel hit the pivot budget without terminating."""


@dataclass(frozen=True)
class SolverOptions:
    feas_tol: float = 1e-9
    max_pivots: int = 100_000


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray        # (num_vars,)
    rows: np.ndarray             # (num_constraints, num_vars)
    relations: np.ndarray        # (num_constraints,) values in {LE, EQ, GE}
    rhs: np.ndarray              # (num_constraints,)
    nonneg: np.ndarray           # (num_vars,) bool; False = free variable

    @property
    def num_vars(self):
        return self.objective.shape[0]

    def validate(self):
        c = np.asarray(self.objective, dtype=float)
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        rel = np.asarray(self.relations)
        rhs = np.asarray(self.rhs, dtype=float)
        nonneg = np.asarray(self.nonneg, dtype=bool)
        n = c.shape[0]
        if rows.shape[1] != n:
            raise MalformedProgram(
                f"constraint rows have {rows.shape[1]} coefficients, expected {n}"
            )
        if rel.shape[0] != rows.shape[0] or rhs.shape[0] != rows.shape[0]:
            raise MalformedProgram("relations/rhs length does not match row count")
        if nonneg.shape[0] != n:
            raise MalformedProgram("nonneg mask length does not match num_vars")
        if not np.all(np.isin(rel, (LE, EQ, GE))):
            raise MalformedProgram("relations must be -1 (<=), 0 (=) or +1 (>=)")
        for name, arr in (("objective", c), ("rows", rows), ("rhs", rhs)):
            if not np.all(np.isfinite(arr)):
                raise MalformedProgram(f"non-finite entry in {name}")


@dataclass(frozen=True)
class LpSolution:
    status: str                  # "optimal" | "infeasible" | "unbounded"
    values: np.ndarray
    objective_value: float
    duality_gap_bound: float
    row_duals: np.ndarray = field(default=None, repr=False)


def solve_lp(lp: LinearProgram, options: SolverOptions = SolverOptions()) -> LpSolution:
    """Solve the LP with a two-phase revised simplex (deterministic pivoting).

    Highly degenerate programs can stall the simplex or leave it on a
    numerically singular basis; the returned vertex is therefore verified
    against the original constraints, and on failure the solve is retried
    once with a deterministic tiny rhs perturbation (which removes the
    degeneracy) before giving up.
    """
    lp.validate()
    rhs = np.asarray(lp.rhs, dtype=float)
    feas_check = 1e-6 * (1.0 + float(np.max(np.abs(rhs), initial=0.0)))
    try:
        sol = _solve_core(lp, options, jitter=False)
        if sol.status != "optimal" or check_feasible(lp, sol.values, feas_check):
            return sol
    except MaxPivotsExceeded:
        pass
    return _solve_core(lp, options, jitter=True)


def _solve_core(lp: LinearProgram, options: SolverOptions, jitter: bool) -> LpSolution:
    c = np.asarray(lp.objective, dtype=float)
    rows = np.atleast_2d(np.asarray(lp.rows, dtype=float))
    rel = np.asarray(lp.relations, dtype=int).copy()
    rhs = np.asarray(lp.rhs, dtype=float).copy()
    nonneg = np.asarray(lp.nonneg, dtype=bool)
    m, n = rows.shape

    if jitter:
        # fixed pseudo-random relative perturbation; breaks the massive
        # ratio-test ties of a degenerate vertex while moving every
        # constraint by at most ~1.5e-9 relative
        u = np.random.default_rng(0x5EED).uniform(0.5, 1.5, size=m)
        rhs = rhs + 1e-9 * (1.0 + np.abs(rhs)) * u

    # column equilibration: badly scaled columns (e.g. tiny effect scores
    # next to unit slack entries) force tiny pivots and numerically singular
    # bases; solving in x' = s * x with unit-max columns avoids that
    col_scale = np.max(np.abs(rows), axis=0)
    col_scale[col_scale < 1e-12] = 1.0
    rows = rows / col_scale
    c = c / col_scale

    # split free variables x = u - v
    free = np.flatnonzero(~nonneg)
    n_std = n + free.size
    A = np.zeros((m, n_std))
    A[:, :n] = rows
    A[:, n:] = -rows[:, free]
    c_std = np.zeros(n_std)
    c_std[:n] = c
    c_std[n:] = -c[free]

    # slack/surplus columns for inequality rows
    ineq = np.flatnonzero(rel != EQ)
    n_full = n_std + ineq.size
    A_full = np.zeros((m, n_full))
    A_full[:, :n_std] = A
    for k, i in enumerate(ineq):
        A_full[i, n_std + k] = 1.0 if rel[i] == LE else -1.0
    c_full = np.zeros(n_full)
    c_full[:n_std] = c_std

    # kernel wants b >= 0
    flip = rhs < 0.0
    A_full[flip] *= -1.0
    b = np.where(flip, -rhs, rhs)

    status_code, x_full, y, _ = solve_standard_form(
        np.ascontiguousarray(A_full), np.ascontiguousarray(b),
        np.ascontiguousarray(c_full), options.feas_tol, options.max_pivots,
    )

    if status_code == STATUS_MAX_PIVOTS:
        raise MaxPivotsExceeded(f"pivot budget {options.max_pivots} exhausted")
    if status_code == STATUS_INFEASIBLE:
        return LpSolution("infeasible", np.full(n, np.nan), np.nan, np.inf)
    if status_code == STATUS_UNBOUNDED:
        return LpSolution("unbounded", np.full(n, np.nan), -np.inf, np.inf)

    values = x_full[:n].copy()
    values[free] -= x_full[n : n + free.size]
    values /= col_scale
    objective_value = float(np.asarray(lp.objective, dtype=float) @ values)

    duals = np.where(flip, -y, y)
    dual_objective = float(duals @ rhs)
    gap = abs(objective_value - dual_objective)
    return LpSolution("optimal", values, objective_value, gap, duals)


def check_feasible(lp: LinearProgram, values, tol: float) -> bool:
    """True iff `values` satisfies every constraint and sign restriction within tol."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != lp.num_vars:
        raise ValueError(
            f"expected {lp.num_vars} values, got {values.shape[0]}"
        )
    rows = np.atleast_2d(np.asarray(lp.rows, dtype=float))
    lhs = rows @ values
    rel = np.asarray(lp.relations, dtype=int)
    rhs = np.asarray(lp.rhs, dtype=float)
    ok = True
    ok &= bool(np.all(lhs[rel == LE] <= rhs[rel == LE] + tol))
    ok &= bool(np.all(lhs[rel == GE] >= rhs[rel == GE] - tol))
    ok &= bool(np.all(np.abs(lhs[rel == EQ] - rhs[rel == EQ]) <= tol))
    nonneg = np.asarray(lp.nonneg, dtype=bool)
    ok &= bool(np.all(values[nonneg] >= -tol))
    return ok
