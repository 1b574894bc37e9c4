"""Dense two-phase revised simplex kernel.

The pivot loop is the hot path of the whole package (every l1 SVM and every
garrote/heredity fit is one LP solve, and the benchmark harness runs
thousands of them), so it is compiled with numba when available. Set
STRUCTSVM_NO_NUMBA=1 to force the pure-numpy fallback; both paths run the
same source function. `benchmarks/bench_lp.py` compares the two.
"""

import os

import numpy as np

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_UNBOUNDED = 2
STATUS_MAX_PIVOTS = 3

# pivots without objective improvement before switching the entering rule
# from Dantzig (fast in practice) to Bland (termination guarantee); Bland
# stays on until the objective strictly improves again
_BLAND_TRIGGER = 30
_REFACTOR_EVERY = 64
# refactorize during long stalled stretches so drift cannot sustain a cycle
_STALL_REFACTOR = 2000


def _solve_standard_form_py(A, b, c, feas_tol, max_pivots):
    """Solve min c@x s.t. A@x = b, x >= 0 with b >= 0 elementwise.

    Returns (status, x, y, niter) where y are the duals of the equality
    rows taken from the final basis (y = c_B @ Binv).
    """
    m, n = A.shape
    ncols = n + m

    Aext = np.empty((m, ncols))
    Aext[:, :n] = A
    Aext[:, n:] = 0.0
    for i in range(m):
        Aext[i, n + i] = 1.0

    basis = np.empty(m, dtype=np.int64)
    in_basis = np.zeros(ncols, dtype=np.bool_)
    for i in range(m):
        basis[i] = n + i
        in_basis[n + i] = True

    Binv = np.eye(m)
    allow = np.ones(ncols, dtype=np.bool_)

    cphase = np.zeros(ncols)
    cphase[n:] = 1.0

    bmax = 0.0
    for i in range(m):
        if abs(b[i]) > bmax:
            bmax = abs(b[i])
    infeas_tol = max(10.0 * feas_tol, 1e-8 * (1.0 + bmax))

    phase = 1
    it = 0
    stall = 0
    best_obj = np.inf
    unbounded_retries = 0
    opt_retries = 0
    tol_boost = 1.0
    status = STATUS_MAX_PIVOTS

    while it < max_pivots:
        it += 1

        if it % _REFACTOR_EVERY == 0 or (stall > 0 and stall % _STALL_REFACTOR == 0):
            B = np.empty((m, m))
            for k in range(m):
                for i in range(m):
                    B[i, k] = Aext[i, basis[k]]
            # pinv instead of inv: never raises if drift has made the basis
            # numerically singular, and coincides with inv otherwise
            Binv = np.ascontiguousarray(np.linalg.pinv(B))

        cB = np.empty(m)
        for i in range(m):
            cB[i] = cphase[basis[i]]
        y = cB @ Binv
        r = cphase - y @ Aext

        xB = Binv @ b
        obj = 0.0
        for i in range(m):
            obj += cB[i] * xB[i]
        if obj < best_obj - 1e-10 * (1.0 + abs(obj)):
            best_obj = obj
            stall = 0
        else:
            stall += 1

        # phase 1 only needs the artificial sum at zero, not reduced-cost
        # optimality; waiting for the latter can spin forever on a
        # degenerate vertex whose reduced costs never settle
        phase1_done = phase == 1 and obj <= 1e-9 * (1.0 + bmax)

        cmax = 0.0
        for j in range(ncols):
            if abs(cphase[j]) > cmax:
                cmax = abs(cphase[j])
        enter_tol = tol_boost * 1e-9 * (1.0 + cmax)

        entering = -1
        if stall >= _BLAND_TRIGGER:
            for j in range(ncols):
                if allow[j] and not in_basis[j] and r[j] < -enter_tol:
                    entering = j
                    break
        else:
            best = -enter_tol
            for j in range(ncols):
                if allow[j] and not in_basis[j] and r[j] < best:
                    best = r[j]
                    entering = j

        if entering < 0 or phase1_done:
            # no candidate under the current Binv; refactorize and recheck
            # once before trusting the reduced costs (drift can hide a
            # negative one, which would end phase 1 as a false infeasible)
            if opt_retries == 0 and not phase1_done:
                B = np.empty((m, m))
                for k in range(m):
                    for i in range(m):
                        B[i, k] = Aext[i, basis[k]]
                Binv = np.ascontiguousarray(np.linalg.pinv(B))
                opt_retries = 1
                tol_boost = 1.0
                continue
            # current phase is optimal
            if phase == 1:
                p1obj = 0.0
                for i in range(m):
                    if basis[i] >= n:
                        p1obj += xB[i]
                if p1obj > infeas_tol:
                    status = STATUS_INFEASIBLE
                    break
                # pivot zero-level artificials out where a nonzero original
                # entry exists; rows without one are redundant and keep the
                # artificial basic at level zero (it can never re-enter)
                for i in range(m):
                    if basis[i] < n:
                        continue
                    repl = -1
                    for j in range(n):
                        if in_basis[j]:
                            continue
                        dij = 0.0
                        for k in range(m):
                            dij += Binv[i, k] * Aext[k, j]
                        if abs(dij) > 1e-7:
                            repl = j
                            break
                    if repl >= 0:
                        d = Binv @ np.ascontiguousarray(Aext[:, repl])
                        piv = d[i]
                        for k in range(m):
                            Binv[i, k] /= piv
                        for rr in range(m):
                            if rr != i:
                                f = d[rr]
                                for k in range(m):
                                    Binv[rr, k] -= f * Binv[i, k]
                        in_basis[basis[i]] = False
                        in_basis[repl] = True
                        basis[i] = repl
                for j in range(n, ncols):
                    allow[j] = False
                cphase = np.zeros(ncols)
                for j in range(n):
                    cphase[j] = c[j]
                phase = 2
                stall = 0
                best_obj = np.inf
                opt_retries = 0
                continue
            status = STATUS_OPTIMAL
            break

        d = Binv @ np.ascontiguousarray(Aext[:, entering])

        # two-pass ratio test: find the minimal ratio, then pick the leaving
        # row among near-minimal ratios. Normally the row with the largest
        # pivot entry wins (a dust-sized pivot on a degenerate row makes the
        # next basis numerically singular); in Bland mode the smallest basis
        # index wins (anti-cycling)
        tmin = np.inf
        for i in range(m):
            if d[i] > 1e-9:
                num = xB[i]
                if num < 0.0:
                    num = 0.0
                ratio = num / d[i]
                if ratio < tmin:
                    tmin = ratio
        leave = -1
        if tmin < np.inf:
            thresh = tmin + 1e-9 * (1.0 + tmin)
            best_piv = 0.0
            for i in range(m):
                if d[i] > 1e-9:
                    num = xB[i]
                    if num < 0.0:
                        num = 0.0
                    if num / d[i] <= thresh:
                        if stall >= _BLAND_TRIGGER:
                            if leave < 0 or basis[i] < basis[leave]:
                                leave = i
                        elif d[i] > best_piv:
                            best_piv = d[i]
                            leave = i

        if leave < 0:
            # drift in Binv can fake a descent ray on a near-zero-cost
            # column (e.g. the two halves of a split free variable):
            # refactorize, raise the entering tolerance so dust-level
            # reduced costs no longer qualify, and re-evaluate once before
            # believing it
            if unbounded_retries == 0:
                B = np.empty((m, m))
                for k in range(m):
                    for i in range(m):
                        B[i, k] = Aext[i, basis[k]]
                Binv = np.ascontiguousarray(np.linalg.pinv(B))
                unbounded_retries = 1
                tol_boost = 1000.0
                continue
            status = STATUS_UNBOUNDED
            break
        # a pivot is happening: the recovery tolerances go back to normal
        unbounded_retries = 0
        opt_retries = 0
        tol_boost = 1.0

        piv = d[leave]
        for k in range(m):
            Binv[leave, k] /= piv
        for i in range(m):
            if i != leave:
                f = d[i]
                for k in range(m):
                    Binv[i, k] -= f * Binv[leave, k]

        in_basis[basis[leave]] = False
        in_basis[entering] = True
        basis[leave] = entering

    x = np.zeros(n)
    y = np.zeros(m)
    if status == STATUS_OPTIMAL or status == STATUS_UNBOUNDED:
        # refactorize once more so the reported vertex and duals are as
        # accurate as the final basis allows
        B = np.empty((m, m))
        for k in range(m):
            for i in range(m):
                B[i, k] = Aext[i, basis[k]]
        Binv = np.ascontiguousarray(np.linalg.pinv(B))
        xB = Binv @ b
        for i in range(m):
            if basis[i] < n:
                x[basis[i]] = xB[i]
        cB = np.empty(m)
        for i in range(m):
            cB[i] = cphase[basis[i]]
        y = cB @ Binv
    return status, x, y, it


def _numba_enabled():
    return os.environ.get("STRUCTSVM_NO_NUMBA", "0").lower() not in ("1", "true", "yes")


KERNEL_BACKEND = "numpy"
solve_standard_form = _solve_standard_form_py

if _numba_enabled():
    try:
        from numba import njit

        solve_standard_form = njit(cache=True)(_solve_standard_form_py)
        KERNEL_BACKEND = "numba"
    except ImportError:
        pass
