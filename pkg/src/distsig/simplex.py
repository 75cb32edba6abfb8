"""Dense two-phase primal simplex with Bland's rule.

Solves min c.x subject to A x = b, x >= 0.  Sized for the tiny exact
transport programs in this package (hundreds of variables, tens of rows);
Bland's anti-cycling rule keeps it deterministic and finite.
"""

from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-12


class InfeasibleError(RuntimeError):
    pass


class UnboundedError(RuntimeError):
    pass


def _run_phase(tab, basis, cost, tol, max_iter):
    """Optimize the tableau in place for the given cost vector.

    tab rows are the constraint rows [coeffs | rhs]; basis maps row -> basic
    column.  Returns the reduced-cost row at optimality.
    """
    m, width = tab.shape
    ncols = width - 1
    red = np.zeros(width)
    red[:ncols] = cost
    for i in range(m):
        if red[basis[i]] != 0.0:
            red -= red[basis[i]] * tab[i]
    for _ in range(max_iter):
        enter = -1
        for j in range(ncols):
            if red[j] < -tol:
                enter = j
                break
        if enter < 0:
            return red
        # ratio test, ties broken by smallest basic variable index (Bland)
        leave, best, best_var = -1, np.inf, None
        for i in range(m):
            a = tab[i, enter]
            if a > tol:
                r = tab[i, -1] / a
                if r < best - tol or (abs(r - best) <= tol and (best_var is None or basis[i] < best_var)):
                    leave, best, best_var = i, r, basis[i]
        if leave < 0:
            raise UnboundedError("unbounded objective")
        piv = tab[leave, enter]
        tab[leave] /= piv
        for i in range(m):
            if i != leave and tab[i, enter] != 0.0:
                tab[i] -= tab[i, enter] * tab[leave]
        red -= red[enter] * tab[leave]
        basis[leave] = enter
    raise RuntimeError("simplex iteration cap exceeded")


def solve_lp(c, a_eq, b_eq, *, tol: float = PIVOT_TOL, max_iter: int | None = None):
    """Return (x, value) minimizing c.x over {x >= 0 : A x = b}."""
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_eq, dtype=float).copy()
    b = np.asarray(b_eq, dtype=float).copy()
    m, n = a.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("LP dimension mismatch")
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0
    if max_iter is None:
        max_iter = 200 * (m + n + 10)

    # phase 1: artificial basis, drive the artificials to zero
    tab = np.hstack([a, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    red = _run_phase(tab, basis, cost1, tol, max_iter)
    phase1_val = -red[-1]
    if phase1_val > 1e-9:
        raise InfeasibleError(f"no feasible point (phase-1 value {phase1_val:.3e})")

    # kick residual artificials out of the basis; a row with no real pivot
    # is a redundant constraint and gets dropped
    keep = []
    for i in range(m):
        if basis[i] >= n:
            piv_col = -1
            for j in range(n):
                if abs(tab[i, j]) > tol:
                    piv_col = j
                    break
            if piv_col < 0:
                continue
            piv = tab[i, piv_col]
            tab[i] /= piv
            for r in range(m):
                if r != i and tab[r, piv_col] != 0.0:
                    tab[r] -= tab[r, piv_col] * tab[i]
            basis[i] = piv_col
        keep.append(i)
    tab = np.hstack([tab[keep][:, :n], tab[keep][:, -1:]])
    basis = [basis[i] for i in keep]

    _run_phase(tab, basis, c, tol, max_iter)
    x = np.zeros(n)
    for i, bi in enumerate(basis):
        x[bi] = tab[i, -1]
    # degenerate pivots can leave -1e-15 sized dust
    if np.min(x) < -1e-7:
        raise RuntimeError(f"negative component {np.min(x):.3e} in solution")
    x = np.maximum(x, 0.0)
    return x, float(c @ x)
