"""Dense-tableau simplex for small bounded LPs.

    minimize    c @ x
    subject to  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  lb <= x <= ub

Bounded-variable form (nonbasic variables sit at either bound). Problems with
only inequality rows and a dual-feasible slack basis go through a dual simplex
with no phase I; everything else uses two-phase primal with Dantzig pricing,
lowest-index tie-breaks and a fallback to Bland's rule after a run of
degenerate pivots. Basic values are recomputed from the original system at the
end to shed accumulated pivot error.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    fun: float | None
    iterations: int


class _Tableau:
    def __init__(self, A, b, upper, basis):
        self.T = A.copy()
        self.beta = b.copy()          # values of basic variables
        self.upper = upper            # per-variable upper bound (lower is 0)
        self.basis = list(basis)
        self.at_upper = np.zeros(A.shape[1], dtype=bool)
        self.is_basic = np.zeros(A.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.iterations = 0

    def reduced_costs(self, c):
        return c - c[self.basis] @ self.T

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.nonzero(col)[0]
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        self.is_basic[self.basis[r]] = False
        self.basis[r] = j
        self.is_basic[j] = True

    def run(self, c, tol, max_iter, allowed):
        d = self.reduced_costs(c)
        degenerate_run = 0
        bland = False
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            cand = allowed & ~self.is_basic
            improving = cand & (((~self.at_upper) & (d < -tol)) | (self.at_upper & (d > tol)))
            idx = np.nonzero(improving)[0]
            if idx.size == 0:
                return OPTIMAL
            if bland:
                j = int(idx[0])
            else:
                j = int(idx[np.argmax(np.abs(d[idx]))])
            sign = -1.0 if self.at_upper[j] else 1.0
            alpha = self.T[:, j] * sign
            theta, r, to_upper = self._ratio(alpha, tol)
            flip = self.upper[j] <= theta
            if flip:
                theta = self.upper[j]
            if not np.isfinite(theta):
                return UNBOUNDED
            self.iterations += 1
            degenerate_run = degenerate_run + 1 if theta <= tol else 0
            bland = degenerate_run > 50
            self.beta -= theta * alpha
            if flip:
                self.at_upper[j] = not self.at_upper[j]
                continue
            leaving = self.basis[r]
            entering_value = self.upper[j] - theta if self.at_upper[j] else theta
            self.at_upper[leaving] = to_upper
            self.at_upper[j] = False
            self.pivot(r, j)
            self.beta[r] = entering_value
            d -= d[j] * self.T[r]
            d[j] = 0.0

    def run_dual(self, c, tol, max_iter):
        """Dual simplex from a dual-feasible basis; basics may violate bounds."""
        d = self.reduced_costs(c)
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            ub = self.upper[self.basis]
            below = -self.beta
            above = self.beta - ub
            infeas = np.maximum(below, above)
            r = int(np.argmax(infeas))
            if infeas[r] <= tol:
                return OPTIMAL
            to_upper = above[r] > below[r]
            row = self.T[r]
            nonbasic = ~self.is_basic
            lower_side = nonbasic & ~self.at_upper
            upper_side = nonbasic & self.at_upper
            if to_upper:
                cand = (lower_side & (row > tol)) | (upper_side & (row < -tol))
            else:
                cand = (lower_side & (row < -tol)) | (upper_side & (row > tol))
            idx = np.nonzero(cand)[0]
            if idx.size == 0:
                return INFEASIBLE
            ratios = np.abs(d[idx]) / np.abs(row[idx])
            j = int(idx[np.argmin(ratios)])
            bound = ub[r] if to_upper else 0.0
            delta = (self.beta[r] - bound) / row[j]
            current = self.upper[j] if self.at_upper[j] else 0.0
            self.iterations += 1
            self.beta -= delta * self.T[:, j]
            leaving = self.basis[r]
            self.at_upper[leaving] = to_upper
            self.at_upper[j] = False
            self.pivot(r, j)
            self.beta[r] = current + delta
            d -= d[j] * self.T[r]
            d[j] = 0.0

    def _ratio(self, alpha, tol):
        beta, ub = self.beta, self.upper[self.basis]
        ratios = np.full(alpha.shape, np.inf)
        dec = alpha > tol
        inc = alpha < -tol
        ratios[dec] = np.maximum(beta[dec], 0.0) / alpha[dec]
        with np.errstate(invalid="ignore"):
            ratios[inc] = np.maximum(ub[inc] - beta[inc], 0.0) / -alpha[inc]
        theta = ratios.min() if ratios.size else np.inf
        if not np.isfinite(theta):
            return np.inf, -1, False
        ties = np.nonzero(ratios <= theta + tol)[0]
        # lowest basic-variable index among ties
        r = int(min(ties, key=lambda row: self.basis[row]))
        return float(ratios[r]), r, bool(inc[r])


def solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None,
          tol: float = 1e-9, max_iter: int = 50_000) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    if not np.all(np.isfinite(lb)):
        raise ValueError("free variables are not supported; give finite lower bounds")
    if np.any(ub < lb):
        return SimplexResult(INFEASIBLE, None, None, 0)

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if m_eq == 0 and np.all((c >= 0) | np.isfinite(ub)):
        return _solve_dual(c, A_ub, b_ub, lb, ub, tol, max_iter)
    # shift x = lb + z
    rhs = np.concatenate([b_ub - A_ub @ lb, b_eq - A_eq @ lb])
    A = np.zeros((m, n + m_ub + m))
    A[:m_ub, :n] = A_ub
    A[m_ub:, :n] = A_eq
    A[np.arange(m_ub), n + np.arange(m_ub)] = 1.0
    neg = rhs < 0
    A[neg] *= -1.0
    rhs = np.abs(rhs)
    art0 = n + m_ub
    A[np.arange(m), art0 + np.arange(m)] = 1.0
    upper = np.concatenate([ub - lb, np.full(m_ub, np.inf), np.full(m, np.inf)])

    basis = []
    for r in range(m):
        if r < m_ub and not neg[r]:
            basis.append(n + r)
        else:
            basis.append(art0 + r)
    tab = _Tableau(A, rhs, upper, basis)
    allowed = np.ones(A.shape[1], dtype=bool)
    art_basic = np.array([b >= art0 for b in basis])
    # artificials that start nonbasic are never needed
    unused = art0 + np.nonzero(~art_basic)[0]
    allowed[unused] = False

    if art_basic.any():
        c1 = np.zeros(A.shape[1])
        c1[art0:] = 1.0
        status = tab.run(c1, tol, max_iter, allowed)
        if status != OPTIMAL:
            return SimplexResult(status, None, None, tab.iterations)
        infeas = sum(tab.beta[r] for r, b in enumerate(tab.basis) if b >= art0)
        if infeas > 1e-7 * max(1.0, np.abs(rhs).max(initial=0.0)):
            return SimplexResult(INFEASIBLE, None, None, tab.iterations)
    allowed[art0:] = False
    tab.upper[art0:] = 0.0

    c2 = np.zeros(A.shape[1])
    c2[:n] = c
    status = tab.run(c2, tol, max_iter, allowed)
    if status != OPTIMAL:
        return SimplexResult(status, None, None, tab.iterations)

    z = _refine(A, rhs, tab.upper, tab)
    x = lb + z[:n]
    return SimplexResult(OPTIMAL, x, float(c @ x), tab.iterations)


def _solve_dual(c, A_ub, b_ub, lb, ub, tol, max_iter) -> SimplexResult:
    # slack basis; each structural sits at the bound that makes it dual feasible
    m, n = A_ub.shape
    upper = np.concatenate([ub - lb, np.full(m, np.inf)])
    A = np.hstack([A_ub, np.eye(m)])
    tab = _Tableau(A, np.zeros(m), upper, range(n, n + m))
    tab.at_upper[:n] = c < 0
    z0 = np.where(tab.at_upper[:n], upper[:n], 0.0)
    tab.beta = b_ub - A_ub @ lb - A_ub @ z0
    c_full = np.concatenate([c, np.zeros(m)])
    status = tab.run_dual(c_full, tol, max_iter)
    if status != OPTIMAL:
        return SimplexResult(status, None, None, tab.iterations)
    z = _refine(A, b_ub - A_ub @ lb, upper, tab)
    x = lb + z[:n]
    return SimplexResult(OPTIMAL, x, float(c @ x), tab.iterations)


def _refine(A, rhs, upper, tab) -> np.ndarray:
    """Recompute basic values from the original system to shed pivot drift."""
    z = np.where(tab.at_upper, upper, 0.0)
    z[tab.basis] = 0.0
    try:
        z[tab.basis] = np.linalg.solve(A[:, tab.basis], rhs - A @ z)
    except np.linalg.LinAlgError:
        z[tab.basis] = tab.beta
    return z
