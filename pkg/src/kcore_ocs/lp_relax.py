"""Ordering LP relaxation over pairwise precedence variables.

Variables: completion values T_0..T_{M-1}, then one x[a, b] per ordered pair
a != b (x[a, b] = 1 means coflow a finishes before coflow b).

    min  sum_m w_m T_m
    s.t. x[a, b] + x[b, a] = 1                                     (pairing)
         T_m >= (rho_{m,p} + sum_{m'} rho_{m',p} x[m', m]) / R     (transmission)
         T_m >= delay/K * (tau_{m,p} + sum_{m'} tau_{m',p} x[m', m]) (reconfiguration, OCS)
         T_m >= a_m                                                 (release)
         0 <= x <= 1, T >= 0                                        (box)
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import simplex
from .bounds import port_stats
from .model import Instance, SwitchMode, require_valid

FEAS_TOL = 1e-7


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical-failure"


class LpError(RuntimeError):
    pass


@dataclass
class OrderingLp:
    num_coflows: int
    cost: np.ndarray
    A_ge: sp.csr_matrix          # rows: A_ge @ v >= b_ge
    b_ge: np.ndarray
    ge_kinds: list[str]          # "transmission" | "reconfiguration" | "release"
    ge_keys: list[tuple]         # (coflow, port) or (coflow,)
    A_eq: sp.csr_matrix          # pairing rows
    b_eq: np.ndarray
    eq_keys: list[tuple]
    lower: np.ndarray
    upper: np.ndarray

    @property
    def num_vars(self) -> int:
        return self.cost.size

    def x_index(self, a: int, b: int) -> int:
        return x_index(self.num_coflows, a, b)

    def constraint_counts(self) -> dict[str, int]:
        counts = {"pairing": self.A_eq.shape[0], "transmission": 0, "reconfiguration": 0,
                  "release": 0, "box": 2 * (self.num_vars - self.num_coflows)}
        for kind in self.ge_kinds:
            counts[kind] += 1
        return counts

    def max_violation(self, values: np.ndarray) -> float:
        """Largest absolute constraint violation of a full variable vector."""
        v = np.asarray(values, dtype=float)
        worst = 0.0
        if self.A_ge.shape[0]:
            worst = max(worst, float(np.max(self.b_ge - self.A_ge @ v, initial=0.0)))
        if self.A_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ v - self.b_eq))))
        worst = max(worst, float(np.max(self.lower - v, initial=0.0)))
        worst = max(worst, float(np.max(v - self.upper, initial=0.0)))
        return worst


def x_index(num_coflows: int, a: int, b: int) -> int:
    if a == b:
        raise ValueError("no ordering variable on the diagonal")
    return num_coflows + a * (num_coflows - 1) + (b if b < a else b - 1)


def build_lp(instance: Instance) -> OrderingLp:
    require_valid(instance)
    cfg = instance.config
    M, N = instance.num_coflows, cfg.num_ports
    nvar = M + M * (M - 1)
    stats = [port_stats(c.demand) for c in instance.coflows]
    rho = np.array([s.load for s in stats]).reshape(M, 2 * N)
    tau = np.array([s.count for s in stats], dtype=float).reshape(M, 2 * N)
    R, K = cfg.total_rate, cfg.num_cores
    with_reconfig = cfg.mode is SwitchMode.OCS

    rows, cols, vals = [], [], []
    b_ge, kinds, keys = [], [], []

    def add_capacity_rows(kind, per_port, scale):
        for m in range(M):
            others = [q for q in range(M) if q != m]
            xcols = [x_index(M, q, m) for q in others]
            for p in range(2 * N):
                r = len(b_ge)
                rows.append(r); cols.append(m); vals.append(1.0)
                for q, xc in zip(others, xcols):
                    coef = per_port[q, p] * scale
                    if coef:
                        rows.append(r); cols.append(xc); vals.append(-coef)
                b_ge.append(per_port[m, p] * scale)
                kinds.append(kind)
                keys.append((m, p))

    add_capacity_rows("transmission", rho, 1.0 / R)
    if with_reconfig:
        add_capacity_rows("reconfiguration", tau, cfg.reconfig_delay / K)
    for m, c in enumerate(instance.coflows):
        r = len(b_ge)
        rows.append(r); cols.append(m); vals.append(1.0)
        b_ge.append(c.release)
        kinds.append("release")
        keys.append((m,))

    A_ge = sp.csr_matrix((vals, (rows, cols)), shape=(len(b_ge), nvar))
    erows, ecols, eqkeys = [], [], []
    for a in range(M):
        for b in range(a + 1, M):
            r = len(eqkeys)
            erows += [r, r]
            ecols += [x_index(M, a, b), x_index(M, b, a)]
            eqkeys.append((a, b))
    A_eq = sp.csr_matrix((np.ones(len(erows)), (erows, ecols)), shape=(len(eqkeys), nvar))

    cost = np.zeros(nvar)
    cost[:M] = instance.weights
    lower = np.zeros(nvar)
    upper = np.full(nvar, np.inf)
    upper[M:] = 1.0
    return OrderingLp(M, cost, A_ge, np.array(b_ge, dtype=float), kinds, keys,
                      A_eq, np.ones(len(eqkeys)), eqkeys, lower, upper)


@dataclass
class LpSolution:
    completion_values: np.ndarray   # T~_m
    ordering_values: np.ndarray     # x~[a, b], diagonal 0
    objective: float
    status: LpStatus
    values: np.ndarray | None = None
    backend: str = ""


def _solve_highs(lp: OrderingLp):
    from scipy.optimize import linprog

    res = linprog(
        lp.cost,
        A_ub=-lp.A_ge if lp.A_ge.shape[0] else None,
        b_ub=-lp.b_ge if lp.A_ge.shape[0] else None,
        A_eq=lp.A_eq if lp.A_eq.shape[0] else None,
        b_eq=lp.b_eq if lp.A_eq.shape[0] else None,
        bounds=np.column_stack([lp.lower, lp.upper]),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9,
                 "presolve": True},
    )
    if res.status == 0:
        return LpStatus.OPTIMAL, np.asarray(res.x)
    if res.status == 2:
        return LpStatus.INFEASIBLE, None
    return LpStatus.NUMERICAL_FAILURE, None


def _pairing_substitution(lp: OrderingLp):
    """v = P @ y + q with y = (T, x[a, b] for a < b); x[b, a] = 1 - x[a, b]."""
    M = lp.num_coflows
    pairs = [(a, b) for a in range(M) for b in range(a + 1, M)]
    ny = M + len(pairs)
    P = sp.lil_matrix((lp.num_vars, ny))
    q = np.zeros(lp.num_vars)
    for m in range(M):
        P[m, m] = 1.0
    for col, (a, b) in enumerate(pairs, start=M):
        P[x_index(M, a, b), col] = 1.0
        P[x_index(M, b, a), col] = -1.0
        q[x_index(M, b, a)] = 1.0
    return P.tocsr(), q, ny


def _solve_simplex(lp: OrderingLp):
    P, q, ny = _pairing_substitution(lp)
    A = (lp.A_ge @ P).toarray()
    b = lp.b_ge - lp.A_ge @ q
    lower = np.zeros(ny)
    upper = np.ones(ny)
    upper[:lp.num_coflows] = np.inf
    res = simplex.solve(P.T @ lp.cost, A_ub=-A, b_ub=-b, lb=lower, ub=upper)
    if res.status == simplex.OPTIMAL:
        return LpStatus.OPTIMAL, P @ res.x + q
    if res.status == simplex.INFEASIBLE:
        return LpStatus.INFEASIBLE, None
    return LpStatus.NUMERICAL_FAILURE, None


BACKENDS = {"highs": _solve_highs, "simplex": _solve_simplex}


def solve_lp(lp: OrderingLp, backend: str = "highs") -> LpSolution:
    """Solve the ordering LP. ``backend`` is "highs" (scipy) or "simplex" (bundled)."""
    M = lp.num_coflows
    if M == 0:
        return LpSolution(np.zeros(0), np.zeros((0, 0)), 0.0, LpStatus.OPTIMAL, np.zeros(0), backend)
    status, v = BACKENDS[backend](lp)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(np.zeros(M), np.zeros((M, M)), float("nan"), status, None, backend)
    if lp.max_violation(v) > FEAS_TOL:
        return LpSolution(np.zeros(M), np.zeros((M, M)), float("nan"),
                          LpStatus.NUMERICAL_FAILURE, v, backend)
    T = v[:M].copy()
    X = np.zeros((M, M))
    for a in range(M):
        for b in range(M):
            if a != b:
                X[a, b] = v[x_index(M, a, b)]
    return LpSolution(T, X, float(lp.cost @ v), status, v, backend)


def solve_instance(instance: Instance, backend: str = "highs") -> LpSolution:
    return solve_lp(build_lp(instance), backend)


def certified_lower_bound(solution: LpSolution) -> float:
    if solution.status is not LpStatus.OPTIMAL:
        raise LpError(f"no lower bound from a {solution.status.value} LP")
    return solution.objective


def write_lp_text(lp: OrderingLp) -> str:
    """Render the LP in CPLEX LP text format (interchange version 1)."""
    def name(j):
        if j < lp.num_coflows:
            return f"T{j}"
        k = j - lp.num_coflows
        a, rest = divmod(k, lp.num_coflows - 1)
        b = rest if rest < a else rest + 1
        return f"x{a}_{b}"

    def expr(row_idx, row_vals):
        parts = []
        for j, v in zip(row_idx, row_vals):
            parts.append(f"{'-' if v < 0 else '+'} {abs(v)!r} {name(j)}")
        text = " ".join(parts) if parts else "0 T0"
        return text[2:] if text.startswith("+ ") else text

    lines = ["\\ kcore-ocs ordering LP, format v1", "Minimize", " obj: " + expr(
        np.nonzero(lp.cost)[0], lp.cost[np.nonzero(lp.cost)[0]]), "Subject To"]
    A = lp.A_ge.tocsr()
    for r in range(A.shape[0]):
        lo, hi = A.indptr[r], A.indptr[r + 1]
        kind = lp.ge_kinds[r][:3]
        tag = "_".join(str(k) for k in lp.ge_keys[r])
        lines.append(f" {kind}_{tag}: {expr(A.indices[lo:hi], A.data[lo:hi])} >= {lp.b_ge[r]!r}")
    E = lp.A_eq.tocsr()
    for r in range(E.shape[0]):
        lo, hi = E.indptr[r], E.indptr[r + 1]
        a, b = lp.eq_keys[r]
        lines.append(f" pair_{a}_{b}: {expr(E.indices[lo:hi], E.data[lo:hi])} = {lp.b_eq[r]!r}")
    lines.append("Bounds")
    for j in range(lp.num_vars):
        hi = lp.upper[j]
        lines.append(f" {lp.lower[j]!r} <= {name(j)}" + ("" if np.isinf(hi) else f" <= {hi!r}"))
    lines.append("End")
    return "\n".join(lines) + "\n"
