"""Small dense LP solver: two-phase simplex with Bland's anti-cycling rule.

Problems have the form::

    minimize    c . z
    subject to  A_ub z <= b_ub
                A_eq z == b_eq
                z >= 0

Sizes here are tiny (tens of variables), so the tableau is dense and every
pivot is exact up to double rounding.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import kernels

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9


class LpStructureError(ValueError):
    """Malformed problem dimensions or non-finite data."""


class LpContractError(ValueError):
    """Operation called on a solution it does not accept."""


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _rows(a, b, n, name):
    if a is None and b is None:
        return np.zeros((0, n)), np.zeros(0)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.size == 0 and b.size == 0:
        return np.zeros((0, n)), np.zeros(0)
    if a.ndim != 2 or a.shape[1] != n:
        raise LpStructureError(f"{name} rows must have {n} columns, got shape {a.shape}")
    if b.ndim != 1 or b.shape[0] != a.shape[0]:
        raise LpStructureError(f"{name} has {a.shape[0]} rows but {b.shape[0]} right-hand sides")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise LpStructureError(f"{name} contains non-finite entries")
    return a, b


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise LpStructureError("objective must be a non-empty vector")
        if not np.all(np.isfinite(c)):
            raise LpStructureError("objective contains non-finite entries")
        n = c.size
        a_ub, b_ub = _rows(self.A_ub, self.b_ub, n, "inequality")
        a_eq, b_eq = _rows(self.A_eq, self.b_eq, n, "equality")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A_ub", a_ub)
        object.__setattr__(self, "b_ub", b_ub)
        object.__setattr__(self, "A_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)

    @property
    def variable_count(self) -> int:
        return self.objective.size

    def with_objective(self, c) -> "LinearProgram":
        return LinearProgram(c, self.A_ub, self.b_ub, self.A_eq, self.b_eq)


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: Status
    point: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: int = 0
    # one value per objective for lexicographic solves
    objective_values: tuple = field(default=())

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass(frozen=True)
class SolutionCheck:
    eq_residual: float
    ub_violation: float
    min_entry: float
    objective_error: float

    def ok(self, tol=FEAS_TOL) -> bool:
        return (self.eq_residual <= tol and self.ub_violation <= tol
                and self.min_entry >= -1e-12 and self.objective_error <= tol)


class _Tableau:
    """Phase-1/phase-2 bookkeeping around the kernel tableau."""

    def __init__(self, lp: LinearProgram, backend=None):
        self.backend = backend
        n = lp.variable_count
        k = lp.A_ub.shape[0]
        q = lp.A_eq.shape[0]
        m = k + q
        self.n = n

        needs_art = []
        rows = np.zeros((m, n + k))
        rhs = np.zeros(m)
        for i in range(k):
            sign = 1.0 if lp.b_ub[i] >= 0 else -1.0
            rows[i, :n] = sign * lp.A_ub[i]
            rows[i, n + i] = sign
            rhs[i] = sign * lp.b_ub[i]
            needs_art.append(sign < 0)
        for i in range(q):
            sign = 1.0 if lp.b_eq[i] >= 0 else -1.0
            rows[k + i, :n] = sign * lp.A_eq[i]
            rhs[k + i] = sign * lp.b_eq[i]
            needs_art.append(True)

        art_rows = [i for i in range(m) if needs_art[i]]
        self.n_real = n + k
        N = self.n_real + len(art_rows)
        T = np.zeros((m + 1, N + 1))
        T[:m, :self.n_real] = rows
        T[:m, N] = rhs
        basis = np.empty(m, dtype=np.int64)
        for i in range(k):
            basis[i] = n + i
        for a, i in enumerate(art_rows):
            T[i, self.n_real + a] = 1.0
            basis[i] = self.n_real + a
        self.T = T
        self.basis = basis
        self.art_rows = art_rows
        self.iterations = 0
        self.scale = max(1.0, float(np.max(np.abs(rhs)))) if m else 1.0

    def _run(self, allowed, max_iter):
        status, its = kernels.simplex_iterate(self.T, self.basis, allowed, PIVOT_TOL, max_iter, self.backend)
        self.iterations += its
        if status == kernels.ITERATION_LIMIT:
            raise RuntimeError("simplex iteration limit reached")
        return status

    def _max_iter(self):
        return 50 * (self.T.shape[0] + self.T.shape[1]) + 1000

    def phase_one(self) -> bool:
        T = self.T
        m = T.shape[0] - 1
        if self.art_rows:
            T[m, :] = 0.0
            for i in self.art_rows:
                T[m, :] -= T[i, :]
            T[m, self.n_real:-1] = 0.0
            allowed = np.ones(T.shape[1] - 1, dtype=np.bool_)
            self._run(allowed, self._max_iter())
            if -T[m, -1] > FEAS_TOL * self.scale:
                return False
            self._drive_out_artificials()
        # drop artificial columns
        self.T = np.delete(self.T, np.s_[self.n_real:self.T.shape[1] - 1], axis=1)
        self.allowed = np.ones(self.n_real, dtype=np.bool_)
        return True

    def _drive_out_artificials(self):
        keep = []
        for r in range(self.T.shape[0] - 1):
            if self.basis[r] < self.n_real:
                keep.append(r)
                continue
            cols = np.flatnonzero(np.abs(self.T[r, :self.n_real]) > PIVOT_TOL)
            if cols.size:
                kernels.pivot(self.T, self.basis, r, int(cols[0]))
                keep.append(r)
            # otherwise the row is redundant and is dropped below
        m = self.T.shape[0] - 1
        if len(keep) < m:
            self.T = np.vstack([self.T[keep], self.T[m:]])
            self.basis = self.basis[keep].copy()

    def set_objective(self, c):
        T = self.T
        m = T.shape[0] - 1
        row = np.zeros(T.shape[1])
        row[:self.n] = c
        for i in range(m):
            cb = row[self.basis[i]]
            if cb != 0.0:
                row -= cb * T[i]
        for i in range(m):
            row[self.basis[i]] = 0.0
        T[m] = row

    def optimize(self):
        return self._run(self.allowed, self._max_iter())

    def freeze_nonoptimal_columns(self, c):
        # nonbasic columns with positive reduced cost must stay at zero to
        # remain on the optimal face of the current objective
        red = self.T[-1, :-1]
        thresh = FEAS_TOL * max(1.0, float(np.max(np.abs(c))))
        self.allowed &= ~(red > thresh)

    def point(self):
        z = np.zeros(self.n)
        rhs = self.T[:-1, -1]
        for i, b in enumerate(self.basis):
            if b < self.n:
                z[b] = rhs[i]
        z[(z < 0) & (z > -FEAS_TOL)] = 0.0
        return z


def solve(lp: LinearProgram, backend=None) -> LpSolution:
    """Minimize ``lp``; returns an optimal vertex or an Infeasible/Unbounded status."""
    return solve_lexicographic(lp, [lp.objective], backend=backend)


def solve_lexicographic(lp: LinearProgram, objectives: Sequence, backend=None) -> LpSolution:
    """Minimize each objective in turn over the optimal face of the previous ones.

    The optimal face is kept exactly by forbidding nonbasic columns whose
    reduced cost is positive, so no objective value is pinned numerically.
    ``objective_value`` reports the first objective at the returned point.
    """
    if not isinstance(lp, LinearProgram):
        raise LpStructureError("expected a LinearProgram")
    objs = [np.asarray(c, dtype=float) for c in objectives]
    if not objs:
        raise LpStructureError("at least one objective is required")
    for c in objs:
        if c.shape != (lp.variable_count,) or not np.all(np.isfinite(c)):
            raise LpStructureError("objective length must equal variable_count and be finite")

    tab = _Tableau(lp, backend)
    if not tab.phase_one():
        return LpSolution(Status.INFEASIBLE, iterations=tab.iterations)
    for idx, c in enumerate(objs):
        if idx:
            tab.freeze_nonoptimal_columns(objs[idx - 1])
        tab.set_objective(c)
        if tab.optimize() == kernels.UNBOUNDED:
            return LpSolution(Status.UNBOUNDED, iterations=tab.iterations)
    z = tab.point()
    values = tuple(float(c @ z) for c in objs)
    return LpSolution(Status.OPTIMAL, z, values[0], tab.iterations, values)


def verify_solution(lp: LinearProgram, sol: LpSolution) -> SolutionCheck:
    if sol.status is not Status.OPTIMAL or sol.point is None:
        raise LpContractError("only optimal solutions can be verified")
    z = np.asarray(sol.point, dtype=float)
    if z.shape != (lp.variable_count,):
        raise LpStructureError("solution length does not match the program")
    eq = float(np.max(np.abs(lp.A_eq @ z - lp.b_eq))) if lp.b_eq.size else 0.0
    ub = float(np.max(np.maximum(0.0, lp.A_ub @ z - lp.b_ub))) if lp.b_ub.size else 0.0
    return SolutionCheck(
        eq_residual=eq,
        ub_violation=ub,
        min_entry=float(z.min()),
        objective_error=abs(float(lp.objective @ z) - float(sol.objective_value)),
    )
