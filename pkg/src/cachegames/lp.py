"""Dense LP solving for the domain and game engines.

Problems are always `maximize c.x  s.t.  A x <= h, x >= 0`.  The solver must
return basic (vertex) optima deterministically, because boundary vertices and
best-response fixpoints are read straight off the solutions.  The heavy
lifting is delegated to HiGHS dual simplex via scipy, which satisfies both
requirements; `oracle.lp_vertex_enumerate` provides the independent
brute-force counterpart used in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalFailure

FEAS_TOL = 1e-9


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x subject to inequality_matrix @ x <= inequality_rhs, x >= 0."""

    objective: np.ndarray
    inequality_matrix: np.ndarray
    inequality_rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        a = np.asarray(self.inequality_matrix, dtype=float)
        if a.size == 0:
            a = a.reshape(0, c.size)
        h = np.asarray(self.inequality_rhs, dtype=float).ravel()
        if a.ndim != 2 or a.shape[1] != c.size or a.shape[0] != h.size:
            raise ValueError(
                f"inconsistent LP shapes: c{c.shape}, A{a.shape}, h{h.shape}"
            )
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "inequality_matrix", a)
        object.__setattr__(self, "inequality_rhs", h)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.inequality_rhs.size


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    value: float
    status: LpStatus


RAY_TOL = 1e-9


def _classify_ambiguous(lp: LinearProgram, a_ub, b_ub, cap: int) -> LpStatus:
    """Decide infeasible / unbounded / solvable from first principles.

    Feasibility probe: same constraints, zero objective — can never be
    unbounded, so its verdict is trustworthy.  Boundedness probe: maximize the
    objective over the recession cone {A d <= 0, 0 <= d <= 1} — always
    feasible and bounded, and a positive optimum exhibits an improving ray.
    Returns OPTIMAL to mean "feasible and bounded; a finite optimum exists".
    """
    opts = {
        "maxiter": max(cap, 100),
        "presolve": True,
        "primal_feasibility_tolerance": 1e-9,
        "dual_feasibility_tolerance": 1e-9,
    }
    feas = linprog(
        np.zeros(lp.n_vars), A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs-ds", options=opts
    )
    if feas.status == 2:
        return LpStatus.INFEASIBLE
    if feas.status != 0:
        raise NumericalFailure(f"feasibility probe failed: {feas.message}")
    ray_rhs = np.zeros(lp.n_rows) if lp.n_rows else None
    ray = linprog(
        -lp.objective, A_ub=a_ub, b_ub=ray_rhs, bounds=(0, 1), method="highs-ds", options=opts
    )
    if ray.status != 0:
        raise NumericalFailure(f"recession-ray probe failed: {ray.message}")
    if -float(ray.fun) > RAY_TOL:
        return LpStatus.UNBOUNDED
    return LpStatus.OPTIMAL


def solve(lp: LinearProgram) -> LpSolution:
    """Solve to a basic optimal solution with a deterministic pivot rule.

    Statuses Infeasible/Unbounded are returned, never raised.  An iteration
    cap of 10 * (n_rows + n_vars)^2 guards against pathological pivoting; on
    hitting it (or any numerical breakdown inside the solver) a
    NumericalFailure is raised.
    """
    cap = 10 * (lp.n_rows + lp.n_vars) ** 2
    a_ub = lp.inequality_matrix if lp.n_rows else None
    b_ub = lp.inequality_rhs if lp.n_rows else None
    res = linprog(
        -lp.objective,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=(0, None),
        method="highs-ds",
        options={
            "maxiter": max(cap, 100),
            "presolve": True,
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    if res.status in (2, 3, 4):
        # Dual simplex garbles the infeasible/unbounded distinction in both
        # presolve settings (an unbounded primal can surface as an infeasible
        # dual, or as "Unknown").  Settle it with two probes that each have
        # only unambiguous outcomes, then re-solve if an optimum must exist.
        verdict = _classify_ambiguous(lp, a_ub, b_ub, cap)
        if verdict is LpStatus.INFEASIBLE:
            return LpSolution(x=np.full(lp.n_vars, np.nan), value=np.nan, status=LpStatus.INFEASIBLE)
        if verdict is LpStatus.UNBOUNDED:
            return LpSolution(x=np.full(lp.n_vars, np.nan), value=np.inf, status=LpStatus.UNBOUNDED)
        res = linprog(
            -lp.objective,
            A_ub=a_ub,
            b_ub=b_ub,
            bounds=(0, None),
            method="highs-ds",
            options={
                "maxiter": max(cap, 100),
                "presolve": False,
                "primal_feasibility_tolerance": 1e-9,
                "dual_feasibility_tolerance": 1e-9,
            },
        )
    if res.status != 0:
        raise NumericalFailure(f"LP solver stopped without an optimum: {res.message}")
    x = np.asarray(res.x, dtype=float)
    if np.any(x < -1e-12):
        # HiGHS keeps bound violations within its own tolerance; snap dust.
        x = np.where(x < 0, 0.0, x)
    if lp.n_rows:
        slack = lp.inequality_matrix @ x - lp.inequality_rhs
        worst = float(slack.max())
        if worst > FEAS_TOL:
            raise NumericalFailure(f"reported optimum violates feasibility by {worst:.3e}")
    return LpSolution(x=x, value=float(lp.objective @ x), status=LpStatus.OPTIMAL)
