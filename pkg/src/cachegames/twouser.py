"""Two-user achievable region under uncoded, absolutely-fair policies.

A placement is described per item by three fractions: u (cached by user 1),
v (cached by user 2), and w (cached by both).  Delivery cost for a demand
outcome follows from the exclusive-fraction decomposition: XOR pairs serve
cross-cached bits to both users at half price, common requests with uncached
bits are multicast at half price, and everything else is unicast.

Maximizing a convex combination of the two expected throughputs is a linear
program over (u, v, w) plus one auxiliary variable per demand outcome that
linearizes the min() term of the XOR pairing.  Sweeping the combination
weight traces the boundary polygon of the region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInstance, InvalidPlacement, SolverFailure
from .lp import LinearProgram, LpStatus, solve
from .model import DemandOutcome, Instance

PLACEMENT_TOL = 1e-9
DEDUP_TOL = 1e-7
COLLINEAR_TOL = 1e-7


@dataclass(frozen=True)
class TwoUserPlacement:
    """Per-item cached fractions: u for user 1, v for user 2, w for both."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        # the +0.0 turns solver-produced -0.0 entries into canonical zeros
        u = np.asarray(self.u, dtype=float).ravel() + 0.0
        v = np.asarray(self.v, dtype=float).ravel() + 0.0
        w = np.asarray(self.w, dtype=float).ravel() + 0.0
        if not (u.size == v.size == w.size):
            raise InvalidPlacement("u, v, w must have one entry per item")
        for name, vec in (("u", u), ("v", v), ("w", w)):
            if np.any(vec < -PLACEMENT_TOL) or np.any(vec > 1 + PLACEMENT_TOL):
                raise InvalidPlacement(f"{name} leaves [0, 1]")
        if np.any(w > np.minimum(u, v) + PLACEMENT_TOL):
            raise InvalidPlacement("overlap w exceeds min(u, v)")
        if np.any(u + v - w > 1 + PLACEMENT_TOL):
            raise InvalidPlacement("cached fractions u + v - w exceed 1")
        for name, vec in (("u", u), ("v", v), ("w", w)):
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)

    @property
    def num_items(self) -> int:
        return self.u.size


@dataclass(frozen=True)
class ExclusiveFractions:
    """Partition of each item into only-1 / only-2 / both / neither fractions."""

    x_only1: np.ndarray
    x_only2: np.ndarray
    x_both: np.ndarray
    x_none: np.ndarray


@dataclass(frozen=True)
class ThroughputPoint:
    r1: float
    r2: float


@dataclass(frozen=True)
class ThroughputBoundary:
    """Boundary polygon vertices (decreasing r1) with the placements attaining them."""

    vertices: tuple
    placements: tuple


def clip_overlap(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Project an overlap vector onto its feasible band max(0, u+v-1) <= w <= min(u, v).

    Solver output sits within feasibility tolerance of the band; this removes
    the dust so downstream placement invariants hold exactly.
    """
    lo = np.maximum(0.0, u + v - 1.0)
    hi = np.minimum(u, v)
    return np.clip(np.asarray(w, dtype=float), lo, hi)


def exclusive_fractions(pl: TwoUserPlacement) -> ExclusiveFractions:
    return ExclusiveFractions(
        x_only1=pl.u - pl.w,
        x_only2=pl.v - pl.w,
        x_both=pl.w.copy(),
        x_none=1.0 - pl.u - pl.v + pl.w,
    )


def _two_user_outcome(outcome: DemandOutcome):
    if outcome.num_users != 2:
        raise InvalidInstance("outcome must cover exactly two users")
    d1, d2 = outcome.requested
    return d1, d2


def outcome_cost(pl: TwoUserPlacement, outcome: DemandOutcome):
    """Minimum transmission cost (per user, item units) for one demand outcome."""
    d1, d2 = _two_user_outcome(outcome)
    ex = exclusive_fractions(pl)
    i1 = np.array(sorted(n - 1 for n in d1), dtype=int)
    i2 = np.array(sorted(n - 1 for n in d2), dtype=int)
    both = np.array(sorted(n - 1 for n in d1 & d2), dtype=int)
    o1 = np.array(sorted(n - 1 for n in d1 - d2), dtype=int)
    o2 = np.array(sorted(n - 1 for n in d2 - d1), dtype=int)
    want1_at2 = float(ex.x_only2[i1].sum())
    want2_at1 = float(ex.x_only1[i2].sum())
    paired = min(want1_at2, want2_at1)
    none = ex.x_none
    cost1 = want1_at2 + float(none[o1].sum()) + 0.5 * float(none[both].sum()) - 0.5 * paired
    cost2 = want2_at1 + float(none[o2].sum()) + 0.5 * float(none[both].sum()) - 0.5 * paired
    return cost1, cost2


def _check_budgets(inst: Instance, pl: TwoUserPlacement):
    b1, b2 = inst.buffers.capacities
    if pl.num_items != inst.num_items:
        raise InvalidPlacement("placement width disagrees with catalog")
    if pl.u.sum() > b1 + PLACEMENT_TOL or pl.v.sum() > b2 + PLACEMENT_TOL:
        raise InvalidPlacement("placement exceeds a buffer budget")


def expected_throughput(inst: Instance, pl: TwoUserPlacement) -> ThroughputPoint:
    """Expected effective throughput pair for a fixed placement."""
    if inst.num_users != 2:
        raise InvalidInstance("expected_throughput is defined for two users")
    _check_budgets(inst, pl)
    p = inst.preferences.p
    e1 = e2 = 0.0
    for outcome, q in inst.demands.support:
        c1, c2 = outcome_cost(pl, outcome)
        e1 += q * c1
        e2 += q * c2
    return ThroughputPoint(float(p[0].sum() - e1), float(p[1].sum() - e2))


# --- scalarized LP ----------------------------------------------------------

@dataclass(frozen=True)
class VariableLayout:
    """Column layout of the scalarized LP: u block, v block, w block, then z."""

    num_items: int
    outcomes: tuple

    @property
    def u(self) -> slice:
        return slice(0, self.num_items)

    @property
    def v(self) -> slice:
        return slice(self.num_items, 2 * self.num_items)

    @property
    def w(self) -> slice:
        return slice(2 * self.num_items, 3 * self.num_items)

    @property
    def z(self) -> slice:
        return slice(3 * self.num_items, 3 * self.num_items + len(self.outcomes))

    @property
    def n_vars(self) -> int:
        return 3 * self.num_items + len(self.outcomes)


@dataclass(frozen=True)
class ScalarizedSystem:
    """Shared constraint matrix plus per-user affine objectives R_k = c_k . x + d_k."""

    layout: VariableLayout
    a: np.ndarray
    h: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    d1: float
    d2: float

    def placement(self, x: np.ndarray) -> TwoUserPlacement:
        lay = self.layout
        u = np.clip(x[lay.u], 0.0, 1.0)
        v = np.clip(x[lay.v], 0.0, 1.0)
        return TwoUserPlacement(u=u, v=v, w=clip_overlap(u, v, x[lay.w]))

    def throughputs(self, x: np.ndarray) -> ThroughputPoint:
        return ThroughputPoint(float(self.c1 @ x + self.d1), float(self.c2 @ x + self.d2))


def assemble_system(inst: Instance) -> ScalarizedSystem:
    """Build the shared polytope and both users' objective vectors once."""
    if inst.num_users != 2:
        raise InvalidInstance("the scalarized LP is defined for two users")
    n = inst.num_items
    support = inst.demands.support
    s = len(support)
    layout = VariableLayout(num_items=n, outcomes=tuple(o for o, _ in support))
    nv = layout.n_vars
    rows = 3 * n + 2 + 2 * s
    a = np.zeros((rows, nv))
    h = np.zeros(rows)
    un, vn, wn = np.arange(n), n + np.arange(n), 2 * n + np.arange(n)
    r = 0
    for i in range(n):  # w <= u
        a[r, wn[i]] = 1.0
        a[r, un[i]] = -1.0
        r += 1
    for i in range(n):  # w <= v
        a[r, wn[i]] = 1.0
        a[r, vn[i]] = -1.0
        r += 1
    for i in range(n):  # u + v - w <= 1
        a[r, un[i]] = 1.0
        a[r, vn[i]] = 1.0
        a[r, wn[i]] = -1.0
        h[r] = 1.0
        r += 1
    b1, b2 = inst.buffers.capacities
    a[r, layout.u] = 1.0
    h[r] = b1
    r += 1
    a[r, layout.v] = 1.0
    h[r] = b2
    r += 1

    p = inst.preferences.p
    c1 = np.zeros(nv)
    c2 = np.zeros(nv)
    d1 = float(p[0].sum())
    d2 = float(p[1].sum())
    for idx, (outcome, q) in enumerate(support):
        set1, set2 = _two_user_outcome(outcome)
        i1 = np.array(sorted(m - 1 for m in set1), dtype=int)
        i2 = np.array(sorted(m - 1 for m in set2), dtype=int)
        both = np.array(sorted(m - 1 for m in set1 & set2), dtype=int)
        o1 = np.array(sorted(m - 1 for m in set1 - set2), dtype=int)
        o2 = np.array(sorted(m - 1 for m in set2 - set1), dtype=int)
        zc = 3 * n + idx
        # pairing variable: z <= sum_{n in D2} (u - w), z <= sum_{n in D1} (v - w)
        a[r, zc] = 1.0
        a[r, i2] -= 1.0
        a[r, 2 * n + i2] += 1.0
        r += 1
        a[r, zc] = 1.0
        a[r, n + i1] -= 1.0
        a[r, 2 * n + i1] += 1.0
        r += 1
        # user 1 pays: cross-cached bits of its demands, uncached exclusive
        # demands at full price, uncached common demands at half price, minus
        # half of the XOR pairing.
        c1[n + i1] -= q
        c1[2 * n + i1] += q
        if o1.size:
            c1[o1] += q
            c1[n + o1] += q
            c1[2 * n + o1] -= q
            d1 -= q * o1.size
        if both.size:
            c1[both] += 0.5 * q
            c1[n + both] += 0.5 * q
            c1[2 * n + both] -= 0.5 * q
            d1 -= 0.5 * q * both.size
        c1[zc] += 0.5 * q
        c2[i2] -= q
        c2[2 * n + i2] += q
        if o2.size:
            c2[o2] += q
            c2[n + o2] += q
            c2[2 * n + o2] -= q
            d2 -= q * o2.size
        if both.size:
            c2[both] += 0.5 * q
            c2[n + both] += 0.5 * q
            c2[2 * n + both] -= 0.5 * q
            d2 -= 0.5 * q * both.size
        c2[zc] += 0.5 * q
    return ScalarizedSystem(layout=layout, a=a, h=h, c1=c1, c2=c2, d1=d1, d2=d2)


def build_scalarized_lp(inst: Instance, alpha: float, system: ScalarizedSystem | None = None):
    """LP whose optimum maximizes alpha*r1 + (1-alpha)*r2 over the region.

    Returns (lp, constant, layout); the optimal combined throughput equals
    lp value + constant.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInstance(f"alpha must lie in [0, 1], got {alpha!r}")
    sys_ = system if system is not None else assemble_system(inst)
    c = alpha * sys_.c1 + (1.0 - alpha) * sys_.c2
    const = alpha * sys_.d1 + (1.0 - alpha) * sys_.d2
    return LinearProgram(objective=c, inequality_matrix=sys_.a, inequality_rhs=sys_.h), const, sys_.layout


def _solve_or_raise(lp: LinearProgram):
    sol = solve(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"scalarized LP ended with status {sol.status.value}")
    return sol


def _solve_weighted(sys_: ScalarizedSystem, alpha: float):
    """Optimal x for weight alpha; ties at the pure weights are broken
    lexicographically so the polygon corners are canonical."""
    c = alpha * sys_.c1 + (1.0 - alpha) * sys_.c2
    sol = _solve_or_raise(LinearProgram(c, sys_.a, sys_.h))
    if alpha not in (0.0, 1.0):
        return sol.x
    # secondary objective: among maximizers of the favored user, favor the other
    primary_floor = sol.value - 1e-12
    a2 = np.vstack([sys_.a, -c])
    h2 = np.append(sys_.h, -primary_floor)
    tie = sys_.c1 if alpha == 0.0 else sys_.c2
    return _solve_or_raise(LinearProgram(tie, a2, h2)).x


def sweep_table(inst: Instance, alphas) -> list:
    """One (alpha, point, placement) row per grid weight, in ascending alpha."""
    grid = sorted({float(a) for a in alphas})
    if not grid:
        raise InvalidInstance("alpha grid is empty")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise InvalidInstance("alpha grid must lie in [0, 1]")
    sys_ = assemble_system(inst)
    rows = []
    for alpha in grid:
        x = _solve_weighted(sys_, alpha)
        rows.append((alpha, sys_.throughputs(x), sys_.placement(x)))
    return rows


def boundary_from_points(points) -> ThroughputBoundary:
    """Dedup, Pareto-filter, and collapse collinear points into the vertex chain."""
    kept = []
    for pt, pl in points:
        if all(abs(pt.r1 - q.r1) + abs(pt.r2 - q.r2) > DEDUP_TOL for q, _ in kept):
            kept.append((pt, pl))
    pareto = [
        (pt, pl)
        for pt, pl in kept
        if not any(
            (q.r1 >= pt.r1 - 1e-12 and q.r2 >= pt.r2 - 1e-12)
            and (q.r1 > pt.r1 + DEDUP_TOL / 2 or q.r2 > pt.r2 + DEDUP_TOL / 2)
            for q, _ in kept
        )
    ]
    pareto.sort(key=lambda entry: (-entry[0].r1, -entry[0].r2))
    chain = []
    for pt, pl in pareto:
        while len(chain) >= 2:
            o, _ = chain[-2]
            m, _ = chain[-1]
            cross = (m.r1 - o.r1) * (pt.r2 - o.r2) - (m.r2 - o.r2) * (pt.r1 - o.r1)
            span = float(np.hypot(pt.r1 - o.r1, pt.r2 - o.r2))
            # drop the middle point unless it sticks out of the chord by > tol
            if cross <= COLLINEAR_TOL * max(span, 1e-12):
                chain.pop()
            else:
                break
        chain.append((pt, pl))
    return ThroughputBoundary(
        vertices=tuple(pt for pt, _ in chain),
        placements=tuple(pl for _, pl in chain),
    )


def boundary_sweep(inst: Instance, alphas) -> ThroughputBoundary:
    """Trace the region boundary by scalarization over the given weight grid."""
    rows = sweep_table(inst, alphas)
    return boundary_from_points([(pt, pl) for _, pt, pl in rows])
