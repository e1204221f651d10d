"""Independent brute-force validators.

Everything here recomputes results the slow, obviously-correct way: LP optima
by enumerating basis vertices, cooperative optima by scanning a placement
grid, and two-user delivery costs by materializing actual chunk sets and
counting transmissions.  The engines are tested against these, never the
other way around.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DecodingFailure, MisalignedPlacement, TooLarge
from .lp import LinearProgram, LpSolution, LpStatus
from .model import DemandOutcome, Instance, build_instance
from .twouser import TwoUserPlacement, expected_throughput

VERTEX_TOL = 1e-9
MAX_ENUM_VARS = 8
MAX_ENUM_ROWS = 12
GRID_GUARD = 10**7


@dataclass(frozen=True)
class GridSpec:
    """Placement fractions restricted to multiples of 1/resolution."""

    resolution: int

    def __post_init__(self):
        if self.resolution < 1:
            raise TooLarge("grid resolution must be at least 1")


def _feasible_vertices(a: np.ndarray, h: np.ndarray):
    """All basic feasible points of {A x <= h, x >= 0}, via n-subsets of active rows."""
    m, n = a.shape
    stacked = np.vstack([a, -np.eye(n)])
    rhs = np.concatenate([h, np.zeros(n)])
    vertices = []
    for rows in itertools.combinations(range(m + n), n):
        sub = stacked[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, rhs[list(rows)])
        if np.all(x >= -VERTEX_TOL) and np.all(a @ x <= h + VERTEX_TOL):
            vertices.append(x)
    return vertices


def _has_improving_ray(a: np.ndarray, c: np.ndarray) -> bool:
    """Does some direction d >= 0 with A d <= 0, sum(d) = 1 improve c?  The set of
    such directions is a polytope; scan its vertices."""
    m, n = a.shape
    stacked = np.vstack([a, -np.eye(n)])
    rhs = np.zeros(m + n)
    best = 0.0
    for rows in itertools.combinations(range(m + n), n - 1):
        sub = np.vstack([stacked[list(rows)], np.ones(n)])
        target = np.append(rhs[list(rows)], 1.0)
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        d = np.linalg.solve(sub, target)
        if np.all(d >= -VERTEX_TOL) and np.all(a @ d <= VERTEX_TOL):
            best = max(best, float(c @ d))
    return best > 1e-9


def lp_vertex_enumerate(lp: LinearProgram) -> LpSolution:
    """Exhaustive vertex enumeration; the ground truth for small LPs."""
    if lp.n_vars > MAX_ENUM_VARS or lp.n_rows > MAX_ENUM_ROWS:
        raise TooLarge(f"enumeration guard: {lp.n_vars} vars / {lp.n_rows} rows")
    a, h, c = lp.inequality_matrix, lp.inequality_rhs, lp.objective
    vertices = _feasible_vertices(a, h)
    if not vertices:
        return LpSolution(x=np.full(lp.n_vars, np.nan), value=np.nan, status=LpStatus.INFEASIBLE)
    if _has_improving_ray(a, c):
        return LpSolution(x=np.full(lp.n_vars, np.nan), value=np.inf, status=LpStatus.UNBOUNDED)
    values = [float(c @ x) for x in vertices]
    best = int(np.argmax(values))
    return LpSolution(x=vertices[best], value=values[best], status=LpStatus.OPTIMAL)


def _per_item_triples(r: int):
    """All (u, v, w) fraction triples on the 1/r grid satisfying the box rules."""
    triples = []
    for a in range(r + 1):
        for b in range(r + 1):
            for c in range(max(0, a + b - r), min(a, b) + 1):
                triples.append((a / r, b / r, c / r))
    return triples


def grid_best_sum(inst: Instance, grid: GridSpec) -> float:
    """Best r1 + r2 over all grid-aligned placements; a certified inner bound."""
    if inst.num_users != 2:
        raise TooLarge("grid search is defined for two users")
    r = grid.resolution
    n = inst.num_items
    triples = _per_item_triples(r)
    if len(triples) ** n > GRID_GUARD:
        raise TooLarge(f"{len(triples)}^{n} grid points exceed the guard")
    b1, b2 = inst.buffers.capacities
    best = -np.inf
    for combo in itertools.product(triples, repeat=n):
        u = np.array([t[0] for t in combo])
        v = np.array([t[1] for t in combo])
        w = np.array([t[2] for t in combo])
        if u.sum() > b1 + 1e-12 or v.sum() > b2 + 1e-12:
            continue
        pt = expected_throughput(inst, TwoUserPlacement(u=u, v=v, w=w))
        best = max(best, pt.r1 + pt.r2)
    return float(best)


def _chunk_sets(pl: TwoUserPlacement, g: int):
    """Materialize chunk-level caches realizing a grid-aligned placement.

    User 1 takes the first u*G chunk indices of each item; the overlap is the
    shared prefix of w*G chunks; user 2 adds the (v-w)*G chunks right after
    user 1's block, which fits because u + v - w <= 1.
    """
    c1, c2 = set(), set()
    for i in range(pl.num_items):
        cu = round(pl.u[i] * g)
        cv = round(pl.v[i] * g)
        cw = round(pl.w[i] * g)
        for name, frac, count in (("u", pl.u[i], cu), ("v", pl.v[i], cv), ("w", pl.w[i], cw)):
            if abs(frac * g - count) > 1e-9:
                raise MisalignedPlacement(f"{name}[{i}] = {frac!r} is not a multiple of 1/{g}")
        item = i + 1
        c1.update((item, c) for c in range(1, cu + 1))
        c2.update((item, c) for c in range(1, cw + 1))
        c2.update((item, c) for c in range(cu + 1, cu + (cv - cw) + 1))
    return c1, c2


def bit_level_two_user_cost(pl: TwoUserPlacement, outcome: DemandOutcome, g: int):
    """Count actual transmissions for one outcome at chunk resolution.

    Builds the XOR pairing between the chunks each user wants from the other's
    cache, unicasts the unpaired remainders and the uncached exclusive
    demands, multicasts uncached common demands, and verifies that both users
    can decode.  Returns the equal-share costs in item units.
    """
    d1, d2 = outcome.requested[0], outcome.requested[1]
    c1, c2 = _chunk_sets(pl, g)
    want1 = {(n, c) for n in d1 for c in range(1, g + 1)} - c1
    want2 = {(n, c) for n in d2 for c in range(1, g + 1)} - c2
    cross1 = sorted(want1 & c2)  # user 1 wants these; user 2 caches them
    cross2 = sorted(want2 & c1)
    paired = min(len(cross1), len(cross2))
    xor_pairs = list(zip(cross1[:paired], cross2[:paired]))
    unicast1 = cross1[paired:] + sorted(want1 - c2 - {(n, c) for n in d1 & d2 for c in range(1, g + 1)})
    unicast2 = cross2[paired:] + sorted(want2 - c1 - {(n, c) for n in d1 & d2 for c in range(1, g + 1)})
    common_plain = sorted((want1 & want2) - c1 - c2)
    # decodability: each XOR pair must be cancellable from the opposite cache
    for a, b in xor_pairs:
        if b not in c1 or a not in c2:
            raise DecodingFailure(f"XOR pair {a}^{b} is not cancellable")
    recovered1 = {a for a, _ in xor_pairs} | set(unicast1) | set(common_plain)
    recovered2 = {b for _, b in xor_pairs} | set(unicast2) | set(common_plain)
    if want1 - recovered1 or want2 - recovered2:
        raise DecodingFailure("bit-level delivery failed to cover a demand")
    shared = len(xor_pairs) + len(common_plain)
    cost1 = len(unicast1) / g + shared / (2 * g)
    cost2 = len(unicast2) / g + shared / (2 * g)
    return cost1, cost2


def random_lp(rng: np.random.Generator, n_vars: int = 4, n_rows: int = 6) -> LinearProgram:
    """Draw a small random program for solver cross-checks.

    Right-hand sides are biased positive so the origin is usually feasible,
    which keeps the infeasible/unbounded cases rare but present.
    """
    a = rng.normal(size=(n_rows, n_vars))
    h = rng.uniform(-0.2, 1.0, size=n_rows)
    c = rng.normal(size=n_vars)
    return LinearProgram(objective=c, inequality_matrix=a, inequality_rhs=h)


def random_grid_placement(rng: np.random.Generator, n_items: int, resolution: int) -> TwoUserPlacement:
    """Draw a placement whose fractions all sit on the 1/resolution grid."""
    u = np.empty(n_items)
    v = np.empty(n_items)
    w = np.empty(n_items)
    for n in range(n_items):
        a = int(rng.integers(0, resolution + 1))
        b = int(rng.integers(0, resolution + 1))
        lo = max(0, a + b - resolution)
        hi = min(a, b)
        c = int(rng.integers(lo, hi + 1))
        u[n] = a / resolution
        v[n] = b / resolution
        w[n] = c / resolution
    return TwoUserPlacement(u=u, v=v, w=w)


def random_two_user_instance(rng: np.random.Generator, max_items: int = 6) -> Instance:
    n = int(rng.integers(2, max_items + 1))
    p = rng.dirichlet(np.ones(n), size=2)
    buffers = rng.uniform(0.0, n, size=2)
    return build_instance(p, buffers)


def random_multiuser_instance(
    rng: np.random.Generator,
    max_users: int = 4,
    max_items: int = 6,
    max_chunks: int = 4,
) -> Instance:
    k = int(rng.integers(2, max_users + 1))
    n = int(rng.integers(2, max_items + 1))
    g = int(rng.integers(1, max_chunks + 1))
    p = rng.dirichlet(np.ones(n), size=k)
    buffers = rng.integers(0, n * g + 1, size=k) / g
    return build_instance(p, buffers, chunks_per_item=g)
