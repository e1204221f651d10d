"""Caching games between the two users and the cooperative allocation on top.

In the noncooperative game each user controls its own per-item cache vector;
the overlap vector and the pairing variables are set to whatever maximizes the
responding user's expected throughput.  Equilibria are searched by alternating
best responses from a random start.  The cooperative side maximizes the sum of
throughputs (the alpha=0.5 scalarization, doubled) and splits the surplus over
the noncooperative payoffs equally; when no equilibrium is found, the greedy
solo-caching payoffs serve as the fallback baselines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInstance, InvalidPlacement
from .lp import LinearProgram
from .model import Instance, pure_caching_throughput
from .twouser import (
    PLACEMENT_TOL,
    ScalarizedSystem,
    ThroughputPoint,
    TwoUserPlacement,
    _solve_or_raise,
    assemble_system,
    build_scalarized_lp,
    clip_overlap,
    expected_throughput,
)

NASH_BASED = "NashBased"
PURE_CACHING_BASED = "PureCachingBased"


@dataclass(frozen=True)
class NashResult:
    placement: TwoUserPlacement
    payoffs: ThroughputPoint
    converged: bool
    iterations: int


@dataclass(frozen=True)
class Allocation:
    r1c: float
    r2c: float
    basis: str
    total: float


@dataclass(frozen=True)
class BestResponse:
    """Responder's optimal cache vector, the overlap it prefers, and its payoff."""

    cache: np.ndarray
    overlap: np.ndarray
    payoff: float


def _restricted_max(sys_: ScalarizedSystem, c: np.ndarray, d: float, fixed_cols, fixed_vals):
    """Maximize c.x + d over the shared polytope with some columns pinned.

    Rows that lose all free columns are constraints purely on the pinned
    values; they must already hold, otherwise the pin itself was infeasible.
    """
    nv = sys_.layout.n_vars
    fixed_cols = np.asarray(fixed_cols, dtype=int)
    fixed_vals = np.asarray(fixed_vals, dtype=float)
    mask = np.ones(nv, dtype=bool)
    mask[fixed_cols] = False
    free = np.flatnonzero(mask)
    h2 = sys_.h - sys_.a[:, fixed_cols] @ fixed_vals
    a2 = sys_.a[:, free]
    live = np.any(a2 != 0.0, axis=1)
    if np.any(h2[~live] < -1e-7):
        raise InvalidPlacement("pinned vector violates the caching polytope")
    sol = _solve_or_raise(LinearProgram(c[free], a2[live], h2[live]))
    x = np.zeros(nv)
    x[fixed_cols] = fixed_vals
    x[free] = sol.x
    return x, float(c @ x + d)


def _check_own_constraints(vec: np.ndarray, budget: float):
    if np.any(vec < -PLACEMENT_TOL) or np.any(vec > 1 + PLACEMENT_TOL):
        raise InvalidPlacement("fixed cache vector leaves [0, 1]")
    if vec.sum() > budget + PLACEMENT_TOL:
        raise InvalidPlacement("fixed cache vector exceeds its buffer")


def best_response(
    inst: Instance,
    fixed_user: int,
    fixed_vector,
    system: ScalarizedSystem | None = None,
) -> BestResponse:
    """Optimal reply of the other user when `fixed_user`'s cache vector is pinned.

    The responder adjusts its own cache vector together with the overlap and
    pairing variables, maximizing its expected throughput.
    """
    if fixed_user not in (1, 2):
        raise InvalidInstance("fixed_user must be 1 or 2")
    sys_ = system if system is not None else assemble_system(inst)
    lay = sys_.layout
    n = lay.num_items
    vec = np.asarray(fixed_vector, dtype=float).ravel()
    if vec.size != n:
        raise InvalidPlacement("fixed vector has the wrong width")
    _check_own_constraints(vec, inst.buffers.capacities[fixed_user - 1])
    if fixed_user == 1:
        cols = np.arange(0, n)
        c, d = sys_.c2, sys_.d2
        resp = lay.v
    else:
        cols = np.arange(n, 2 * n)
        c, d = sys_.c1, sys_.d1
        resp = lay.u
    x, payoff = _restricted_max(sys_, c, d, cols, vec)
    cache = np.clip(x[resp], 0.0, 1.0)
    budget = inst.buffers.capacities[2 - fixed_user]
    total = cache.sum()
    if total > budget:
        cache = cache * (budget / total)
    return BestResponse(cache=cache, overlap=x[lay.w], payoff=payoff)


def find_psne(inst: Instance, max_iters: int = 100, eps: float = 1e-5, rng=None) -> NashResult:
    """Alternating best responses from a random start.

    User 1's vector is initialized uniformly on the box and rescaled into its
    budget; each round lets user 2 reply, then user 1.  The dynamics stop when
    the update to (cache vector, overlap) is below eps in summed Euclidean
    norm; hitting the iteration cap reports converged=False rather than
    pretending.
    """
    if inst.num_users != 2:
        raise InvalidInstance("the caching game is defined for two users")
    if max_iters < 1:
        raise InvalidInstance("need at least one iteration")
    if eps <= 0:
        raise InvalidInstance("eps must be positive")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    sys_ = assemble_system(inst)
    n = inst.num_items
    b1 = inst.buffers.capacities[0]
    u = gen.uniform(0.0, 1.0, n)
    total0 = u.sum()
    if total0 > b1:
        u *= b1 / total0
    converged = False
    iterations = 0
    placement = None
    for t in range(1, max_iters + 1):
        iterations = t
        reply2 = best_response(inst, 1, u, system=sys_)
        v, w_back = reply2.cache, reply2.overlap
        reply1 = best_response(inst, 2, v, system=sys_)
        u_next, w_forth = reply1.cache, reply1.overlap
        delta = float(np.linalg.norm(u - u_next) + np.linalg.norm(w_back - w_forth))
        if delta <= eps:
            converged = True
            placement = TwoUserPlacement(u=u, v=v, w=clip_overlap(u, v, w_back))
            break
        u = u_next
    if placement is None:
        # not converged: report the last internally consistent reply triple
        placement = TwoUserPlacement(u=u, v=v, w=clip_overlap(u, v, w_forth))
    payoffs = expected_throughput(inst, placement)
    return NashResult(placement=placement, payoffs=payoffs, converged=converged, iterations=iterations)


def verify_psne(inst: Instance, pl: TwoUserPlacement, tol: float = 1e-6) -> bool:
    """Check the equilibrium conditions directly.

    (a)/(b): neither user can improve its payoff beyond tol by re-optimizing
    its own cache vector (with the overlap and pairing free).  (c): at the
    fixed pair of cache vectors, the shared overlap must already give each
    user its privately optimal overlap payoff, i.e. the two users agree on
    the overlap.
    """
    sys_ = assemble_system(inst)
    lay = sys_.layout
    n = lay.num_items
    current = expected_throughput(inst, pl)
    gain1 = best_response(inst, 2, pl.v, system=sys_).payoff - current.r1
    if gain1 > tol:
        return False
    gain2 = best_response(inst, 1, pl.u, system=sys_).payoff - current.r2
    if gain2 > tol:
        return False
    cols = np.arange(0, 2 * n)
    vals = np.concatenate([pl.u, pl.v])
    for c, d, have in ((sys_.c1, sys_.d1, current.r1), (sys_.c2, sys_.d2, current.r2)):
        _, best = _restricted_max(sys_, c, d, cols, vals)
        if best - have > tol:
            return False
    return True


def cooperative_total(inst: Instance, system: ScalarizedSystem | None = None) -> float:
    """Maximum combined throughput over the region (alpha=0.5 value, doubled)."""
    lp, const, _ = build_scalarized_lp(inst, 0.5, system=system)
    sol = _solve_or_raise(lp)
    return 2.0 * (sol.value + const)


def allocation_from(inst: Instance, nash: NashResult, total: float | None = None) -> Allocation:
    """Split the cooperative surplus equally on top of per-user baselines."""
    if total is None:
        total = cooperative_total(inst)
    if nash.converged:
        base1, base2 = nash.payoffs.r1, nash.payoffs.r2
        basis = NASH_BASED
    else:
        b1, b2 = inst.buffers.capacities
        base1 = pure_caching_throughput(inst.preferences.row(1), b1)
        base2 = pure_caching_throughput(inst.preferences.row(2), b2)
        basis = PURE_CACHING_BASED
    half_gain = (total - base1 - base2) / 2.0
    return Allocation(r1c=base1 + half_gain, r2c=base2 + half_gain, basis=basis, total=total)


def allocate(inst: Instance, max_iters: int = 100, eps: float = 1e-5, rng=None) -> Allocation:
    return allocation_from(inst, find_psne(inst, max_iters=max_iters, eps=eps, rng=rng))
