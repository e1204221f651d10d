"""The brute-force validators themselves get sanity coverage here; the engine
modules are cross-checked against them elsewhere."""

import numpy as np
import pytest

from cachegames.errors import MisalignedPlacement, TooLarge
from cachegames.games import cooperative_total
from cachegames.lp import LinearProgram, LpStatus, solve
from cachegames.model import DemandOutcome, build_instance
from cachegames.oracle import (
    GridSpec,
    bit_level_two_user_cost,
    grid_best_sum,
    lp_vertex_enumerate,
    random_grid_placement,
    random_lp,
    random_multiuser_instance,
    random_two_user_instance,
)
from cachegames.presets import preset_instance
from cachegames.twouser import TwoUserPlacement, outcome_cost


def lp_of(c, a, h):
    return LinearProgram(
        objective=np.asarray(c, dtype=float),
        inequality_matrix=np.asarray(a, dtype=float),
        inequality_rhs=np.asarray(h, dtype=float),
    )


class TestVertexEnumeration:
    def test_simplex_corner(self):
        sol = lp_vertex_enumerate(lp_of([2.0, 1.0], [[1.0, 1.0]], [1.0]))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.value == pytest.approx(2.0, abs=1e-12)
        np.testing.assert_allclose(sol.x, [1.0, 0.0], atol=1e-9)

    def test_detects_infeasible(self):
        sol = lp_vertex_enumerate(lp_of([1.0], [[1.0]], [-1.0]))
        assert sol.status is LpStatus.INFEASIBLE
        assert np.isnan(sol.value)

    def test_detects_unbounded(self):
        sol = lp_vertex_enumerate(lp_of([1.0, 0.0], [[-1.0, 0.0]], [0.0]))
        assert sol.status is LpStatus.UNBOUNDED
        assert sol.value == np.inf

    def test_size_guard(self):
        big_vars = lp_of(np.ones(9), np.ones((1, 9)), [1.0])
        with pytest.raises(TooLarge):
            lp_vertex_enumerate(big_vars)
        big_rows = lp_of(np.ones(2), np.ones((13, 2)), np.ones(13))
        with pytest.raises(TooLarge):
            lp_vertex_enumerate(big_rows)

    def test_agrees_with_solver_on_random_programs(self):
        rng = np.random.default_rng(1234)
        statuses = set()
        for _ in range(60):
            lp = random_lp(rng)
            slow = lp_vertex_enumerate(lp)
            fast = solve(lp)
            statuses.add(slow.status)
            assert slow.status is fast.status
            if slow.status is LpStatus.OPTIMAL:
                assert abs(slow.value - fast.value) <= 1e-8
        assert LpStatus.OPTIMAL in statuses


class TestGridSearch:
    def test_resolution_validated(self):
        with pytest.raises(TooLarge):
            GridSpec(0)

    def test_guard_on_large_catalogs(self):
        p = np.full((2, 12), 1.0 / 12)
        inst = build_instance(p, (2.0, 2.0))
        with pytest.raises(TooLarge):
            grid_best_sum(inst, GridSpec(4))

    def test_two_users_only(self):
        inst = build_instance(np.full((3, 2), 0.5), (1.0, 1.0, 1.0))
        with pytest.raises(TooLarge):
            grid_best_sum(inst, GridSpec(2))

    def test_matches_cooperative_lp_on_skewed_pair(self):
        inst = preset_instance("two_item_skewed")
        total = cooperative_total(inst)
        best = grid_best_sum(inst, GridSpec(2))
        assert best == pytest.approx(total, abs=1e-9)
        # grid points are feasible placements, so scanning can never exceed the LP
        assert best <= total + 1e-9

    def test_finer_grids_never_lose_ground(self):
        inst = build_instance([[0.8, 0.2], [0.3, 0.7]], (1.0, 1.0))
        coarse = grid_best_sum(inst, GridSpec(1))
        fine = grid_best_sum(inst, GridSpec(2))
        assert fine >= coarse - 1e-12


class TestBitLevelCost:
    def test_alignment_enforced(self):
        pl = TwoUserPlacement(u=[0.3], v=[0.5], w=[0.3])
        outcome = DemandOutcome((frozenset({1}), frozenset({1})))
        with pytest.raises(MisalignedPlacement):
            bit_level_two_user_cost(pl, outcome, 2)

    def test_matches_fractional_model_exactly(self):
        """At chunk resolution the combinatorial count reproduces the closed
        form bit for bit, with zero tolerance."""
        g = 8
        rng = np.random.default_rng(99)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            pl = random_grid_placement(rng, n, g)
            d1 = frozenset({int(rng.integers(1, n + 1))})
            d2 = frozenset({int(rng.integers(1, n + 1))})
            outcome = DemandOutcome((d1, d2))
            got = bit_level_two_user_cost(pl, outcome, g)
            want = outcome_cost(pl, outcome)
            assert got[0] == want[0]
            assert got[1] == want[1]

    def test_counts_one_split_case_by_hand(self):
        # u = (1/2, 0), v = (0, 1/2), no overlap; cross demands with G = 2:
        # each user unicasts the half the other lacks -> one chunk each way.
        pl = TwoUserPlacement(u=[0.5, 0.0], v=[0.0, 0.5], w=[0.0, 0.0])
        outcome = DemandOutcome((frozenset({2}), frozenset({1})))
        c1, c2 = bit_level_two_user_cost(pl, outcome, 2)
        # user 1 wants item 2: one chunk is in user 2's cache (XOR-able), one
        # is nowhere (unicast); symmetric for user 2.
        assert c1 == pytest.approx(0.75)
        assert c2 == pytest.approx(0.75)


class TestRandomGenerators:
    def test_grid_placements_satisfy_invariants(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            res = int(rng.integers(1, 9))
            n = int(rng.integers(1, 5))
            pl = random_grid_placement(rng, n, res)
            assert np.all(pl.w <= np.minimum(pl.u, pl.v) + 1e-12)
            assert np.all(pl.u + pl.v - pl.w <= 1.0 + 1e-12)
            for arr in (pl.u, pl.v, pl.w):
                np.testing.assert_allclose(arr * res, np.round(arr * res), atol=1e-9)

    def test_two_user_instances_construct(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            inst = random_two_user_instance(rng)
            assert inst.num_users == 2
            assert 2 <= inst.num_items <= 6
            np.testing.assert_allclose(inst.preferences.p.sum(axis=1), 1.0, atol=1e-9)

    def test_multiuser_instances_have_chunk_aligned_buffers(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            inst = random_multiuser_instance(rng)
            g = inst.catalog.chunks_per_item
            for cap in inst.buffers.capacities:
                assert abs(cap * g - round(cap * g)) < 1e-12

    def test_random_lp_spans_all_statuses(self):
        rng = np.random.default_rng(8)
        seen = {lp_vertex_enumerate(random_lp(rng)).status for _ in range(150)}
        assert seen == {LpStatus.OPTIMAL, LpStatus.INFEASIBLE, LpStatus.UNBOUNDED}
