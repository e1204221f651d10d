"""Best responses, equilibrium search, verification, and the surplus split."""

import numpy as np
import pytest

from cachegames.errors import InvalidInstance, InvalidPlacement
from cachegames.games import (
    NASH_BASED,
    PURE_CACHING_BASED,
    NashResult,
    allocate,
    allocation_from,
    best_response,
    cooperative_total,
    find_psne,
    verify_psne,
)
from cachegames.model import beta_mixture_matrix, build_instance, pure_caching_throughput
from cachegames.oracle import random_two_user_instance
from cachegames.twouser import ThroughputPoint, TwoUserPlacement, expected_throughput


def two_item_instance(b1=1.0, b2=1.0):
    return build_instance([[0.99, 0.01], [0.5, 0.5]], (b1, b2))


def beta_instance(beta):
    return build_instance(beta_mixture_matrix(beta), (2.0, 2.0))


class TestBestResponse:
    def test_reply_beats_fixed_alternatives(self):
        """The reply optimizes over (cache, overlap), so it dominates any
        feasible alternative pair evaluated directly."""
        inst = two_item_instance()
        fixed = np.array([0.7, 0.3])
        reply = best_response(inst, 1, fixed)
        for v in (np.array([1.0, 0.0]), np.array([0.5, 0.5]), np.array([0.0, 1.0])):
            for w in (np.maximum(0.0, fixed + v - 1.0), np.minimum(fixed, v)):
                pt = expected_throughput(inst, TwoUserPlacement(u=fixed, v=v, w=w))
                assert reply.payoff >= pt.r2 - 1e-9

    def test_reply_respects_budget(self):
        inst = two_item_instance(b2=0.75)
        reply = best_response(inst, 1, np.array([1.0, 0.0]))
        assert reply.cache.sum() <= 0.75 + 1e-9

    def test_fixed_vector_validated(self):
        inst = two_item_instance()
        with pytest.raises(InvalidPlacement):
            best_response(inst, 1, np.array([1.0, 1.0]))  # exceeds budget 1
        with pytest.raises(InvalidPlacement):
            best_response(inst, 1, np.array([1.2, -0.1]))
        with pytest.raises(InvalidPlacement):
            best_response(inst, 1, np.array([1.0]))
        with pytest.raises(InvalidInstance):
            best_response(inst, 3, np.array([1.0, 0.0]))


class TestFindPsne:
    def test_two_item_equilibrium(self):
        inst = two_item_instance()
        res = find_psne(inst, rng=np.random.default_rng(0))
        assert res.converged
        assert res.payoffs.r1 == pytest.approx(0.9925, abs=1e-6)
        assert res.payoffs.r2 == pytest.approx(0.5025, abs=1e-6)
        assert verify_psne(inst, res.placement)

    def test_deterministic_given_seed(self):
        inst = two_item_instance()
        a = find_psne(inst, rng=np.random.default_rng(11))
        b = find_psne(inst, rng=np.random.default_rng(11))
        assert a.iterations == b.iterations
        np.testing.assert_array_equal(a.placement.u, b.placement.u)
        np.testing.assert_array_equal(a.placement.v, b.placement.v)

    def test_symmetric_instance_has_symmetric_payoffs(self):
        inst = beta_instance(0.0)
        res = find_psne(inst, rng=np.random.default_rng(3))
        assert res.converged
        assert res.payoffs.r1 == pytest.approx(res.payoffs.r2, abs=1e-6)

    def test_swapped_instance_swaps_payoffs(self):
        p = [[0.8, 0.15, 0.05], [0.2, 0.3, 0.5]]
        inst = build_instance(p, (1.0, 2.0))
        swapped = build_instance([p[1], p[0]], (2.0, 1.0))
        res = find_psne(inst, rng=np.random.default_rng(5))
        res_swap = find_psne(swapped, rng=np.random.default_rng(5))
        if res.converged and res_swap.converged:
            assert res.payoffs.r1 == pytest.approx(res_swap.payoffs.r2, abs=1e-6)
            assert res.payoffs.r2 == pytest.approx(res_swap.payoffs.r1, abs=1e-6)

    def test_multiuser_instance_rejected(self):
        inst = build_instance([[1.0], [1.0], [1.0]], (1.0, 1.0, 1.0))
        with pytest.raises(InvalidInstance):
            find_psne(inst)

    def test_parameter_validation(self):
        inst = two_item_instance()
        with pytest.raises(InvalidInstance):
            find_psne(inst, max_iters=0)
        with pytest.raises(InvalidInstance):
            find_psne(inst, eps=0.0)


class TestVerifyPsne:
    def test_rejects_dominated_placement(self):
        inst = two_item_instance()
        empty = TwoUserPlacement(u=np.zeros(2), v=np.zeros(2), w=np.zeros(2))
        assert not verify_psne(inst, empty)

    def test_accepts_converged_runs(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            inst = random_two_user_instance(rng)
            res = find_psne(inst, rng=rng)
            if res.converged:
                assert verify_psne(inst, res.placement, tol=1e-6)


class TestCooperativeSide:
    def test_two_item_totals(self):
        assert cooperative_total(two_item_instance()) == pytest.approx(1.5, abs=1e-9)
        inst0 = build_instance([[0.99, 0.01], [0.5, 0.5]], (0.0, 0.0))
        assert cooperative_total(inst0) == pytest.approx(0.5, abs=1e-9)

    def test_converged_sum_below_total(self):
        rng = np.random.default_rng(314)
        for _ in range(20):
            inst = random_two_user_instance(rng)
            res = find_psne(inst, rng=rng)
            if res.converged:
                total = cooperative_total(inst)
                assert res.payoffs.r1 + res.payoffs.r2 <= total + 1e-6

    def test_allocation_squeezes_total_exactly(self):
        inst = two_item_instance()
        alloc = allocate(inst, rng=np.random.default_rng(0))
        assert alloc.r1c + alloc.r2c == pytest.approx(alloc.total, abs=1e-9)
        assert alloc.basis == NASH_BASED

    def test_allocation_dominates_baselines(self):
        inst = beta_instance(0.5)
        res = find_psne(inst, rng=np.random.default_rng(1))
        alloc = allocation_from(inst, res)
        assert res.converged
        assert alloc.r1c >= res.payoffs.r1 - 1e-9
        assert alloc.r2c >= res.payoffs.r2 - 1e-9
        assert alloc.r1c > alloc.r2c  # concentrated preference dominates

    def test_fallback_baselines_without_equilibrium(self):
        inst = two_item_instance()
        stub = NashResult(
            placement=TwoUserPlacement(u=np.zeros(2), v=np.zeros(2), w=np.zeros(2)),
            payoffs=ThroughputPoint(0.25, 0.25),
            converged=False,
            iterations=100,
        )
        alloc = allocation_from(inst, stub)
        assert alloc.basis == PURE_CACHING_BASED
        base1 = pure_caching_throughput([0.99, 0.01], 1.0)
        base2 = pure_caching_throughput([0.5, 0.5], 1.0)
        half = (alloc.total - base1 - base2) / 2
        assert alloc.r1c == pytest.approx(base1 + half, abs=1e-12)
        assert alloc.r2c == pytest.approx(base2 + half, abs=1e-12)
