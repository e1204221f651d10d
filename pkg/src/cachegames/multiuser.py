"""Popularity placement and grouped XOR multicast delivery for K users.

Content is handled at chunk resolution.  After demands are revealed, every
chunk someone still needs is classified by (exact requester set U, exact
cacher set V) into Y[U, V].  Delivery walks audience sets from largest to
smallest; inside an audience the users are grouped by identical demand sets,
and one chunk per group is XORed into a coded transmission.  Every user in
the audience cancels the other groups' terms from its own cache, so each
transmission hands every audience member exactly one new chunk.  Whatever
survives the coded rounds is multicast uncoded to its exact requester set.
Message sizes are charged to the audience in equal shares.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, NamedTuple, Tuple

import numpy as np

from .errors import (
    DecodingFailure,
    InvalidInstance,
    NonIntegralChunkBudget,
    SupportTooLarge,
)
from .model import DemandOutcome, Instance

EXACT_SUPPORT_LIMIT = 10**6


class ChunkId(NamedTuple):
    item: int
    chunk: int

    def __str__(self) -> str:
        return f"{self.item}:{self.chunk}"


@dataclass(frozen=True)
class CacheProfile:
    """Chunk sets cached by each user, plus the chunk resolution they live at."""

    caches: tuple
    chunks_per_item: int

    @property
    def num_users(self) -> int:
        return len(self.caches)


class SetSystem:
    """Mutable ground-truth map (requesters U, cachers V) -> chunk set Y[U, V].

    The Y sets partition the needed chunks, so consuming a chunk is an
    unambiguous removal.  Z views are derived unions over cacher supersets.
    """

    def __init__(self):
        self.y: Dict[Tuple[FrozenSet[int], FrozenSet[int]], set] = {}

    def add(self, requesters: FrozenSet[int], cachers: FrozenSet[int], chunk: ChunkId):
        self.y.setdefault((requesters, cachers), set()).add(chunk)

    def z_entries(self, requesters: FrozenSet[int], at_least: FrozenSet[int]) -> List[Tuple[ChunkId, FrozenSet[int]]]:
        """Chunks needed by exactly `requesters` and cached at least by `at_least`,
        widest actual cacher set first, then chunk id."""
        entries = [
            (chunk, cachers)
            for (u, cachers), chunks in self.y.items()
            if u == requesters and at_least <= cachers
            for chunk in chunks
        ]
        entries.sort(key=lambda e: (-len(e[1]), e[0]))
        return entries

    def remove(self, requesters: FrozenSet[int], cachers: FrozenSet[int], chunk: ChunkId):
        bucket = self.y[(requesters, cachers)]
        bucket.remove(chunk)
        if not bucket:
            del self.y[(requesters, cachers)]


@dataclass(frozen=True)
class CodedChunk:
    """XOR of the named chunks; a single term is an uncoded chunk."""

    terms: frozenset

    def __post_init__(self):
        if not self.terms:
            raise InvalidInstance("coded chunk needs at least one term")


@dataclass(frozen=True)
class DeliverySchedule:
    messages: dict
    per_user_cost: np.ndarray


def _popularity_order(row: np.ndarray) -> np.ndarray:
    return np.lexsort((np.arange(row.size), -row))


def popular_placement(inst: Instance) -> CacheProfile:
    """Each user caches its most-requested items; a fractional budget buys a
    chunk prefix of the next item down the order."""
    g = inst.catalog.chunks_per_item
    caches = []
    for k in range(inst.num_users):
        budget_chunks = inst.buffers.capacities[k] * g
        if abs(budget_chunks - round(budget_chunks)) > 1e-9:
            raise NonIntegralChunkBudget(
                f"user {k + 1}: budget {inst.buffers.capacities[k]!r} x {g} chunks is not integral"
            )
        budget_chunks = int(round(budget_chunks))
        order = _popularity_order(inst.preferences.p[k])
        whole, rem = divmod(budget_chunks, g)
        chunks = set()
        for idx in order[:whole]:
            item = int(idx) + 1
            chunks.update(ChunkId(item, c) for c in range(1, g + 1))
        if rem:
            item = int(order[whole]) + 1
            chunks.update(ChunkId(item, c) for c in range(1, rem + 1))
        caches.append(frozenset(chunks))
    return CacheProfile(caches=tuple(caches), chunks_per_item=g)


def build_set_system(profile: CacheProfile, outcome: DemandOutcome) -> SetSystem:
    """Classify every requested-but-not-self-cached chunk by (requesters, cachers)."""
    k_users = profile.num_users
    if outcome.num_users != k_users:
        raise InvalidInstance("outcome and cache profile disagree on user count")
    g = profile.chunks_per_item
    sys_ = SetSystem()
    wanted_items = sorted({n for s in outcome.requested for n in s})
    for item in wanted_items:
        for c in range(1, g + 1):
            chunk = ChunkId(item, c)
            cachers = frozenset(k for k in range(1, k_users + 1) if chunk in profile.caches[k - 1])
            requesters = frozenset(
                k
                for k in range(1, k_users + 1)
                if item in outcome.requested[k - 1] and chunk not in profile.caches[k - 1]
            )
            if requesters:
                sys_.add(requesters, cachers, chunk)
    return sys_


def z_set(sys_: SetSystem, requesters, at_least) -> set:
    """Chunks needed by exactly `requesters` and cached by at least `at_least`."""
    return {chunk for chunk, _ in sys_.z_entries(frozenset(requesters), frozenset(at_least))}


def _subsets_by_size(k_users: int):
    """Audience sets, largest first; within a size, ascending user-index bitmask."""
    for size in range(k_users, 0, -1):
        for mask in range(1, 1 << k_users):
            if bin(mask).count("1") == size:
                yield frozenset(k + 1 for k in range(k_users) if mask >> k & 1)


def deliver(profile: CacheProfile, outcome: DemandOutcome) -> DeliverySchedule:
    """Run the grouped-XOR delivery and account costs in equal audience shares."""
    k_users = profile.num_users
    g = profile.chunks_per_item
    sys_ = build_set_system(profile, outcome)
    messages: Dict[FrozenSet[int], List[CodedChunk]] = {}
    for audience in _subsets_by_size(k_users):
        by_demand: Dict[frozenset, List[int]] = {}
        for k in sorted(audience):
            by_demand.setdefault(outcome.requested[k - 1], []).append(k)
        groups = sorted(by_demand.values(), key=lambda users: users[0])
        picks = []
        for users in groups:
            requesters = frozenset(users)
            picks.append(sys_.z_entries(requesters, audience - requesters))
        take = min(len(p) for p in picks)
        if take == 0:
            continue
        coded = []
        for t in range(take):
            coded.append(CodedChunk(frozenset(picks[j][t][0] for j in range(len(groups)))))
        for j, users in enumerate(groups):
            requesters = frozenset(users)
            for t in range(take):
                chunk, cachers = picks[j][t]
                sys_.remove(requesters, cachers, chunk)
        messages.setdefault(audience, []).extend(coded)
    # anything left cannot ride an XOR: multicast it plain to its requesters
    for audience in _subsets_by_size(k_users):
        leftovers = sys_.z_entries(audience, frozenset())
        if not leftovers:
            continue
        messages.setdefault(audience, []).extend(
            CodedChunk(frozenset((chunk,))) for chunk, _ in leftovers
        )
        for chunk, cachers in leftovers:
            sys_.remove(audience, cachers, chunk)
    cost = np.zeros(k_users)
    for audience, msgs in messages.items():
        share = len(msgs) / (len(audience) * g)
        for k in audience:
            cost[k - 1] += share
    return DeliverySchedule(messages=messages, per_user_cost=cost)


def decode(profile: CacheProfile, schedule: DeliverySchedule, outcome: DemandOutcome, user: int) -> set:
    """Replay the schedule from one user's seat and return what it recovers.

    The user starts from its cache, listens to every message addressed to an
    audience containing it, and resolves any transmission with exactly one
    unknown term, iterating to a fixpoint.  Failing to recover the full
    requested-but-uncached set means the schedule is broken.
    """
    g = profile.chunks_per_item
    cache = set(profile.caches[user - 1])
    wanted = {
        ChunkId(item, c)
        for item in outcome.requested[user - 1]
        for c in range(1, g + 1)
    }
    needed = wanted - cache
    audible = [
        coded
        for audience, msgs in schedule.messages.items()
        if user in audience
        for coded in msgs
    ]
    known = set(cache)
    progress = True
    while progress:
        progress = False
        for coded in audible:
            unknown = [t for t in coded.terms if t not in known]
            if len(unknown) == 1:
                known.add(unknown[0])
                progress = True
    recovered = (known - cache) & wanted
    if recovered != needed:
        missing = sorted(needed - recovered)
        raise DecodingFailure(f"user {user} cannot recover chunks {missing}")
    return recovered


@dataclass(frozen=True)
class ThroughputEstimate:
    values: np.ndarray
    stderr: np.ndarray | None = None


def expected_throughput_multiuser(
    inst: Instance,
    mode: str = "exact",
    samples: int = 1000,
    seed: int = 0,
) -> ThroughputEstimate:
    """Per-user expected throughput of the popularity placement plus grouped delivery.

    Exact mode sums the demand support; Monte Carlo draws seeded outcomes and
    reports the standard error alongside the estimate.
    """
    profile = popular_placement(inst)
    gross = inst.preferences.p.sum(axis=1)
    support = inst.demands.support
    if mode == "exact":
        if len(support) > EXACT_SUPPORT_LIMIT:
            raise SupportTooLarge(f"support has {len(support)} outcomes")
        cost = np.zeros(inst.num_users)
        for outcome, q in support:
            cost += q * deliver(profile, outcome).per_user_cost
        return ThroughputEstimate(values=gross - cost)
    if mode in ("mc", "montecarlo"):
        if samples < 1:
            raise InvalidInstance("need at least one sample")
        gen = np.random.default_rng(seed)
        probs = np.array([q for _, q in support])
        probs = probs / probs.sum()
        idx = gen.choice(len(support), size=samples, p=probs)
        cost_cache: Dict[int, np.ndarray] = {}
        draws = np.empty((samples, inst.num_users))
        for row, i in enumerate(idx):
            i = int(i)
            if i not in cost_cache:
                cost_cache[i] = deliver(profile, support[i][0]).per_user_cost
            draws[row] = cost_cache[i]
        mean = draws.mean(axis=0)
        stderr = draws.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 else np.zeros(inst.num_users)
        return ThroughputEstimate(values=gross - mean, stderr=stderr)
    raise InvalidInstance(f"unknown mode {mode!r}")
