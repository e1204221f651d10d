"""Problem instances: catalog, buffers, preferences, demand distributions.

An instance bundles everything the engines need: how many items exist and at
what chunk resolution, how much each user can cache, how likely each user is
to request each item, and an explicit finite distribution over joint demand
outcomes.  Expectations are always taken over the explicit support; the
preference matrix alone never drives them.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BetaOutOfRange,
    CapacityOutOfRange,
    InvalidInstance,
    RowNotStochastic,
)

MARGINAL_TOL = 1e-9
PROB_SUM_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CatalogSpec:
    """N content items, each split into G equal chunks."""

    num_items: int
    chunks_per_item: int = 1

    def __post_init__(self):
        if self.num_items < 1:
            raise InvalidInstance(f"need at least one item, got {self.num_items}")
        if self.chunks_per_item < 1:
            raise InvalidInstance(f"need at least one chunk per item, got {self.chunks_per_item}")


@dataclass(frozen=True)
class BufferSpec:
    """Per-user cache capacities, in units of whole items."""

    capacities: tuple

    def __post_init__(self):
        caps = tuple(float(b) for b in self.capacities)
        if len(caps) < 1:
            raise InvalidInstance("need at least one user")
        if any(b < 0 for b in caps):
            raise InvalidInstance(f"negative capacity in {caps}")
        object.__setattr__(self, "capacities", caps)

    @property
    def num_users(self) -> int:
        return len(self.capacities)

    def clamped(self, num_items: int) -> "BufferSpec":
        """Capacities above N buy nothing; clamp them to N."""
        return BufferSpec(tuple(min(b, float(num_items)) for b in self.capacities))


@dataclass(frozen=True)
class PreferenceMatrix:
    """K x N matrix of request probabilities; rows need not sum to 1."""

    p: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if p.ndim != 2:
            raise InvalidInstance("preference matrix must be 2-D")
        if np.any(p < -1e-15) or np.any(p > 1 + 1e-15):
            raise InvalidInstance("preference entries must lie in [0, 1]")
        object.__setattr__(self, "p", _freeze(np.clip(p, 0.0, 1.0)))

    @property
    def num_users(self) -> int:
        return self.p.shape[0]

    @property
    def num_items(self) -> int:
        return self.p.shape[1]

    def row(self, user: int) -> np.ndarray:
        """Row for a 1-indexed user."""
        return self.p[user - 1]


@dataclass(frozen=True)
class DemandOutcome:
    """One joint demand realization: the set of items each user requests."""

    requested: tuple

    def __post_init__(self):
        sets = tuple(frozenset(int(n) for n in s) for s in self.requested)
        if any(n < 1 for s in sets for n in s):
            raise InvalidInstance("item indices are 1-based")
        object.__setattr__(self, "requested", sets)

    @property
    def num_users(self) -> int:
        return len(self.requested)

    def max_item(self) -> int:
        return max((n for s in self.requested for n in s), default=1)


@dataclass(frozen=True)
class DemandDistribution:
    """Explicit probability measure over demand outcomes."""

    support: tuple

    def __post_init__(self):
        pairs = tuple((o, float(q)) for o, q in self.support)
        if not pairs:
            raise InvalidInstance("empty demand support")
        if any(q < -PROB_SUM_TOL for _, q in pairs):
            raise InvalidInstance("negative outcome probability")
        total = math.fsum(q for _, q in pairs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InvalidInstance(f"outcome probabilities sum to {total!r}, not 1")
        seen = set()
        for o, _ in pairs:
            if o.requested in seen:
                raise InvalidInstance("duplicate outcome in support")
            seen.add(o.requested)
        ks = {o.num_users for o, _ in pairs}
        if len(ks) != 1:
            raise InvalidInstance("outcomes disagree on the number of users")
        object.__setattr__(self, "support", pairs)

    @property
    def num_users(self) -> int:
        return self.support[0][0].num_users

    def marginals(self, num_items: int) -> np.ndarray:
        """K x N matrix of P[item n in user k's request set]."""
        k_users = self.num_users
        m = np.zeros((k_users, num_items))
        for outcome, q in self.support:
            for k, s in enumerate(outcome.requested):
                for n in s:
                    m[k, n - 1] += q
        return m


@dataclass(frozen=True)
class Instance:
    """A complete caching problem; validated and immutable."""

    catalog: CatalogSpec
    buffers: BufferSpec
    preferences: PreferenceMatrix
    demands: DemandDistribution

    def __post_init__(self):
        n = self.catalog.num_items
        object.__setattr__(self, "buffers", self.buffers.clamped(n))
        if self.preferences.num_items != n:
            raise InvalidInstance("preference matrix width disagrees with catalog")
        k = self.preferences.num_users
        if self.buffers.num_users != k:
            raise InvalidInstance("buffer count disagrees with preference rows")
        if self.demands.num_users != k:
            raise InvalidInstance("demand outcomes disagree with preference rows")
        for outcome, _ in self.demands.support:
            if outcome.max_item() > n:
                raise InvalidInstance("demand outcome references an item outside the catalog")
        gap = np.abs(self.demands.marginals(n) - self.preferences.p).max()
        if gap > MARGINAL_TOL:
            raise InvalidInstance(
                f"demand marginals deviate from preferences by {gap:.3e} (tol {MARGINAL_TOL:.0e})"
            )

    @property
    def num_users(self) -> int:
        return self.preferences.num_users

    @property
    def num_items(self) -> int:
        return self.catalog.num_items


def independent_single_demand(p: PreferenceMatrix) -> DemandDistribution:
    """Product measure where every user requests exactly one item.

    Requires each preference row to be a probability vector.  The support is
    the full Cartesian product of per-user choices (N^K outcomes), minus any
    combination whose probability is exactly zero.
    """
    rows = p.p
    sums = rows.sum(axis=1)
    bad = np.abs(sums - 1.0) > MARGINAL_TOL
    if np.any(bad):
        k = int(np.argmax(bad))
        raise RowNotStochastic(f"row {k + 1} sums to {sums[k]!r}, expected 1")
    n = p.num_items
    outcomes = []
    probs = []
    for combo in itertools.product(range(1, n + 1), repeat=p.num_users):
        q = 1.0
        for k, item in enumerate(combo):
            q *= rows[k, item - 1]
        if q > 0.0:
            outcomes.append(DemandOutcome(tuple(frozenset((item,)) for item in combo)))
            probs.append(q)
    total = math.fsum(probs)
    return DemandDistribution(tuple((o, q / total) for o, q in zip(outcomes, probs)))


def zipf_row(n_items: int, exponent: float) -> np.ndarray:
    """Zipf popularity profile: entry n proportional to n^-exponent."""
    if n_items < 1:
        raise InvalidInstance("need at least one item")
    if exponent < 0:
        raise InvalidInstance("negative Zipf exponent")
    raw = np.arange(1, n_items + 1, dtype=float) ** (-float(exponent))
    return raw / raw.sum()


def uniform_row(n_items: int) -> np.ndarray:
    return np.full(n_items, 1.0 / n_items)


def beta_mixture_matrix(beta: float) -> PreferenceMatrix:
    """Two users over four items: row 1 tilts toward item 1 as beta grows.

    Row 1 is the convex combination beta * [1,0,0,0] + (1-beta) * uniform;
    row 2 stays uniform.
    """
    if not 0.0 <= beta <= 1.0:
        raise BetaOutOfRange(f"beta must lie in [0, 1], got {beta!r}")
    row1 = beta * np.array([1.0, 0.0, 0.0, 0.0]) + (1.0 - beta) * uniform_row(4)
    return PreferenceMatrix(np.vstack([row1, uniform_row(4)]))


def pure_caching_throughput(p_row: Sequence[float], capacity: float) -> float:
    """Probability mass captured by greedily caching the most popular items.

    Whole items are cached down the sorted popularity order; a fractional
    budget remainder buys the matching fraction of the next item.  Ties are
    broken toward the lower item index, which cannot change the value.
    """
    row = np.asarray(p_row, dtype=float)
    n = row.size
    if not 0.0 <= capacity <= n + 1e-12:
        raise CapacityOutOfRange(f"capacity {capacity!r} outside [0, {n}]")
    capacity = min(float(capacity), float(n))
    order = np.lexsort((np.arange(n), -row))
    whole = int(np.floor(capacity + 1e-12))
    frac = capacity - whole
    if frac < 1e-12:
        frac = 0.0
    value = math.fsum(row[order[:whole]])
    if frac > 0.0 and whole < n:
        value += frac * float(row[order[whole]])
    return value


def build_instance(
    preferences,
    buffers,
    chunks_per_item: int = 1,
    demands: DemandDistribution | None = None,
) -> Instance:
    """Convenience constructor; defaults to the independent single-request model."""
    pref = preferences if isinstance(preferences, PreferenceMatrix) else PreferenceMatrix(preferences)
    if demands is None:
        demands = independent_single_demand(pref)
    return Instance(
        catalog=CatalogSpec(pref.num_items, chunks_per_item),
        buffers=BufferSpec(tuple(buffers)),
        preferences=pref,
        demands=demands,
    )


# --- JSON interchange -----------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    support = [
        {"sets": [sorted(s) for s in outcome.requested], "prob": q}
        for outcome, q in inst.demands.support
    ]
    return {
        "num_items": inst.catalog.num_items,
        "chunks_per_item": inst.catalog.chunks_per_item,
        "buffers": list(inst.buffers.capacities),
        "preferences": inst.preferences.p.tolist(),
        "demand_model": {"explicit": support},
    }


def instance_from_dict(d: dict) -> Instance:
    try:
        pref = PreferenceMatrix(np.asarray(d["preferences"], dtype=float))
        catalog = CatalogSpec(int(d["num_items"]), int(d.get("chunks_per_item", 1)))
        buffers = BufferSpec(tuple(float(b) for b in d["buffers"]))
        model = d.get("demand_model", "independent_single")
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInstance(f"malformed instance document: {exc}") from exc
    if model == "independent_single":
        demands = independent_single_demand(pref)
    elif isinstance(model, dict) and "explicit" in model:
        support = []
        for entry in model["explicit"]:
            outcome = DemandOutcome(tuple(frozenset(int(n) for n in s) for s in entry["sets"]))
            support.append((outcome, float(entry["prob"])))
        demands = DemandDistribution(tuple(support))
    else:
        raise InvalidInstance(f"unknown demand_model {model!r}")
    return Instance(catalog=catalog, buffers=buffers, preferences=pref, demands=demands)


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInstance(f"instance file is not valid JSON: {exc}") from exc
    return instance_from_dict(doc)
