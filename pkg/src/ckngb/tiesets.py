"""Minimum tie-set enumeration and structure-function reliability.

A tie-set is an inclusion-minimal set of at least k units whose joint
operation keeps the system balanced; a state is nonfailed exactly when
its operating set contains one (surplus units can be switched off to
rebalance).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import CapacityExceeded, NoTieSets
from .system import BalanceCondition, SystemState, balanced_mask_table


@dataclass(frozen=True)
class TieSet:
    members: tuple[int, ...]  # sorted 1-based unit indices

    @property
    def size(self) -> int:
        return len(self.members)

    def mask(self, n: int) -> int:
        m = 0
        for i in self.members:
            m |= 1 << (n - i)
        return m

    def __str__(self) -> str:
        return ",".join(str(i) for i in self.members)


@dataclass(frozen=True)
class TieSetCollection:
    """All minimum tie-sets of one system, in deterministic order
    (ascending cardinality, then lexicographic member order)."""

    tiesets: tuple[TieSet, ...]
    n: int
    k: int
    bc: BalanceCondition
    masks: tuple[int, ...]  # aligned with tiesets

    def __len__(self) -> int:
        return len(self.tiesets)


@lru_cache(maxsize=128)
def enumerate_min_tiesets(n: int, k: int, bc: BalanceCondition) -> TieSetCollection:
    """Scan subsets by ascending cardinality, pruning supersets of found
    tie-sets, and keep the balanced ones."""
    table = balanced_mask_table(n, bc)
    found: list[TieSet] = []
    found_masks: list[int] = []
    for size in range(k, n + 1):
        for units in combinations(range(1, n + 1), size):
            mask = 0
            for i in units:
                mask |= 1 << (n - i)
            if any((mask & t) == t for t in found_masks):
                continue
            if table[mask]:
                found.append(TieSet(units))
                found_masks.append(mask)
    if not found:
        raise NoTieSets(f"no tie-sets for n={n}, k={k}, bc={bc.value}")
    return TieSetCollection(tuple(found), n, k, bc, tuple(found_masks))


def is_nonfailed(state: SystemState, collection: TieSetCollection) -> bool:
    """True when the operating set contains at least one tie-set."""
    return any((state.mask & t) == t for t in collection.masks)


def structure_function(state: SystemState, collection: TieSetCollection) -> int:
    """1 - prod_T (1 - prod_{i in T} x_i), evaluated in exact integers."""
    prod = 1
    bits = state.bits()
    for tie in collection.tiesets:
        inner = 1
        for i in tie.members:
            inner *= bits[i - 1]
        prod *= 1 - inner
    return 1 - prod


def nonfailed_table(collection: TieSetCollection) -> np.ndarray:
    """Bool array over all 2**n bitmasks: mask contains some tie-set."""
    masks = np.arange(1 << collection.n, dtype=np.int64)
    table = np.zeros(masks.size, dtype=bool)
    for t in collection.masks:
        table |= (masks & t) == t
    return table


def system_reliability_product(collection: TieSetCollection, r: float) -> float:
    """Product-form reliability 1 - prod_T (1 - r^|T|).

    Treats tie-set events as independent; with overlapping tie-sets this
    deviates from the exact expectation (see system_reliability_exact).
    """
    prod = 1.0
    for tie in collection.tiesets:
        prod *= 1.0 - r**tie.size
    return 1.0 - prod


def system_reliability_exact(n: int, collection: TieSetCollection, r: float) -> float:
    """Exact one-shot reliability by full state enumeration (n <= 20)."""
    if n > 20:
        raise CapacityExceeded(f"exact enumeration bounded at n <= 20, got n={n}")
    table = nonfailed_table(collection)
    pops = np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.float64)
    weights = r**pops * (1.0 - r) ** (n - pops)
    return float(weights[table].sum())
