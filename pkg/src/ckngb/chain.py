"""Absorbing shock chain over the nonfailed states.

All failed states are consolidated into a single absorbing state, so the
chain keeps one row per nonfailed state plus an absorption column.  In
canonical order (ascending state index, all-ones first) the subtransition
matrix is upper triangular because failed units never revive; solves
against it are exact back-substitutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import CapacityExceeded
from .system import BalanceCondition, SystemState
from .tiesets import enumerate_min_tiesets, nonfailed_table

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class TransitionCounts:
    """Per-unit pair tallies between two states: (1,1), (1,0), (0,1), (0,0)."""

    c1: int
    c2: int
    c3: int
    c4: int


def transition_counts(xa: SystemState, xb: SystemState) -> TransitionCounts:
    if xa.n != xb.n:
        raise ValueError("states must share the unit count")
    c1 = (xa.mask & xb.mask).bit_count()
    c2 = (xa.mask & ~xb.mask).bit_count()
    c3 = (~xa.mask & xb.mask & ((1 << xa.n) - 1)).bit_count()
    return TransitionCounts(c1, c2, c3, xa.n - c1 - c2 - c3)


def one_step_prob(xa: SystemState, xb: SystemState, r: float) -> float:
    """Probability that one shock turns state xa into state xb."""
    return mstep_prob(xa, xb, 1, r)


def mstep_prob(xa: SystemState, xb: SystemState, m: int, r: float) -> float:
    """m-step transition probability (r^m)^c1 (1-r^m)^c2, zero if any
    failed unit would have to revive."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    c = transition_counts(xa, xb)
    if c.c3 > 0:
        return 0.0
    rm = r**m
    return rm**c.c1 * (1.0 - rm) ** c.c2


@lru_cache(maxsize=128)
def _nonfailed_masks(n: int, k: int, bc: BalanceCondition) -> np.ndarray:
    collection = enumerate_min_tiesets(n, k, bc)
    table = nonfailed_table(collection)
    masks = np.nonzero(table)[0].astype(np.int64)
    masks = masks[::-1].copy()  # descending mask == ascending canonical index
    masks.flags.writeable = False
    return masks


def nonfailed_states(n: int, k: int, bc: BalanceCondition) -> tuple[SystemState, ...]:
    """All nonfailed states in ascending canonical index order; the
    all-ones state comes first."""
    return tuple(SystemState(int(m), n) for m in _nonfailed_masks(n, k, bc))


@dataclass(frozen=True, eq=False)
class ConsolidatedChain:
    """One-step law of the shock process restricted to nonfailed states.

    ``transition`` is row-substochastic and upper triangular; ``absorb``
    holds the per-row probability of jumping to the consolidated failed
    state.  ``n_operating`` caches the per-state operating-unit counts,
    which double as the pair counts against the all-ones start state.
    """

    states: tuple[SystemState, ...]
    masks: np.ndarray
    transition: np.ndarray | sp.csr_matrix
    absorb: np.ndarray
    n: int
    k: int
    bc: BalanceCondition
    r: float
    n_operating: np.ndarray

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def is_dense(self) -> bool:
        return isinstance(self.transition, np.ndarray)

    def dense_transition(self) -> np.ndarray:
        if self.is_dense:
            return self.transition
        return self.transition.toarray()

    def full_matrix(self) -> np.ndarray:
        """Stochastic (N+1)x(N+1) matrix with the absorbing state appended."""
        N = self.size
        out = np.zeros((N + 1, N + 1))
        out[:N, :N] = self.dense_transition()
        out[:N, N] = self.absorb
        out[N, N] = 1.0
        return out


def _transition_rows(
    masks: np.ndarray, pops: np.ndarray, r: float, row_start: int, row_stop: int
) -> np.ndarray:
    """Dense block of transition probabilities for rows [row_start, row_stop)."""
    rt = 1.0 - r
    sub = (masks[row_start:row_stop, None] & masks[None, :]) == masks[None, :]
    c1 = pops[None, :].astype(np.float64)
    c2 = (pops[row_start:row_stop, None] - pops[None, :]).astype(np.float64)
    vals = r**c1 * rt ** np.maximum(c2, 0.0)
    return np.where(sub, vals, 0.0)


@lru_cache(maxsize=6)
def build_consolidated(
    n: int, k: int, bc: BalanceCondition, r: float, dense_limit: int = DENSE_LIMIT
) -> ConsolidatedChain:
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie strictly inside (0, 1), got {r}")
    masks = _nonfailed_masks(n, k, bc)
    N = masks.size
    pops = np.bitwise_count(masks).astype(np.int64)
    chunk = max(1, (1 << 22) // max(N, 1))

    if N <= dense_limit:
        P: np.ndarray | sp.csr_matrix = np.zeros((N, N))
        for i0 in range(0, N, chunk):
            i1 = min(N, i0 + chunk)
            P[i0:i1] = _transition_rows(masks, pops, r, i0, i1)
        row_sums = P.sum(axis=1)
    else:
        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        data: list[np.ndarray] = []
        for i0 in range(0, N, chunk):
            i1 = min(N, i0 + chunk)
            block = _transition_rows(masks, pops, r, i0, i1)
            rr, cc = np.nonzero(block)
            rows.append(rr + i0)
            cols.append(cc)
            data.append(block[rr, cc])
        P = sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(N, N),
        )
        row_sums = np.asarray(P.sum(axis=1)).ravel()

    # the solves rely on back-substitution, so triangularity is load-bearing
    if isinstance(P, np.ndarray):
        assert not np.tril(P, -1).any(), "subtransition matrix must be upper triangular"
    else:
        coo = P.tocoo()
        assert (coo.col >= coo.row).all(), "subtransition matrix must be upper triangular"

    absorb = 1.0 - row_sums
    states = tuple(SystemState(int(m), n) for m in masks)
    return ConsolidatedChain(states, masks, P, absorb, n, k, bc, r, pops)


def full_transition_matrix(n: int, r: float) -> np.ndarray:
    """One-step matrix over all 2**n states in canonical index order.

    Oracle-only: the quadratic blowup restricts it to n <= 8.
    """
    if n > 8:
        raise CapacityExceeded(f"full chain oracle bounded at n <= 8, got n={n}")
    masks = np.arange((1 << n) - 1, -1, -1, dtype=np.int64)
    pops = np.bitwise_count(masks).astype(np.int64)
    return _transition_rows(masks, pops, r, 0, masks.size)


def chain_csv(chain: ConsolidatedChain) -> str:
    """Debug dump of the full partitioned matrix with state headers."""
    labels = [str(s) for s in chain.states] + ["absorbed"]
    full = chain.full_matrix()
    lines = ["state," + ",".join(labels)]
    for label, row in zip(labels, full):
        lines.append(label + "," + ",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"
