"""Shock count to system failure as a discrete phase-type distribution.

The pmf is available through two independent routes: the matrix form
(initial vector times powers of the subtransition matrix) and a direct
summation over nonfailed states that needs no matrix powers at all.  The
two must agree to floating-point accuracy, which the validation suite
exercises aggressively.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_triangular
from scipy.sparse.linalg import spsolve_triangular

from .chain import ConsolidatedChain, build_consolidated
from .errors import NonConvergence, SingularSystem
from .system import SystemConfig

_SERIES_BLOCK = 256
_SERIES_CAP = 10**7


@dataclass(frozen=True, eq=False)
class DiscretePhaseType:
    """Initial distribution plus the consolidated subtransition matrix."""

    alpha: np.ndarray
    chain: ConsolidatedChain

    @property
    def transition(self) -> np.ndarray | sp.csr_matrix:
        return self.chain.transition

    @property
    def absorb(self) -> np.ndarray:
        return self.chain.absorb

    @property
    def size(self) -> int:
        return self.chain.size


def sntf_distribution(config: SystemConfig) -> DiscretePhaseType:
    """Shock-count law of the system started in the all-ones state."""
    chain = build_consolidated(config.n, config.k, config.bc, config.r)
    alpha = np.zeros(chain.size)
    alpha[0] = 1.0
    return DiscretePhaseType(alpha, chain)


def pmf_matrix(dist: DiscretePhaseType, m: int) -> float:
    """P{M = m} via alpha P^(m-1) (e - P e)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    v = dist.alpha.copy()
    for _ in range(m - 1):
        v = v @ dist.transition
    return float(v @ dist.absorb)


def survival(dist: DiscretePhaseType, m: int) -> float:
    """P{M > m} = alpha P^m e."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    v = dist.alpha.copy()
    for _ in range(m):
        v = v @ dist.transition
    return float(v.sum())


def pmf_survival_series(dist: DiscretePhaseType, m_max: int) -> tuple[np.ndarray, np.ndarray]:
    """pmf and survival for m = 1..m_max in a single sweep."""
    pmf = np.empty(m_max)
    surv = np.empty(m_max)
    v = dist.alpha.copy()
    for m in range(1, m_max + 1):
        pmf[m - 1] = v @ dist.absorb
        v = v @ dist.transition
        surv[m - 1] = v.sum()
    return pmf, surv


def _start_counts(config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    chain = build_consolidated(config.n, config.k, config.bc, config.r)
    ones = chain.n_operating.astype(np.float64)
    return ones, config.n - ones


def survival_direct(config: SystemConfig, m: int) -> float:
    """P{M > m} summed state by state, without any matrix."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    ones, zeros = _start_counts(config)
    rm = config.r**m
    return float((rm**ones * (1.0 - rm) ** zeros).sum())


def pmf_direct(config: SystemConfig, m: int) -> float:
    """P{M = m} by direct summation over nonfailed states.

    Each state contributes its (m-1)-step reach probability minus its
    m-step one; with 0**0 = 1 the m = 1 term reduces to one minus the
    single-shock survival.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    ones, zeros = _start_counts(config)
    prev = config.r ** (m - 1)
    curr = config.r**m
    terms = prev**ones * (1.0 - prev) ** zeros - curr**ones * (1.0 - curr) ** zeros
    return float(terms.sum())


def _solve_upper(chain: ConsolidatedChain, rhs: np.ndarray) -> np.ndarray:
    """Back-substitution against (I - P); P is upper triangular."""
    N = chain.size
    try:
        if chain.is_dense:
            A = np.eye(N) - chain.transition
            return solve_triangular(A, rhs, lower=False)
        A = (sp.eye(N, format="csr") - chain.transition).tocsr()
        return spsolve_triangular(A, rhs, lower=False)
    except Exception as exc:  # singular or badly scaled system
        raise SingularSystem(str(exc)) from exc


def mean_closed(dist: DiscretePhaseType) -> float:
    """Mean shock count alpha (I - P)^(-1) e via one triangular solve."""
    x = _solve_upper(dist.chain, np.ones(dist.size))
    return float(dist.alpha @ x)


def factorial_moment(dist: DiscretePhaseType, p: int) -> float:
    """E[M(M-1)...(M-p+1)] = p! alpha (I-P)^(-p) P^(p-1) e."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    w = np.ones(dist.size)
    for _ in range(p - 1):
        w = dist.transition @ w
    for _ in range(p):
        w = _solve_upper(dist.chain, w)
    return float(factorial(p) * (dist.alpha @ w))


def raw_moment_series(config: SystemConfig, p: int, tol: float = 1e-12) -> float:
    """E[M^p] by truncated summation of the direct pmf.

    The cut uses a geometric tail bound with ratio rho = max row sum of
    the subtransition matrix; summation stops once the bound drops below
    tol (absolute).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    chain = build_consolidated(config.n, config.k, config.bc, config.r)
    ones = chain.n_operating.astype(np.float64)
    zeros = config.n - ones
    rho = float(1.0 - chain.absorb.min())
    tail_shift = rho / (1.0 - rho)

    total = 0.0
    prev_surv = 1.0  # P{M > 0}
    m0 = 1
    while True:
        ms = np.arange(m0, m0 + _SERIES_BLOCK, dtype=np.float64)
        rm = config.r ** ms[:, None]
        surv = (rm ** ones[None, :] * (1.0 - rm) ** zeros[None, :]).sum(axis=1)
        pmf = np.concatenate(([prev_surv], surv[:-1])) - surv
        total += float((ms**p * pmf).sum())
        prev_surv = float(surv[-1])
        m_last = m0 + _SERIES_BLOCK - 1
        bound = prev_surv / (1.0 - rho) * (m_last + tail_shift) ** p
        if bound < tol:
            return total
        m0 += _SERIES_BLOCK
        if m0 > _SERIES_CAP:
            raise NonConvergence(
                f"moment series still above tol={tol} after {_SERIES_CAP} terms"
            )
