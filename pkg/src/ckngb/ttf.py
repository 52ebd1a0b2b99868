"""Continuous time to system failure via phase-type algebra.

Inter-shock times are phase-type distributed (three unit-mean presets
plus custom specs).  The failure time is the random sum of one
inter-shock draw per shock, which is again phase-type: its subgenerator
combines the inter-shock generator on the diagonal blocks with shock
transitions routed through the exit rates.  The matrix exponential is
never formed; its action on a vector is computed by uniformization, and
moments come from block back-substitution against the (block upper
triangular) subgenerator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CapacityExceeded, ConfigError, NonConvergence, SingularSystem
from .sntf import DiscretePhaseType, sntf_distribution
from .system import SystemConfig

PRESET_LABELS = ("ER", "EXP", "HE")

_DENSE_CAP = 4096
_MAX_COMPOUND_DIM = 1 << 20
_POISSON_TAIL = 1e-14
_STEP_BUDGET = 50.0  # max uniformization rate*length handled per stride
_TERM_CAP = 100_000


@dataclass(frozen=True, eq=False)
class ContinuousPhaseType:
    """Initial phase distribution and subgenerator of an absorbing CTMC."""

    alpha: np.ndarray
    T: np.ndarray

    @property
    def K(self) -> int:
        return self.alpha.size

    @property
    def exit_rates(self) -> np.ndarray:
        return -self.T @ np.ones(self.K)


def validate_ph(alpha: np.ndarray, T: np.ndarray) -> ContinuousPhaseType:
    """Reject malformed phase-type parameters instead of normalizing them."""
    alpha = np.asarray(alpha, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if alpha.ndim != 1 or T.ndim != 2 or T.shape != (alpha.size, alpha.size):
        raise ConfigError("shock: alpha must be a vector and T a matching square matrix")
    if np.any(alpha < 0.0):
        raise ConfigError("shock.alpha: entries must be nonnegative")
    if abs(alpha.sum() - 1.0) > 1e-12:
        raise ConfigError("shock.alpha: must sum to 1")
    if np.any(np.diag(T) >= 0.0):
        raise ConfigError("shock.T: diagonal must be strictly negative")
    off = T - np.diag(np.diag(T))
    if np.any(off < 0.0):
        raise ConfigError("shock.T: off-diagonal rates must be nonnegative")
    exit_rates = -T @ np.ones(alpha.size)
    if np.any(exit_rates < -1e-12):
        raise ConfigError("shock.T: row sums must be nonpositive")
    if not np.any(exit_rates > 1e-12):
        raise ConfigError("shock.T: at least one phase must be able to exit")
    return ContinuousPhaseType(alpha, T)


def ph_from_preset(label: str) -> ContinuousPhaseType:
    """Unit-mean presets: Erlang-2 (ER), exponential (EXP), balanced
    two-phase hyperexponential (HE), with SCV 0.5, 1 and 2."""
    label = str(label).upper()
    if label == "ER":
        return ContinuousPhaseType(
            np.array([1.0, 0.0]), np.array([[-2.0, 2.0], [0.0, -2.0]])
        )
    if label == "EXP":
        return ContinuousPhaseType(np.array([1.0]), np.array([[-1.0]]))
    if label == "HE":
        root2 = math.sqrt(2.0)
        return ContinuousPhaseType(
            np.array([0.5, 0.5]),
            np.array([[-2.0 / (2.0 - root2), 0.0], [0.0, -2.0 / (2.0 + root2)]]),
        )
    raise ConfigError(f"shock.preset: unknown label {label!r}; use ER, EXP or HE")


def ph_mean_scv(Y: ContinuousPhaseType) -> tuple[float, float]:
    """Mean and squared coefficient of variation from linear solves."""
    try:
        x = np.linalg.solve(-Y.T, np.ones(Y.K))
        y = np.linalg.solve(-Y.T, x)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    mean = float(Y.alpha @ x)
    second = float(2.0 * (Y.alpha @ y))
    return mean, second / mean**2 - 1.0


@dataclass(frozen=True, eq=False)
class InterShockSpec:
    """Either a preset label or explicit phase-type parameters."""

    preset: str | None = None
    custom: ContinuousPhaseType | None = None

    def __post_init__(self) -> None:
        if (self.preset is None) == (self.custom is None):
            raise ConfigError("shock: give exactly one of preset or custom (alpha, T)")

    def resolve(self) -> ContinuousPhaseType:
        if self.preset is not None:
            return ph_from_preset(self.preset)
        return self.custom


@dataclass(frozen=True, eq=False)
class CompoundPhaseType:
    """Failure-time law: shock-count phases crossed with inter-shock phases.

    Kept in factored form; the dense subgenerator is only materialized on
    demand for small systems.
    """

    alpha: np.ndarray  # length N*K
    transition: np.ndarray | sp.csr_matrix  # shock-count subtransition (N x N)
    absorb: np.ndarray  # shock-count absorption vector (N,)
    shock: ContinuousPhaseType

    @property
    def states(self) -> int:
        return self.absorb.size

    @property
    def K(self) -> int:
        return self.shock.K

    @property
    def dim(self) -> int:
        return self.states * self.K

    @property
    def uniformization_rate(self) -> float:
        return float(np.max(-np.diag(self.shock.T)))

    def to_dense(self) -> np.ndarray:
        if self.dim > _DENSE_CAP:
            raise CapacityExceeded(
                f"dense subgenerator capped at {_DENSE_CAP}, need {self.dim}"
            )
        P = self.transition
        if sp.issparse(P):
            P = P.toarray()
        block = np.outer(self.shock.exit_rates, self.shock.alpha)
        return np.kron(np.eye(self.states), self.shock.T) + np.kron(P, block)


def compound_ph(
    dist: DiscretePhaseType, Y: ContinuousPhaseType, max_dim: int = _MAX_COMPOUND_DIM
) -> CompoundPhaseType:
    """Random sum of per-shock durations as one phase-type distribution."""
    dim = dist.size * Y.K
    if dim > max_dim:
        raise CapacityExceeded(f"compound dimension {dim} exceeds cap {max_dim}")
    alpha = np.kron(dist.alpha, Y.alpha)
    return CompoundPhaseType(alpha, dist.chain.transition, dist.chain.absorb, Y)


def compound_from_config(config: SystemConfig) -> CompoundPhaseType:
    if config.shock is None:
        raise ConfigError("shock: an inter-shock specification is required")
    return compound_ph(sntf_distribution(config), config.shock.resolve())


def _apply_generator_left(Z: CompoundPhaseType, U: np.ndarray) -> np.ndarray:
    """Row-vector product u T_Z with u laid out as an (N, K) array."""
    Tc = Z.shock.T
    out = U @ Tc
    out += np.outer(Z.transition.T @ (U @ Z.shock.exit_rates), Z.shock.alpha)
    return out


def _exp_action_left(Z: CompoundPhaseType, U: np.ndarray, dz: float) -> np.ndarray:
    """u exp(dz T_Z) by uniformization, striding so each stride keeps the
    Poisson mode small enough for plain double accumulation."""
    if dz < 0:
        raise ValueError(f"elapsed time must be >= 0, got {dz}")
    if dz == 0.0:
        return U.copy()
    lam = Z.uniformization_rate
    strides = max(1, math.ceil(lam * dz / _STEP_BUDGET))
    h = dz / strides
    lam_h = lam * h
    for _ in range(strides):
        weight = math.exp(-lam_h)
        term = U
        acc = weight * U
        cum = weight
        j = 0
        while cum < 1.0 - _POISSON_TAIL:
            j += 1
            if j > _TERM_CAP:
                raise NonConvergence("uniformization series exceeded its term budget")
            term = term + _apply_generator_left(Z, term) / lam
            weight *= lam_h / j
            acc += weight * term
            cum += weight
        U = acc
    return U


def _alpha_matrix(Z: CompoundPhaseType) -> np.ndarray:
    return Z.alpha.reshape(Z.states, Z.K)


def _density_from(Z: CompoundPhaseType, U: np.ndarray) -> float:
    # exit rate of phase (a, j) is absorb[a] * exit_rates[j]
    return float((U @ Z.shock.exit_rates) @ Z.absorb)


def pdf(Z: CompoundPhaseType, z: float) -> float:
    """Failure-time density -alpha exp(z T_Z) T_Z e at a single point."""
    U = _exp_action_left(Z, _alpha_matrix(Z), z)
    return _density_from(Z, U)


def cdf_survival(Z: CompoundPhaseType, z: float) -> float:
    """P{failure later than z} = alpha exp(z T_Z) e."""
    U = _exp_action_left(Z, _alpha_matrix(Z), z)
    return float(U.sum())


def pdf_grid(Z: CompoundPhaseType, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Density and survival on an ascending grid, propagating one state
    vector between the grid points."""
    zs = np.asarray(zs, dtype=np.float64)
    if zs.size and (np.any(np.diff(zs) < 0) or zs[0] < 0):
        raise ValueError("grid must be ascending and nonnegative")
    dens = np.empty(zs.size)
    surv = np.empty(zs.size)
    U = _alpha_matrix(Z)
    prev = 0.0
    for i, z in enumerate(zs):
        U = _exp_action_left(Z, U, float(z) - prev)
        prev = float(z)
        dens[i] = _density_from(Z, U)
        surv[i] = U.sum()
    return dens, surv


def _diag_block_inverses(Z: CompoundPhaseType, diag: np.ndarray) -> dict[float, np.ndarray]:
    """Inverses of the diagonal blocks -(T_c + P_aa * exit alpha^T).

    P_aa = r^(operating count), so only a handful of distinct blocks occur.
    """
    block = np.outer(Z.shock.exit_rates, Z.shock.alpha)
    inverses: dict[float, np.ndarray] = {}
    for value in np.unique(diag):
        D = -(Z.shock.T + value * block)
        try:
            inverses[float(value)] = np.linalg.inv(D)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
    return inverses


def _solve_neg_generator(Z: CompoundPhaseType, B: np.ndarray) -> np.ndarray:
    """Solve (-T_Z) x = b by block back-substitution over the shock states."""
    N, K = Z.states, Z.K
    P = Z.transition
    dense = not sp.issparse(P)
    diag = P.diagonal() if not dense else np.diag(P)
    inverses = _diag_block_inverses(Z, np.asarray(diag))
    if not dense:
        indptr, indices, data = P.indptr, P.indices, P.data

    X = np.zeros((N, K))
    routed = np.zeros(N)  # alpha_c . X[b], filled back to front
    exit_c = Z.shock.exit_rates
    alpha_c = Z.shock.alpha
    for a in range(N - 1, -1, -1):
        if dense:
            s = P[a, a + 1 :] @ routed[a + 1 :]
        else:
            lo, hi = indptr[a], indptr[a + 1]
            cols = indices[lo:hi]
            ahead = cols > a
            s = data[lo:hi][ahead] @ routed[cols[ahead]]
        X[a] = inverses[float(diag[a])] @ (B[a] + s * exit_c)
        routed[a] = alpha_c @ X[a]
    return X


def raw_moment(Z: CompoundPhaseType, p: int) -> float:
    """E[Z^p] = p! alpha (-T_Z)^(-p) e via p successive block solves."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    X = np.ones((Z.states, Z.K))
    for _ in range(p):
        X = _solve_neg_generator(Z, X)
    return float(math.factorial(p) * (_alpha_matrix(Z) * X).sum())


def scv(Z: CompoundPhaseType) -> float:
    """Squared coefficient of variation Var/Mean^2."""
    m1 = raw_moment(Z, 1)
    m2 = raw_moment(Z, 2)
    return (m2 - m1**2) / m1**2


def _simpson(f, a: float, fa: float, b: float, fb: float, fm: float, tol: float, depth: int) -> float:
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) < 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson(f, a, fa, m, fm, flm, tol / 2.0, depth - 1) + _simpson(
        f, m, fm, b, fb, frm, tol / 2.0, depth - 1
    )


def integrate_pdf(Z: CompoundPhaseType, tol: float = 1e-8) -> float:
    """Adaptive-Simpson mass of the density up to where survival < 1e-10."""
    z_hi = 1.0
    while cdf_survival(Z, z_hi) > 1e-10:
        z_hi *= 2.0
        if z_hi > 2**40:
            raise NonConvergence("survival does not decay; check the subgenerator")
    f = lambda z: pdf(Z, z)
    fa, fb = f(0.0), f(z_hi)
    fm = f(0.5 * z_hi)
    return _simpson(f, 0.0, fa, z_hi, fb, fm, tol, 40)
