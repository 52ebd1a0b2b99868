"""Exact lifetime distributions of circular k-out-of-n balanced systems
under random shocks, with a Monte Carlo oracle for verification."""

from .chain import (
    ConsolidatedChain,
    TransitionCounts,
    build_consolidated,
    full_transition_matrix,
    mstep_prob,
    nonfailed_states,
    one_step_prob,
    transition_counts,
)
from .errors import (
    CapacityExceeded,
    CknGBError,
    ConfigError,
    NoTieSets,
    NonConvergence,
    OddNUnsupported,
    SingularSystem,
)
from .montecarlo import SimulationResult, sample_ph, simulate_sntf, simulate_ttf
from .sntf import (
    DiscretePhaseType,
    factorial_moment,
    mean_closed,
    pmf_direct,
    pmf_matrix,
    raw_moment_series,
    sntf_distribution,
    survival,
    survival_direct,
)
from .system import (
    BalanceCondition,
    SystemConfig,
    SystemState,
    is_balanced,
    is_balanced_bc1,
    is_balanced_bc2,
    is_balanced_bc3,
    unit_angle,
)
from .tiesets import (
    TieSet,
    TieSetCollection,
    enumerate_min_tiesets,
    is_nonfailed,
    structure_function,
    system_reliability_exact,
    system_reliability_product,
)
from .ttf import (
    CompoundPhaseType,
    ContinuousPhaseType,
    InterShockSpec,
    cdf_survival,
    compound_from_config,
    compound_ph,
    pdf,
    ph_from_preset,
    ph_mean_scv,
    raw_moment,
    scv,
)

__version__ = "0.1.0"
