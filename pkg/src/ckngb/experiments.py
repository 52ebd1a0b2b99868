"""Experiment configuration and the drivers behind the CLI subcommands.

Configs are JSON documents with keys n, k, r, bc, shock plus per-command
numeric options.  Sweep commands accept lists (or {start, stop, step}
ranges for r) and evaluate the cartesian grid; single-system commands
insist on scalars.  All emitted tables are deterministically ordered so
repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable

import numpy as np

from . import chain as chain_mod
from . import montecarlo, sntf, ttf
from .errors import ConfigError, NoTieSets, OddNUnsupported
from .system import BalanceCondition, SystemConfig
from .tiesets import (
    enumerate_min_tiesets,
    system_reliability_exact,
    system_reliability_product,
)

DEFAULT_SEED = 20240
DEFAULT_REPS = 100_000
DEFAULT_M_MAX = 50
DEFAULT_Z_MAX = 10.0
DEFAULT_Z_STEPS = 200
DEFAULT_R_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))  # 0.05 .. 0.95

INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated experiment description: parameter grids plus options."""

    n: tuple[int, ...]
    k: tuple[int, ...]
    r: tuple[float, ...]
    bc: tuple[BalanceCondition, ...]
    presets: tuple[str, ...] = ("ER",)
    shock: "ttf.InterShockSpec | None" = None
    out: str | None = None
    m_max: int = DEFAULT_M_MAX
    z_max: float = DEFAULT_Z_MAX
    z_steps: int = DEFAULT_Z_STEPS
    tol: float = 1e-12
    reps: int = DEFAULT_REPS
    seed: int = DEFAULT_SEED
    threads: int = 1

    def single(self) -> SystemConfig:
        for name, values in (("n", self.n), ("k", self.k), ("r", self.r), ("bc", self.bc)):
            if len(values) != 1:
                raise ConfigError(f"{name}: this command needs a single value, got {len(values)}")
        return SystemConfig(self.n[0], self.k[0], self.r[0], self.bc[0], self.shock)


def _int_list(value: Any, path: str) -> tuple[int, ...]:
    items = value if isinstance(value, list) else [value]
    out = []
    for i, item in enumerate(items):
        if isinstance(item, bool) or not isinstance(item, int):
            raise ConfigError(f"{path}[{i}]: expected an integer, got {item!r}")
        out.append(item)
    if not out:
        raise ConfigError(f"{path}: must be nonempty")
    return tuple(out)


def _float_list(value: Any, path: str) -> tuple[float, ...]:
    if isinstance(value, dict):
        for key in ("start", "stop", "step"):
            if key not in value:
                raise ConfigError(f"{path}.{key}: required in a range spec")
        start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        if step <= 0:
            raise ConfigError(f"{path}.step: must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        vals = tuple(round(start + i * step, 12) for i in range(count))
        if not vals:
            raise ConfigError(f"{path}: empty range")
        return vals
    items = value if isinstance(value, list) else [value]
    out = []
    for i, item in enumerate(items):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{path}[{i}]: expected a number, got {item!r}")
        out.append(float(item))
    if not out:
        raise ConfigError(f"{path}: must be nonempty")
    return tuple(out)


def _parse_shock(obj: Any) -> tuple["ttf.InterShockSpec | None", tuple[str, ...]]:
    """Returns the single-system spec plus the preset list for sweeps."""
    if obj is None:
        return None, ("ER",)
    if not isinstance(obj, dict):
        raise ConfigError("shock: expected an object")
    if "preset" in obj and ("alpha" in obj or "T" in obj):
        raise ConfigError("shock: give either preset or (alpha, T), not both")
    if "preset" in obj:
        presets = obj["preset"] if isinstance(obj["preset"], list) else [obj["preset"]]
        labels = []
        for i, label in enumerate(presets):
            if str(label).upper() not in ttf.PRESET_LABELS:
                raise ConfigError(f"shock.preset[{i}]: unknown label {label!r}")
            labels.append(str(label).upper())
        if not labels:
            raise ConfigError("shock.preset: must be nonempty")
        spec = ttf.InterShockSpec(preset=labels[0]) if len(labels) == 1 else None
        return spec, tuple(labels)
    if "alpha" in obj or "T" in obj:
        if "alpha" not in obj or "T" not in obj:
            raise ConfigError("shock: custom spec needs both alpha and T")
        custom = ttf.validate_ph(np.asarray(obj["alpha"], dtype=float), np.asarray(obj["T"], dtype=float))
        return ttf.InterShockSpec(custom=custom), ("custom",)
    raise ConfigError("shock: expected preset or (alpha, T)")


_KNOWN_KEYS = {
    "n", "k", "r", "bc", "shock", "out",
    "m_max", "z_max", "z_steps", "tol", "reps", "seed", "threads",
}


def parse_config(doc: Any) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be an object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    for key in ("n", "k"):
        if key not in doc:
            raise ConfigError(f"{key}: required")
    n = _int_list(doc["n"], "n")
    k = _int_list(doc["k"], "k")
    r = _float_list(doc.get("r", list(DEFAULT_R_GRID)), "r")
    bc_raw = doc.get("bc", "BC3")
    bc_items = bc_raw if isinstance(bc_raw, list) else [bc_raw]
    bc = tuple(BalanceCondition.parse(b) for b in bc_items)
    if not bc:
        raise ConfigError("bc: must be nonempty")
    shock, presets = _parse_shock(doc.get("shock"))

    def _opt(key: str, cast: Callable, default: Any, positive: bool = True) -> Any:
        if key not in doc:
            return default
        try:
            value = cast(doc[key])
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected {cast.__name__}") from None
        if positive and value <= 0:
            raise ConfigError(f"{key}: must be positive")
        return value

    return ExperimentSpec(
        n=n,
        k=k,
        r=r,
        bc=bc,
        presets=presets,
        shock=shock,
        out=doc.get("out"),
        m_max=_opt("m_max", int, DEFAULT_M_MAX),
        z_max=_opt("z_max", float, DEFAULT_Z_MAX),
        z_steps=_opt("z_steps", int, DEFAULT_Z_STEPS),
        tol=_opt("tol", float, 1e-12),
        reps=_opt("reps", int, DEFAULT_REPS),
        seed=_opt("seed", int, DEFAULT_SEED, positive=False),
        threads=_opt("threads", int, 1),
    )


def load_config(path: str) -> ExperimentSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from exc
    return parse_config(doc)


def format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def rows_to_csv(header: list[str], rows: Iterable[dict[str, Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(row[col]) for col in header))
    return "\n".join(lines) + "\n"


def _grid_map(spec: ExperimentSpec, points: list, worker: Callable) -> list:
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            return list(pool.map(worker, points))
    return [worker(p) for p in points]


# ---------------------------------------------------------------- commands


def run_tiesets(spec: ExperimentSpec) -> str:
    config = spec.single()
    collection = enumerate_min_tiesets(config.n, config.k, config.bc)
    lines = [f"count,{len(collection)}"]
    lines.extend(str(t) for t in collection.tiesets)
    lines.append(f"reliability_exact,{format_value(system_reliability_exact(config.n, collection, config.r))}")
    lines.append(f"reliability_product,{format_value(system_reliability_product(collection, config.r))}")
    return "\n".join(lines) + "\n"


def run_sntf_pmf(spec: ExperimentSpec, use_matrix: bool = False) -> list[dict]:
    config = spec.single()
    dist = sntf.sntf_distribution(config)
    rows = []
    if use_matrix:
        pmf, surv = sntf.pmf_survival_series(dist, spec.m_max)
        for m in range(1, spec.m_max + 1):
            rows.append({"m": m, "pmf": float(pmf[m - 1]), "survival": float(surv[m - 1])})
    else:
        for m in range(1, spec.m_max + 1):
            rows.append(
                {
                    "m": m,
                    "pmf": sntf.pmf_direct(config, m),
                    "survival": sntf.survival_direct(config, m),
                }
            )
    return rows


def run_sntf_moments(spec: ExperimentSpec) -> list[dict]:
    config = spec.single()
    dist = sntf.sntf_distribution(config)
    mean = sntf.mean_closed(dist)
    second = sntf.factorial_moment(dist, 2) + mean
    return [
        {
            "n": config.n,
            "k": config.k,
            "r": config.r,
            "bc": config.bc.value,
            "msntf": mean,
            "second_moment": second,
            "variance": second - mean**2,
        }
    ]


def run_ttf(spec: ExperimentSpec) -> tuple[list[dict], dict]:
    config = spec.single()
    if config.shock is None:
        if len(spec.presets) > 1:
            raise ConfigError("shock.preset: this command needs a single preset")
        raise ConfigError("shock: required for the ttf command")
    dist = sntf.sntf_distribution(config)
    Z = ttf.compound_ph(dist, config.shock.resolve())
    zs = np.linspace(0.0, spec.z_max, spec.z_steps + 1)
    dens, surv = ttf.pdf_grid(Z, zs)
    rows = [
        {"z": float(z), "pdf": float(d), "survival": float(s)}
        for z, d, s in zip(zs, dens, surv)
    ]
    mean_y, _ = ttf.ph_mean_scv(config.shock.resolve())
    summary = {
        "mttf": ttf.raw_moment(Z, 1),
        "mttf_wald": sntf.mean_closed(dist) * mean_y,
        "scv": ttf.scv(Z),
    }
    return rows, summary


def run_sweep_msntf(spec: ExperimentSpec) -> list[dict]:
    points = sorted(
        (bc.value, n, k, r)
        for bc in spec.bc
        for n in spec.n
        for k in spec.k
        for r in spec.r
        if 2 <= k <= n - 1
    )
    if not points:
        raise ConfigError("grid: no points satisfy 2 <= k <= n-1")

    def worker(point):
        bc_value, n, k, r = point
        try:
            config = SystemConfig(n, k, r, BalanceCondition(bc_value))
            dist = sntf.sntf_distribution(config)
            msntf: Any = sntf.mean_closed(dist)
        except (NoTieSets, OddNUnsupported):
            msntf = INFEASIBLE
        return {"bc": bc_value, "n": n, "k": k, "r": r, "msntf": msntf}

    return _grid_map(spec, points, worker)


def run_sweep_scv(spec: ExperimentSpec) -> list[dict]:
    if spec.presets == ("custom",):
        raise ConfigError("shock.preset: sweep-scv needs preset labels")
    points = sorted(
        (bc.value, preset, n, k, r)
        for bc in spec.bc
        for preset in spec.presets
        for n in spec.n
        for k in spec.k
        for r in spec.r
        if 2 <= k <= n - 1
    )
    if not points:
        raise ConfigError("grid: no points satisfy 2 <= k <= n-1")

    def worker(point):
        bc_value, preset, n, k, r = point
        row: dict[str, Any] = {"bc": bc_value, "preset": preset, "n": n, "k": k, "r": r}
        try:
            config = SystemConfig(n, k, r, BalanceCondition(bc_value))
            dist = sntf.sntf_distribution(config)
            Y = ttf.ph_from_preset(preset)
            Z = ttf.compound_ph(dist, Y)
            mean_y, _ = ttf.ph_mean_scv(Y)
            row["mttf"] = ttf.raw_moment(Z, 1)
            row["mttf_wald"] = sntf.mean_closed(dist) * mean_y
            row["scv"] = ttf.scv(Z)
        except (NoTieSets, OddNUnsupported):
            row.update({"mttf": INFEASIBLE, "mttf_wald": INFEASIBLE, "scv": INFEASIBLE})
        return row

    return _grid_map(spec, points, worker)


def run_simulate(spec: ExperimentSpec, target: str = "sntf") -> tuple[montecarlo.SimulationResult, list[dict]]:
    config = spec.single()
    if target == "sntf":
        result = montecarlo.simulate_sntf(config, spec.seed, spec.reps)
    elif target == "ttf":
        result = montecarlo.simulate_ttf(config, spec.seed, spec.reps)
    else:
        raise ConfigError(f"target: expected sntf or ttf, got {target!r}")
    rows = [
        {"bin_left": float(lo), "bin_right": float(hi), "count": int(c)}
        for lo, hi, c in zip(result.hist_edges[:-1], result.hist_edges[1:], result.hist_counts)
    ]
    return result, rows


# ---------------------------------------------------------------- validate


def _check(name: str, passed: bool, detail: str) -> dict:
    return {"check": name, "result": "pass" if passed else "fail", "detail": detail}


def run_validate(
    spec: ExperimentSpec, chain_override: "chain_mod.ConsolidatedChain | None" = None
) -> list[dict]:
    """Oracle cross-checks for one configuration; chain_override is a test
    hook for corrupting the chain under inspection."""
    config = spec.single()
    chain = chain_override or chain_mod.build_consolidated(config.n, config.k, config.bc, config.r)
    dist = sntf.DiscretePhaseType(np.r_[1.0, np.zeros(chain.size - 1)], chain)
    checks: list[dict] = []

    P = chain.dense_transition()
    row_err = float(np.abs(P.sum(axis=1) + chain.absorb - 1.0).max())
    bad_entries = bool((P < 0).any() or (P > 1).any() or np.tril(P, -1).any())
    checks.append(
        _check(
            "row_stochasticity",
            row_err <= 1e-12 and not bad_entries,
            f"max row defect {row_err:.3e}",
        )
    )

    pmf_m, _ = sntf.pmf_survival_series(dist, spec.m_max)
    diff = max(
        abs(pmf_m[m - 1] - sntf.pmf_direct(config, m)) for m in range(1, spec.m_max + 1)
    )
    checks.append(_check("pmf_direct_vs_matrix", diff <= 1e-12, f"max gap {diff:.3e}"))

    cutoff = 512
    norm_defect = abs(sum(sntf.pmf_direct(config, m) for m in range(1, cutoff + 1))
                      + sntf.survival_direct(config, cutoff) - 1.0)
    checks.append(_check("pmf_normalization", norm_defect <= 1e-12, f"defect {norm_defect:.3e}"))

    if config.n <= 8:
        full = chain_mod.full_transition_matrix(config.n, config.r)
        nonfailed_idx = [s.index - 1 for s in chain.states]
        v = np.zeros(full.shape[0])
        v[nonfailed_idx[0]] = 1.0  # all-ones state
        worst = 0.0
        for m in range(1, 21):
            v = v @ full
            absorbed_full = 1.0 - v[nonfailed_idx].sum()
            absorbed_cons = 1.0 - sntf.survival(dist, m)
            worst = max(worst, abs(absorbed_full - absorbed_cons))
        checks.append(_check("consolidation_fidelity", worst <= 1e-12, f"max gap {worst:.3e}"))
    else:
        checks.append(_check("consolidation_fidelity", True, "skipped (n > 8)"))

    mean = sntf.mean_closed(dist)
    series = sntf.raw_moment_series(config, 1, 1e-12)
    checks.append(
        _check("mean_closed_vs_series", abs(mean - series) <= 1e-9, f"gap {abs(mean - series):.3e}")
    )

    if config.shock is not None:
        Y = config.shock.resolve()
        Z = ttf.compound_ph(dist, Y)
        mean_y, _ = ttf.ph_mean_scv(Y)
        mttf = ttf.raw_moment(Z, 1)
        gap = abs(mttf - mean * mean_y)
        checks.append(_check("wald_identity", gap <= 1e-8, f"gap {gap:.3e}"))

    sim = montecarlo.simulate_sntf(config, spec.seed, spec.reps)
    hw99 = sim.half_width(0.99)
    inside = abs(sim.mean - mean) <= hw99
    checks.append(
        _check(
            "monte_carlo_msntf",
            inside,
            f"analytic {mean:.6f} vs simulated {sim.mean:.6f} +/- {hw99:.6f}",
        )
    )
    if config.shock is not None:
        sim_t = montecarlo.simulate_ttf(config, spec.seed, spec.reps)
        hw99 = sim_t.half_width(0.99)
        inside = abs(sim_t.mean - mttf) <= hw99
        checks.append(
            _check(
                "monte_carlo_mttf",
                inside,
                f"analytic {mttf:.6f} vs simulated {sim_t.mean:.6f} +/- {hw99:.6f}",
            )
        )
    return checks
