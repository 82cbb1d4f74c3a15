"""Monte Carlo experiment harness: trials, strategies, sweeps, persistence.

Channels are drawn from a configurable distance/path-loss/fading model (the
reference experiment protocol fixes only the distance range, so the channel
law here is an explicit, documented choice: unit-reference path-loss gain,
cubic decay, Rayleigh fading). Every strategy inside one trial sees the same
drawn agents (common random numbers), and each trial derives its generator
from ``(seed, trial_index)``, so parallel and serial execution produce
identical results.

Five strategies are built in:

- ``proposed``     joint ratio/power optimization plus greedy scale search;
- ``snr_based``    every link-feasible agent offloads at its optimal ratio
                   and power, cluster size fixed to the feasible count;
- ``local_only``   nobody offloads;
- ``no_semcom``    raw payloads (ratio 1) at the minimum deadline-meeting
                   power, agents needing more than the cap stay local;
- ``fixed_power``  transmit power pinned (0.5 W by default), ratio still
                   optimized under the deadline at that power.

Baseline agents that cannot meet the deadline fall back to local mode; no
strategy ever drops an agent from the energy account.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Mapping

import numpy as np

from . import model, selection, solver
from .model import AgentProfile, SystemParams
from .selection import SelectionPolicy

STRATEGY_NAMES = ("proposed", "snr_based", "local_only", "no_semcom", "fixed_power")

STRATEGY_LABELS = {
    "proposed": "Proposed",
    "snr_based": "SNR-Based",
    "local_only": "Local Only",
    "no_semcom": "No SemCom",
    "fixed_power": "Fixed Tx Power",
}

SWEEP_AXES = ("N", "D", "T0")

SWEEP_CSV_HEADER = "axis,value,strategy,mean_energy_j,stderr_j,n_trials"


@dataclass(frozen=True, slots=True)
class ChannelModel:
    """Distance-based channel law: gain = ref_gain * d^-exponent * fading."""

    pathloss_ref_gain: float = 1e-3
    pathloss_exponent: float = 3.0
    fading: str = "rayleigh"

    def __post_init__(self) -> None:
        if not self.pathloss_ref_gain > 0.0:
            raise ValueError("pathloss_ref_gain must be > 0")
        if not self.pathloss_exponent >= 0.0:
            raise ValueError("pathloss_exponent must be >= 0")
        if self.fading not in ("none", "rayleigh"):
            raise ValueError(f"fading must be 'none' or 'rayleigh', got {self.fading!r}")


@dataclass(frozen=True, slots=True)
class SweepSpec:
    """One sweep axis with values in SI units plus their display form.

    ``display_values`` keeps the config-file units (e.g. Mbit for the data
    size axis) for reports; ``values`` are what the simulator consumes.
    """

    axis: str
    values: tuple[float, ...]
    display_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        if not self.display_values:
            object.__setattr__(self, "display_values", self.values)
        elif len(self.display_values) != len(self.values):
            raise ValueError("display_values length must match values")


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Full experiment description; defaults mirror the reference protocol."""

    system: SystemParams
    n_agents: int = 15
    data_bits: float = 1e7
    complexity: float = 10.0
    cpu_hz: float = 1e9
    n_trials: int = 1000
    d_min_m: float = 50.0
    d_max_m: float = 1000.0
    channel: ChannelModel = ChannelModel()
    seed: int = 1
    sweep: SweepSpec | None = None
    strategies: tuple[str, ...] = STRATEGY_NAMES
    policy: SelectionPolicy = SelectionPolicy()
    fixed_tx_power_w: float = 0.5
    explicit_agents: tuple[AgentProfile, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_agents < 0:
            raise ValueError("n_agents must be >= 0")
        if not self.data_bits > 0.0 or not self.complexity > 0.0 or not self.cpu_hz > 0.0:
            raise ValueError("data_bits, complexity and cpu_hz must be > 0")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not self.d_min_m < self.d_max_m:
            raise ValueError("d_min_m must be < d_max_m")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if not self.strategies:
            raise ValueError("strategies must be non-empty")
        unknown = [s for s in self.strategies if s not in STRATEGY_NAMES]
        if unknown:
            raise ValueError(f"unknown strategies {unknown}; known: {STRATEGY_NAMES}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("strategies must not repeat")
        if not 0.0 < self.fixed_tx_power_w <= self.system.p_max_w:
            raise ValueError("fixed_tx_power_w must be in (0, p_max_w]")


@dataclass(frozen=True, slots=True)
class StrategyOutcome:
    """One strategy's result on one trial."""

    total_energy_j: float
    k: int
    feasible: bool
    latency_violations: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.total_energy_j) or self.total_energy_j < 0.0:
            raise ValueError(f"total energy must be finite and >= 0, got {self.total_energy_j!r}")


@dataclass(frozen=True, slots=True)
class TrialResult:
    """All strategy outcomes for one trial; agents kept only when dumping."""

    trial_index: int
    seed: int
    outcomes: Mapping[str, StrategyOutcome]
    agents: tuple[AgentProfile, ...] | None = None


@dataclass(frozen=True, slots=True)
class StrategyStats:
    """Aggregate of one strategy over the trials of one sweep point."""

    mean_energy_j: float
    stderr_j: float
    n_trials: int
    k_histogram: tuple[tuple[int, int], ...]
    infeasible_trials: int
    latency_violation_trials: int


@dataclass(frozen=True, slots=True)
class SweepPoint:
    value: float
    stats: Mapping[str, StrategyStats]


@dataclass(frozen=True, slots=True)
class SweepResult:
    axis: str
    strategies: tuple[str, ...]
    points: tuple[SweepPoint, ...]


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Generator for one trial, independent of execution order."""
    return np.random.default_rng([seed, trial_index])


def draw_agents(cfg: SimConfig, trial_index: int) -> tuple[AgentProfile, ...]:
    """Draw one trial's agent fleet from the configured channel model."""
    rng = trial_rng(cfg.seed, trial_index)
    distances = rng.uniform(cfg.d_min_m, cfg.d_max_m, cfg.n_agents)
    if cfg.channel.fading == "rayleigh":
        fading = rng.standard_exponential(cfg.n_agents)
    else:
        fading = np.ones(cfg.n_agents)
    gains = (
        cfg.channel.pathloss_ref_gain
        * distances ** (-cfg.channel.pathloss_exponent)
        * fading
    )
    return tuple(
        AgentProfile(
            data_bits=cfg.data_bits,
            complexity=cfg.complexity,
            cpu_hz=cfg.cpu_hz,
            channel_gain=float(g),
            distance_m=float(d),
        )
        for g, d in zip(gains, distances)
    )


def _outcome(
    params: SystemParams,
    evaluations: tuple[model.AgentEvaluation, ...],
    k: int,
    policy: SelectionPolicy,
) -> StrategyOutcome:
    total = model.network_energy(params, evaluations, k)
    violations = sum(
        1 for ev in evaluations if ev.mode == 0 and ev.t_local > params.deadline_s
    )
    feasible = not (policy.local_latency == "enforce" and violations > 0)
    return StrategyOutcome(
        total_energy_j=total, k=k, feasible=feasible, latency_violations=violations
    )


def _all_local(
    params: SystemParams,
    agents: tuple[AgentProfile, ...],
    policy: SelectionPolicy,
) -> StrategyOutcome:
    evaluations = tuple(model.evaluate_local(params, a) for a in agents)
    return _outcome(params, evaluations, 0, policy)


def _collaborate_all(
    params: SystemParams,
    agents: tuple[AgentProfile, ...],
    bs_evaluations: Mapping[int, model.AgentEvaluation],
    policy: SelectionPolicy,
) -> StrategyOutcome:
    """Everyone offload-capable collaborates, if enough of them exist."""
    k = len(bs_evaluations)
    if k < policy.min_k:
        return _all_local(params, agents, policy)
    evaluations = tuple(
        bs_evaluations[i] if i in bs_evaluations else model.evaluate_local(params, a)
        for i, a in enumerate(agents)
    )
    return _outcome(params, evaluations, k, policy)


def run_strategy(
    strategy: str,
    params: SystemParams,
    agents: tuple[AgentProfile, ...],
    policy: SelectionPolicy = SelectionPolicy(),
    *,
    fixed_tx_power_w: float = 0.5,
    solutions: Mapping[int, solver.AgentSolution] | None = None,
) -> StrategyOutcome:
    """Run one strategy on one drawn fleet.

    ``solutions`` lets callers share the per-agent solves between the
    strategies that use them (``proposed`` and ``snr_based``); passing it
    never changes the result.
    """
    if strategy in ("proposed", "snr_based") and solutions is None:
        solutions = selection.solve_feasible_agents(params, agents)

    if strategy == "proposed":
        sol = selection.assemble_solution(params, agents, solutions, policy)
        feasible = not (
            policy.local_latency == "enforce" and len(sol.latency_violations) > 0
        )
        return StrategyOutcome(
            total_energy_j=sol.total_energy,
            k=sol.k_star,
            feasible=feasible,
            latency_violations=len(sol.latency_violations),
        )

    if strategy == "snr_based":
        bs_evaluations = {i: s.evaluation for i, s in solutions.items()}
        return _collaborate_all(params, agents, bs_evaluations, policy)

    if strategy == "local_only":
        return _all_local(params, agents, policy)

    if strategy == "no_semcom":
        bs_evaluations = {}
        for i, agent in enumerate(agents):
            if not model.snr(params, agent).feasible:
                continue
            p_req = model.power_for_rate(
                params, agent, agent.data_bits / params.deadline_s
            )
            if p_req <= params.p_max_w:
                bs_evaluations[i] = model.evaluate_bs(params, agent, 1.0, p_req)
        return _collaborate_all(params, agents, bs_evaluations, policy)

    if strategy == "fixed_power":
        p_fix = fixed_tx_power_w
        bs_evaluations = {}
        for i, agent in enumerate(agents):
            if not model.snr(params, agent).feasible:
                continue
            rate = model.achievable_rate(params, agent, p_fix)
            roots = solver.rho_bounds_for_rate(params, agent, rate)
            if roots is None:
                continue
            lo = max(params.rho_min, roots[0])
            hi = min(roots[1], 1.0)
            if lo > hi:
                continue
            # Interior stationary point of e_comp(rho) + p * rho * D / rate:
            # compression saving balances the linear transmission cost.
            rho_zero = (
                params.switched_cap * agent.complexity * agent.cpu_hz**2 * rate / p_fix
            )
            rho = min(max(rho_zero, lo), hi)
            bs_evaluations[i] = model.evaluate_bs(params, agent, rho, p_fix)
        return _collaborate_all(params, agents, bs_evaluations, policy)

    raise ValueError(f"unknown strategy {strategy!r}")


def run_trial(cfg: SimConfig, trial_index: int, keep_agents: bool = False) -> TrialResult:
    """Draw one fleet and run every configured strategy on it."""
    agents = draw_agents(cfg, trial_index)
    solutions = selection.solve_feasible_agents(cfg.system, agents)
    outcomes = {
        name: run_strategy(
            name,
            cfg.system,
            agents,
            cfg.policy,
            fixed_tx_power_w=cfg.fixed_tx_power_w,
            solutions=solutions,
        )
        for name in cfg.strategies
    }
    return TrialResult(
        trial_index=trial_index,
        seed=cfg.seed,
        outcomes=outcomes,
        agents=agents if keep_agents else None,
    )


class _Accumulator:
    """Streaming mean/stderr/histogram fold over trial outcomes."""

    __slots__ = ("n", "total", "total_sq", "k_counts", "infeasible", "violations")

    def __init__(self) -> None:
        self.n = 0
        self.total = 0.0
        self.total_sq = 0.0
        self.k_counts: dict[int, int] = {}
        self.infeasible = 0
        self.violations = 0

    def add(self, outcome: StrategyOutcome) -> None:
        self.n += 1
        self.total += outcome.total_energy_j
        self.total_sq += outcome.total_energy_j**2
        self.k_counts[outcome.k] = self.k_counts.get(outcome.k, 0) + 1
        if not outcome.feasible:
            self.infeasible += 1
        if outcome.latency_violations > 0:
            self.violations += 1

    def finalize(self) -> StrategyStats:
        mean = self.total / self.n
        if self.n > 1:
            variance = max(0.0, (self.total_sq - self.n * mean**2) / (self.n - 1))
            stderr = math.sqrt(variance / self.n)
        else:
            stderr = 0.0
        return StrategyStats(
            mean_energy_j=mean,
            stderr_j=stderr,
            n_trials=self.n,
            k_histogram=tuple(sorted(self.k_counts.items())),
            infeasible_trials=self.infeasible,
            latency_violation_trials=self.violations,
        )


def run_point(
    cfg: SimConfig,
    jobs: int = 1,
    on_trial: Callable[[TrialResult], None] | None = None,
) -> dict[str, StrategyStats]:
    """Run all trials of one configuration and fold them into stats.

    Trials fold in index order regardless of ``jobs``, so the floating-point
    aggregates are identical at any parallelism degree.
    """
    keep = on_trial is not None
    accumulators = {name: _Accumulator() for name in cfg.strategies}
    if jobs <= 1:
        results = (run_trial(cfg, i, keep) for i in range(cfg.n_trials))
        for result in results:
            for name in cfg.strategies:
                accumulators[name].add(result.outcomes[name])
            if on_trial is not None:
                on_trial(result)
    else:
        worker = partial(run_trial, cfg, keep_agents=keep)
        chunk = max(1, cfg.n_trials // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for result in pool.map(worker, range(cfg.n_trials), chunksize=chunk):
                for name in cfg.strategies:
                    accumulators[name].add(result.outcomes[name])
                if on_trial is not None:
                    on_trial(result)
    return {name: acc.finalize() for name, acc in accumulators.items()}


def point_config(cfg: SimConfig, value_si: float) -> SimConfig:
    """Rebuild the config for one sweep-axis value (already in SI units)."""
    axis = cfg.sweep.axis if cfg.sweep is not None else None
    if axis == "N":
        return replace(cfg, n_agents=int(value_si))
    if axis == "D":
        return replace(cfg, data_bits=float(value_si))
    if axis == "T0":
        return replace(cfg, system=replace(cfg.system, deadline_s=float(value_si)))
    raise ValueError("config has no sweep axis")


def run_sweep(
    cfg: SimConfig,
    jobs: int = 1,
    on_trial: Callable[[float, SimConfig, TrialResult], None] | None = None,
    progress: Callable[[str], None] | None = None,
) -> SweepResult:
    """Run the configured sweep with common random numbers across points."""
    if cfg.sweep is None:
        raise ValueError("run_sweep requires a sweep spec in the config")
    points = []
    for value_si, display in zip(cfg.sweep.values, cfg.sweep.display_values):
        if progress is not None:
            progress(f"sweep {cfg.sweep.axis}={display}: {cfg.n_trials} trials")
        pcfg = point_config(cfg, value_si)
        hook = None
        if on_trial is not None:
            hook = lambda trial, _v=display, _c=pcfg: on_trial(_v, _c, trial)
        stats = run_point(pcfg, jobs=jobs, on_trial=hook)
        points.append(SweepPoint(value=display, stats=stats))
    return SweepResult(axis=cfg.sweep.axis, strategies=cfg.strategies, points=tuple(points))


def _fmt_number(x: float | int) -> str:
    """Shortest round-trip decimal for floats, plain text for ints."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def sweep_csv_text(result: SweepResult) -> str:
    """Render a sweep as the canonical delimited report."""
    lines = [SWEEP_CSV_HEADER]
    for point in result.points:
        for name in result.strategies:
            stats = point.stats[name]
            lines.append(
                ",".join(
                    (
                        result.axis,
                        _fmt_number(point.value),
                        name,
                        _fmt_number(stats.mean_energy_j),
                        _fmt_number(stats.stderr_j),
                        str(stats.n_trials),
                    )
                )
            )
    return "\n".join(lines) + "\n"


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(sweep_csv_text(result))


def results_tree(result: SweepResult, config_echo: dict) -> dict:
    """Full-fidelity result document (JSON-compatible tree)."""
    points = []
    for point in result.points:
        strategies = {}
        for name in result.strategies:
            stats = point.stats[name]
            strategies[name] = {
                "label": STRATEGY_LABELS[name],
                "mean_energy_j": stats.mean_energy_j,
                "stderr_j": stats.stderr_j,
                "n_trials": stats.n_trials,
                "infeasible_trials": stats.infeasible_trials,
                "latency_violation_trials": stats.latency_violation_trials,
                "k_histogram": {str(k): count for k, count in stats.k_histogram},
            }
        points.append({"value": point.value, "strategies": strategies})
    return {"config": config_echo, "axis": result.axis, "points": points}


def write_results_json(tree: dict, path) -> None:
    import json

    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(tree, fh, indent=2)
        fh.write("\n")
