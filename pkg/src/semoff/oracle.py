"""Brute-force verifiers for the solver and the mode selector.

Two independent oracles certify optimality claims on small instances:

- a log-spaced ratio grid (optionally crossed with a power sweep) for the
  continuous per-agent subproblem, evaluated through the core model formulas
  only, never through solver internals;
- exhaustive mode-vector enumeration for the discrete collaboration choice.

``run_battery`` bundles these with the structural invariants into the check
list behind the ``verify`` CLI subcommand. Guards refuse instances large
enough to make enumeration explode; this is a verifier, not a general
mixed-integer solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

import numpy as np

from . import model, netsim, selection, solver
from .model import AgentProfile, SystemParams
from .netsim import SimConfig
from .selection import NetworkSolution, SelectionPolicy

# The solver must never lose to the grid by more than this (it is exact up
# to bisection rounding, the grid only up to its resolution).
PER_AGENT_GRID_TOL = 1e-6

LATENCY_REL_TOL = 1e-9
POWER_CAP_REL_TOL = 1e-9
DERIVATIVE_REL_TOL = 1e-4


class OracleSizeError(ValueError):
    """Instance exceeds the enumeration size guard."""


class EmptyRegionError(ValueError):
    """Grid search requested for an agent with no feasible ratio."""


@dataclass(frozen=True, slots=True)
class OracleConfig:
    """Grid resolution, enumeration size guard and agreement tolerances."""

    rho_grid_points: int = 2000
    subset_max_n: int = 12
    tolerance_rel_continuous: float = 1e-3
    tolerance_rel_discrete: float = 1e-6

    def __post_init__(self) -> None:
        if self.rho_grid_points < 100:
            raise ValueError("rho_grid_points must be >= 100")
        if not 1 <= self.subset_max_n <= 20:
            raise ValueError("subset_max_n must be in [1, 20]")
        if not self.tolerance_rel_continuous > 0.0 or not self.tolerance_rel_discrete > 0.0:
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True, slots=True)
class CounterexampleTrial:
    """A replayable failing instance (serialized by the config layer)."""

    params: SystemParams
    agents: tuple[AgentProfile, ...]
    policy: SelectionPolicy


@dataclass(frozen=True, slots=True)
class OracleVerdict:
    """End-to-end comparison of the solver against the composed oracles."""

    agreed: bool
    oracle_energy: float
    solver_energy: float
    worst_case_gap_rel: float
    counterexample: CounterexampleTrial | None


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True, slots=True)
class BatteryReport:
    checks: tuple[CheckResult, ...]
    counterexample: CounterexampleTrial | None = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def _rho_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def _tight_power(params: SystemParams, agent: AgentProfile, rho: float) -> float:
    """Minimum power meeting the deadline at ratio ``rho`` (capped)."""
    budget = params.deadline_s - model.compression_time(agent, rho)
    power = model.power_for_rate(params, agent, rho * agent.data_bits / budget)
    return min(power, params.p_max_w)


def grid_solve_agent(
    params: SystemParams,
    agent: AgentProfile,
    cfg: OracleConfig = OracleConfig(),
) -> tuple[float, float, float]:
    """Best (rho, power, energy) over a log-spaced ratio grid.

    Every grid point keeps the deadline tight: the power is the exact
    requirement of the remaining transmit budget. Log spacing matters
    because the compression term varies over orders of magnitude near the
    small-ratio end.
    """
    region = solver.feasible_region(params, agent)
    if region.empty:
        raise EmptyRegionError("agent has an empty feasible region")
    best = (math.nan, math.nan, math.inf)
    for rho in _rho_grid(region.lo, region.hi, cfg.rho_grid_points):
        rho = float(rho)
        power = _tight_power(params, agent, rho)
        _, _, energy = model.bs_energy(params, agent, rho, power)
        if energy < best[2]:
            best = (rho, power, energy)
    return best


def grid_solve_agent_2d(
    params: SystemParams,
    agent: AgentProfile,
    n_rho: int = 100,
    n_power: int = 200,
) -> tuple[tuple[float, float, float], bool]:
    """Cross a coarse ratio grid with a power sweep above the tight power.

    Returns the 2-D argmin and whether energy was non-decreasing in power
    beyond the deadline-tight point at every sampled ratio, confirming
    independently that spending the whole deadline is optimal.
    """
    region = solver.feasible_region(params, agent)
    if region.empty:
        raise EmptyRegionError("agent has an empty feasible region")
    best = (math.nan, math.nan, math.inf)
    monotone = True
    for rho in _rho_grid(region.lo, region.hi, n_rho):
        rho = float(rho)
        p_tight = _tight_power(params, agent, rho)
        previous = None
        for power in np.linspace(p_tight, params.p_max_w, n_power):
            power = float(power)
            if power <= 0.0:
                continue
            _, _, energy = model.bs_energy(params, agent, rho, power)
            if energy < best[2]:
                best = (rho, power, energy)
            if previous is not None and energy < previous * (1.0 - 1e-12):
                monotone = False
            previous = energy
    return best, monotone


def enumerate_modes(
    params: SystemParams,
    agents: tuple[AgentProfile, ...] | list[AgentProfile],
    bs_evaluations: Mapping[int, model.AgentEvaluation],
    min_k: int = 2,
    cfg: OracleConfig = OracleConfig(),
) -> NetworkSolution:
    """Exhaustively enumerate admissible mode vectors and return the best.

    ``bs_evaluations`` holds the offload evaluation of every offload-capable
    agent; subsets range over those indices with sizes in {0, min_k..M}.
    Ties resolve to the first subset in (size, lexicographic) order, so the
    result is deterministic.
    """
    n = len(agents)
    if n > cfg.subset_max_n:
        raise OracleSizeError(
            f"enumeration refused for n={n} > subset_max_n={cfg.subset_max_n}"
        )
    local_evals = tuple(model.evaluate_local(params, a) for a in agents)
    indices = sorted(bs_evaluations)
    m = len(indices)

    best_energy = math.inf
    best_subset: tuple[int, ...] = ()
    trace: list[tuple[int, float]] = []
    for k in [0, *range(min_k, m + 1)]:
        best_k_energy = math.inf
        for subset in combinations(indices, k):
            chosen = set(subset)
            evaluations = tuple(
                bs_evaluations[i] if i in chosen else local_evals[i] for i in range(n)
            )
            energy = model.network_energy(params, evaluations, k)
            if energy < best_k_energy:
                best_k_energy = energy
            if energy < best_energy:
                best_energy = energy
                best_subset = subset
        trace.append((k, best_k_energy))

    chosen = set(best_subset)
    modes = tuple(1 if i in chosen else 0 for i in range(n))
    evaluations = tuple(
        bs_evaluations[i] if i in chosen else local_evals[i] for i in range(n)
    )
    return NetworkSolution(
        modes=modes,
        k_star=len(best_subset),
        total_energy=best_energy,
        per_agent=evaluations,
        m_feasible=m,
        objective_trace=tuple(trace),
    )


def verify(
    params: SystemParams,
    agents: tuple[AgentProfile, ...] | list[AgentProfile],
    cfg: OracleConfig = OracleConfig(),
    policy: SelectionPolicy = SelectionPolicy(),
) -> OracleVerdict:
    """Compose both oracles end-to-end against the main pipeline.

    Grid-solves every offload-capable agent, enumerates all mode vectors
    over those grid decisions, and compares the resulting best energy with
    the solver's. Agreement means the solver is no worse than the oracle
    beyond the continuous tolerance (it is usually strictly better, since
    the grid is resolution-limited).
    """
    agents = tuple(agents)
    solution = selection.solve_network(params, agents, policy)

    grid_evaluations: dict[int, model.AgentEvaluation] = {}
    for i, agent in enumerate(agents):
        if not model.snr(params, agent).feasible:
            continue
        try:
            rho, power, _ = grid_solve_agent(params, agent, cfg)
        except EmptyRegionError:
            continue
        grid_evaluations[i] = model.evaluate_bs(params, agent, rho, power)
    oracle_best = enumerate_modes(params, agents, grid_evaluations, policy.min_k, cfg)

    scale = max(abs(oracle_best.total_energy), 1e-30)
    gap = (solution.total_energy - oracle_best.total_energy) / scale
    agreed = solution.total_energy <= oracle_best.total_energy * (
        1.0 + cfg.tolerance_rel_continuous
    )
    return OracleVerdict(
        agreed=agreed,
        oracle_energy=oracle_best.total_energy,
        solver_energy=solution.total_energy,
        worst_case_gap_rel=gap,
        counterexample=None if agreed else CounterexampleTrial(params, agents, policy),
    )


def _collect_feasible_agents(
    cfg: SimConfig, n: int, max_trials: int = 20_000
) -> list[AgentProfile]:
    """Draw trial fleets until ``n`` offload-feasible agents are found.

    Bails out with a clear error instead of spinning when the channel model
    admits (almost) no feasible agents.
    """
    agents: list[AgentProfile] = []
    for trial_index in range(max_trials):
        for agent in netsim.draw_agents(cfg, trial_index):
            if not model.snr(cfg.system, agent).feasible:
                continue
            if solver.feasible_region(cfg.system, agent).empty:
                continue
            agents.append(agent)
            if len(agents) == n:
                return agents
    raise ValueError(
        f"found only {len(agents)}/{n} offload-feasible agents in {max_trials} "
        "trials; the configured channel model admits too few"
    )


def run_battery(
    cfg: SimConfig,
    oracle_cfg: OracleConfig = OracleConfig(),
    n_continuous: int = 100,
    n_discrete_trials: int = 50,
    discrete_n_agents: int = 8,
) -> BatteryReport:
    """Full verification battery: both oracles plus the invariant checks.

    Uses the config's channel model and seed for every draw, so a failing
    battery is reproducible from the same config.
    """
    params = cfg.system
    checks: list[CheckResult] = []
    counterexample: CounterexampleTrial | None = None

    continuous_agents = _collect_feasible_agents(cfg, n_continuous)

    worst_grid_gap = -math.inf
    worst_latency = 0.0
    worst_power = 0.0
    worst_derivative = 0.0
    convexity_ok = True
    for agent in continuous_agents:
        sol = solver.solve_agent(params, agent)
        _, _, grid_energy = grid_solve_agent(params, agent, oracle_cfg)
        worst_grid_gap = max(
            worst_grid_gap, (sol.evaluation.e_bs - grid_energy) / grid_energy
        )
        worst_latency = max(
            worst_latency,
            abs(sol.evaluation.t_bs - params.deadline_s) / params.deadline_s,
        )
        worst_power = max(worst_power, sol.p_star / params.p_max_w - 1.0)

        region = sol.region
        rhos = np.geomspace(region.lo, region.hi, 200)
        energies = np.array(
            [solver.deadline_tight_energy(params, agent, float(r)) for r in rhos]
        )
        second = np.diff(energies, 2)
        if second.size and second.min() < -1e-9 * float(np.abs(energies).max()):
            convexity_ok = False

        for rho in np.geomspace(
            region.lo * 1.02 + 1e-12, region.hi * 0.98, 20
        ):
            rho = float(rho)
            if not region.lo < rho < region.hi:
                continue
            step = 1e-7 * rho
            fd = (
                solver.deadline_tight_energy(params, agent, rho + step)
                - solver.deadline_tight_energy(params, agent, rho - step)
            ) / (2.0 * step)
            analytic = solver.stationarity_residual(params, agent, rho) / rho
            scale = max(abs(fd), abs(analytic))
            if scale > 0.0:
                worst_derivative = max(worst_derivative, abs(analytic - fd) / scale)

    checks.append(
        CheckResult(
            "continuous-grid-optimality",
            worst_grid_gap <= PER_AGENT_GRID_TOL,
            f"worst solver-vs-grid gap {worst_grid_gap:.3e} (tol {PER_AGENT_GRID_TOL:.0e})",
        )
    )
    checks.append(
        CheckResult(
            "latency-tightness",
            worst_latency <= LATENCY_REL_TOL,
            f"worst |t_bs - T0|/T0 = {worst_latency:.3e} (tol {LATENCY_REL_TOL:.0e})",
        )
    )
    checks.append(
        CheckResult(
            "power-cap",
            worst_power <= POWER_CAP_REL_TOL,
            f"worst p*/p_max - 1 = {worst_power:.3e} (tol {POWER_CAP_REL_TOL:.0e})",
        )
    )
    checks.append(
        CheckResult(
            "energy-convexity",
            convexity_ok,
            "sampled second differences nonnegative within tolerance",
        )
    )
    checks.append(
        CheckResult(
            "derivative-cross-check",
            worst_derivative <= DERIVATIVE_REL_TOL,
            f"worst analytic-vs-finite-difference gap {worst_derivative:.3e} "
            f"(tol {DERIVATIVE_REL_TOL:.0e})",
        )
    )

    discrete_cfg = netsim.SimConfig(
        system=params,
        n_agents=discrete_n_agents,
        data_bits=cfg.data_bits,
        complexity=cfg.complexity,
        cpu_hz=cfg.cpu_hz,
        n_trials=max(1, n_discrete_trials),
        d_min_m=cfg.d_min_m,
        d_max_m=cfg.d_max_m,
        channel=cfg.channel,
        seed=cfg.seed,
        policy=cfg.policy,
    )
    worst_discrete = 0.0
    worst_end_to_end = -math.inf
    dominance_ok = True
    equivalence_ok = True
    for trial_index in range(n_discrete_trials):
        agents = netsim.draw_agents(discrete_cfg, trial_index)
        solutions = selection.solve_feasible_agents(params, agents)
        solution = selection.assemble_solution(params, agents, solutions, cfg.policy)

        exact = enumerate_modes(
            params,
            agents,
            {i: s.evaluation for i, s in solutions.items()},
            cfg.policy.min_k,
            oracle_cfg,
        )
        scale = max(abs(exact.total_energy), 1e-30)
        worst_discrete = max(
            worst_discrete, abs(solution.total_energy - exact.total_energy) / scale
        )

        verdict = verify(params, agents, oracle_cfg, cfg.policy)
        worst_end_to_end = max(worst_end_to_end, verdict.worst_case_gap_rel)
        if not verdict.agreed and counterexample is None:
            counterexample = verdict.counterexample

        local = netsim.run_strategy("local_only", params, agents, cfg.policy)
        snr_based = netsim.run_strategy(
            "snr_based", params, agents, cfg.policy, solutions=solutions
        )
        if solution.total_energy > local.total_energy_j + 1e-9:
            dominance_ok = False
        if solution.total_energy > snr_based.total_energy_j + 1e-9:
            dominance_ok = False

        reformulated = dict(solution.objective_trace)[solution.k_star]
        if abs(reformulated - solution.total_energy) > 1e-12 * max(
            abs(solution.total_energy), 1e-30
        ):
            equivalence_ok = False

    checks.append(
        CheckResult(
            "discrete-enumeration-exactness",
            worst_discrete <= oracle_cfg.tolerance_rel_discrete,
            f"worst gap vs exhaustive modes {worst_discrete:.3e} "
            f"(tol {oracle_cfg.tolerance_rel_discrete:.0e})",
        )
    )
    checks.append(
        CheckResult(
            "end-to-end-grid-agreement",
            counterexample is None,
            f"worst end-to-end gap {worst_end_to_end:.3e} "
            f"(tol {oracle_cfg.tolerance_rel_continuous:.0e})",
        )
    )
    checks.append(
        CheckResult(
            "baseline-dominance",
            dominance_ok,
            "proposed <= local-only and <= snr-based on every trial (1e-9 abs)",
        )
    )
    checks.append(
        CheckResult(
            "objective-form-equivalence",
            equivalence_ok,
            "prefix-sum candidate energy matches recomputed total (1e-12 rel)",
        )
    )

    return BatteryReport(checks=tuple(checks), counterexample=counterexample)
