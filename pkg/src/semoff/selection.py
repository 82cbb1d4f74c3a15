"""Greedy collaboration-scale search and mode assignment for the fleet.

Once every link-feasible agent has its optimal offload decision, the fleet
objective decomposes: for a fixed cluster size the best choice is the agents
with the largest energy savings, so sorting by per-agent saving and scanning
prefix sums over all candidate sizes yields the exact discrete optimum (no
integrality gap). The all-local outcome is always among the candidates, so
collaboration is never forced unless explicitly requested.

Cost for M feasible agents: one convex solve each (a few bisections at
fixed tolerance), an M log M sort, and a linear candidate scan, against the
2^M mode vectors a direct enumeration would visit (see the oracle module,
which does exactly that on small instances to certify this shortcut).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from . import model, solver
from .model import AgentProfile, SystemParams

LOCAL_LATENCY_POLICIES = ("ignore", "warn", "enforce")


@dataclass(frozen=True, slots=True)
class RankedAgent:
    """One feasible agent's position in the descending-savings order."""

    agent_index: int
    delta_save: float
    rank: int


@dataclass(frozen=True, slots=True)
class SelectionPolicy:
    """Knobs governing the discrete search.

    ``min_k`` is the smallest admissible cluster (clusters of one are
    excluded by default); ``force_collaboration`` drops the all-local
    candidate whenever a cluster is admissible. ``local_latency`` states how
    to treat local-mode agents whose processing time exceeds the deadline:
    ``ignore`` admits them (the default, without which the reference
    parameter set has no feasible trials), ``warn`` admits and reports,
    ``enforce`` marks the solution infeasible.
    """

    min_k: int = 2
    force_collaboration: bool = False
    local_latency: str = "ignore"

    def __post_init__(self) -> None:
        if self.min_k < 1:
            raise ValueError(f"min_k must be >= 1, got {self.min_k!r}")
        if self.local_latency not in LOCAL_LATENCY_POLICIES:
            raise ValueError(
                f"local_latency must be one of {LOCAL_LATENCY_POLICIES}, "
                f"got {self.local_latency!r}"
            )


@dataclass(frozen=True, slots=True)
class NetworkSolution:
    """Fleet-wide decision: mode vector, cluster size and energy audit.

    ``objective_trace`` records the candidate total energy per evaluated
    cluster size (0 meaning all-local). ``latency_violations`` lists agents
    left in local mode whose processing time exceeds the deadline; whether
    that voids the solution is the caller's policy. ``per_agent`` is empty
    for bare scale selections and populated by :func:`solve_network`.
    """

    modes: tuple[int, ...]
    k_star: int
    total_energy: float
    per_agent: tuple[model.AgentEvaluation, ...]
    m_feasible: int
    objective_trace: tuple[tuple[int, float], ...]
    latency_violations: tuple[int, ...] = field(default=())


def rank_agents(solutions: Mapping[int, solver.AgentSolution]) -> list[RankedAgent]:
    """Sort feasible agents by descending energy saving, ties by index."""
    for index, sol in solutions.items():
        if not sol.bs_feasible:
            raise ValueError(f"agent {index} is not offload-feasible")
    ordered = sorted(
        solutions.items(), key=lambda item: (-item[1].evaluation.delta_save, item[0])
    )
    return [
        RankedAgent(agent_index=index, delta_save=sol.evaluation.delta_save, rank=j + 1)
        for j, (index, sol) in enumerate(ordered)
    ]


def select_scale(
    params: SystemParams,
    ranked: list[RankedAgent],
    local_baseline_energy: float,
    n_agents: int,
    policy: SelectionPolicy = SelectionPolicy(),
) -> NetworkSolution:
    """Pick the cluster size minimizing total fleet energy.

    Candidate totals come from the all-local baseline minus the cluster's
    task-energy saving minus the prefix sum of the top savings; ties resolve
    toward the smaller cluster, so runs are reproducible.
    """
    m = len(ranked)
    candidates: list[int] = []
    if not (policy.force_collaboration and m >= policy.min_k):
        candidates.append(0)
    candidates.extend(range(policy.min_k, m + 1))

    prefix = [0.0]
    for entry in ranked:
        prefix.append(prefix[-1] + entry.delta_save)

    trace: list[tuple[int, float]] = []
    best_k = candidates[0]
    best_energy = float("inf")
    for k in candidates:
        saving = collaboration = 0.0
        if k > 0:
            collaboration = model.collaboration_saving(params, k)
            saving = prefix[k]
        energy = local_baseline_energy - collaboration - saving
        trace.append((k, energy))
        if energy < best_energy:
            best_k, best_energy = k, energy

    modes = [0] * n_agents
    for entry in ranked[:best_k]:
        modes[entry.agent_index] = 1
    return NetworkSolution(
        modes=tuple(modes),
        k_star=best_k,
        total_energy=best_energy,
        per_agent=(),
        m_feasible=m,
        objective_trace=tuple(trace),
    )


def solve_feasible_agents(
    params: SystemParams, agents: list[AgentProfile] | tuple[AgentProfile, ...]
) -> dict[int, solver.AgentSolution]:
    """Gate by SNR, solve each surviving agent, drop empty-region agents.

    Agents whose feasible region is empty are treated exactly like agents
    that fail the SNR gate: restricted to local mode.
    """
    feasible: dict[int, solver.AgentSolution] = {}
    for index, agent in enumerate(agents):
        if not model.snr(params, agent).feasible:
            continue
        sol = solver.solve_agent(params, agent)
        if sol.bs_feasible:
            feasible[index] = sol
    return feasible


def assemble_solution(
    params: SystemParams,
    agents: list[AgentProfile] | tuple[AgentProfile, ...],
    solutions: Mapping[int, solver.AgentSolution],
    policy: SelectionPolicy = SelectionPolicy(),
) -> NetworkSolution:
    """Rank, pick the scale, and materialize the full fleet solution.

    The reported total is recomputed from the per-agent evaluations; the
    prefix-sum candidate value survives in the objective trace, so the two
    accounting paths can be audited against each other.
    """
    ranked = rank_agents(dict(solutions))
    baseline = sum(
        model.local_energy(params, agent) + params.base_task_energy_j
        for agent in agents
    )
    skeleton = select_scale(params, ranked, baseline, len(agents), policy)

    evaluations = tuple(
        solutions[i].evaluation if mode == 1 else model.evaluate_local(params, agents[i])
        for i, mode in enumerate(skeleton.modes)
    )
    total = model.network_energy(params, evaluations, skeleton.k_star)
    violations = tuple(
        i
        for i, ev in enumerate(evaluations)
        if ev.mode == 0 and ev.t_local > params.deadline_s
    )
    return replace(
        skeleton,
        per_agent=evaluations,
        total_energy=total,
        latency_violations=violations,
    )


def solve_network(
    params: SystemParams,
    agents: list[AgentProfile] | tuple[AgentProfile, ...],
    policy: SelectionPolicy = SelectionPolicy(),
) -> NetworkSolution:
    """Full pipeline: SNR gate, per-agent solve, ranking, scale search."""
    return assemble_solution(params, agents, solve_feasible_agents(params, agents), policy)
