"""Closed-form time and energy models for dual-mode sensing agents.

A fleet of agents shares an uplink to a base station. Each agent either
processes its raw sensor data locally, or compresses it down to a tunable
fraction of the original bits and uploads the compressed payload so the task
executes collaboratively. Collaborative execution enjoys a scale-dependent
gain following the universal scalability law (diminishing returns plus a
contention penalty).

Everything here is a pure function over immutable value types; solvers and
simulators compose these evaluations. All quantities are strict SI (bits,
Hz, W, J, s); channel gains are dimensionless power ratios. Out-of-domain
inputs raise :class:`ModelDomainError` rather than returning sentinels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

LN2 = math.log(2.0)


class ModelDomainError(ValueError):
    """An input lies outside the mathematical domain of a formula."""


class InconsistencyError(ValueError):
    """Jointly supplied arguments contradict each other."""


@dataclass(frozen=True, slots=True)
class SystemParams:
    """Network-wide constants shared by every agent.

    ``switched_cap`` is the effective switched-capacitance coefficient of the
    CPU energy model (J.s^2 per cycle^3, folded units); ``usl_beta`` is the
    fraction of task energy compressible through collaboration and ``usl_xi``
    the per-peer contention penalty.
    """

    bandwidth_hz: float
    noise_w: float
    p_max_w: float
    snr_threshold: float
    deadline_s: float
    rho_min: float
    base_task_energy_j: float
    usl_beta: float
    usl_xi: float
    switched_cap: float
    local_cycles_per_bit: float

    def __post_init__(self) -> None:
        for name in (
            "bandwidth_hz",
            "noise_w",
            "p_max_w",
            "snr_threshold",
            "deadline_s",
            "base_task_energy_j",
            "switched_cap",
            "local_cycles_per_bit",
        ):
            value = getattr(self, name)
            if not value > 0.0:
                raise ModelDomainError(f"{name} must be > 0, got {value!r}")
        if not 0.0 < self.rho_min <= 1.0:
            raise ModelDomainError(f"rho_min must be in (0, 1], got {self.rho_min!r}")
        if not 0.0 < self.usl_beta < 1.0:
            raise ModelDomainError(f"usl_beta must be in (0, 1), got {self.usl_beta!r}")
        if not self.usl_xi >= 0.0:
            raise ModelDomainError(f"usl_xi must be >= 0, got {self.usl_xi!r}")


@dataclass(frozen=True, slots=True)
class AgentProfile:
    """Per-agent workload and radio state.

    ``complexity`` is the compression cost in CPU cycles per raw bit;
    ``channel_gain`` is the uplink power gain |h|^2. ``distance_m`` is kept
    for provenance only and never enters a formula.
    """

    data_bits: float
    complexity: float
    cpu_hz: float
    channel_gain: float
    distance_m: float | None = None

    def __post_init__(self) -> None:
        for name in ("data_bits", "complexity", "cpu_hz", "channel_gain"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ModelDomainError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True, slots=True)
class LinkState:
    """Max-power SNR of an uplink and whether it clears the offload gate."""

    snr: float
    feasible: bool


@dataclass(frozen=True, slots=True)
class AgentEvaluation:
    """Every derived time and energy for one candidate decision (rho, p, mode).

    For local-mode evaluations the offload-path fields are all zero (nothing
    is compressed or transmitted), so ``delta_save`` is only meaningful on
    offload-mode evaluations.
    """

    mode: int
    rho: float
    power_w: float
    compressed_bits: float
    t_comp: float
    t_comm: float
    t_bs: float
    t_local: float
    e_comp: float
    e_comm: float
    e_bs: float
    e_local: float
    delta_save: float


def snr(params: SystemParams, agent: AgentProfile) -> LinkState:
    """Max-power SNR and the offload-feasibility gate (inclusive threshold)."""
    gamma = params.p_max_w * agent.channel_gain / params.noise_w
    return LinkState(snr=gamma, feasible=gamma >= params.snr_threshold)


def compression_time(agent: AgentProfile, rho: float) -> float:
    """Seconds to compress the raw payload down to fraction ``rho``.

    Cost grows with the log of the compression depth; rho = 1 is free.
    """
    if not 0.0 < rho <= 1.0:
        raise ModelDomainError(f"rho must be in (0, 1], got {rho!r}")
    return -agent.complexity * agent.data_bits * math.log(rho) / agent.cpu_hz


def achievable_rate(params: SystemParams, agent: AgentProfile, power_w: float) -> float:
    """Shannon uplink rate in bit/s at transmit power ``power_w``."""
    if not power_w > 0.0:
        raise ModelDomainError(f"power_w must be > 0, got {power_w!r}")
    return params.bandwidth_hz * math.log2(
        1.0 + power_w * agent.channel_gain / params.noise_w
    )


def power_for_rate(params: SystemParams, agent: AgentProfile, rate_bps: float) -> float:
    """Transmit power that achieves exactly ``rate_bps`` (inverse Shannon rate)."""
    if not rate_bps > 0.0:
        raise ModelDomainError(f"rate_bps must be > 0, got {rate_bps!r}")
    return (params.noise_w / agent.channel_gain) * (
        math.exp(rate_bps / params.bandwidth_hz * LN2) - 1.0
    )


def comm_time(agent: AgentProfile, rho: float, rate_bps: float) -> float:
    """Seconds to upload the compressed payload at the given rate."""
    if not rate_bps > 0.0:
        raise ModelDomainError(f"rate_bps must be > 0, got {rate_bps!r}")
    if not 0.0 < rho <= 1.0:
        raise ModelDomainError(f"rho must be in (0, 1], got {rho!r}")
    return rho * agent.data_bits / rate_bps


def local_time(params: SystemParams, agent: AgentProfile) -> float:
    """Seconds to process the raw payload entirely on the agent CPU."""
    return params.local_cycles_per_bit * agent.data_bits / agent.cpu_hz


def bs_energy(
    params: SystemParams, agent: AgentProfile, rho: float, power_w: float
) -> tuple[float, float, float]:
    """Offload-path energy split ``(e_comp, e_comm, e_bs)`` in joules.

    Compression energy is the switched-capacitance CPU model over the
    compression cycles; transmission energy is power times upload time at
    the Shannon rate for ``power_w``.
    """
    e_comp = (
        -params.switched_cap
        * agent.complexity
        * agent.data_bits
        * agent.cpu_hz**2
        * math.log(rho)
    )
    t_comm = comm_time(agent, rho, achievable_rate(params, agent, power_w))
    e_comm = power_w * t_comm
    return e_comp, e_comm, e_comp + e_comm


def local_energy(params: SystemParams, agent: AgentProfile) -> float:
    """Joules to process the raw payload locally (switched-capacitance model)."""
    return (
        params.switched_cap
        * params.local_cycles_per_bit
        * agent.data_bits
        * agent.cpu_hz**2
    )


def usl_gain(params: SystemParams, k: int) -> float:
    """Universal-scalability-law task-energy factor for a size-``k`` cluster.

    Equals 1 at k = 1, dips as the compressible share is amortized across
    peers, then rises again once the contention term dominates.
    """
    if k < 1:
        raise ModelDomainError(f"collaboration scale must be >= 1, got {k!r}")
    return (1.0 - params.usl_beta) + params.usl_beta / k + params.usl_xi * (k - 1)


def collaboration_saving(params: SystemParams, k: int) -> float:
    """Task energy a size-``k`` cluster saves versus ``k`` independent runs.

    Negative once contention pushes the scalability factor above 1.
    """
    return k * params.base_task_energy_j * (1.0 - usl_gain(params, k))


def task_energy(params: SystemParams, mode: int, k: int = 1) -> float:
    """Task-execution energy for one agent: scaled by the cluster gain when
    collaborating, the standalone baseline otherwise."""
    if mode not in (0, 1):
        raise ModelDomainError(f"mode must be 0 or 1, got {mode!r}")
    if mode == 0:
        return params.base_task_energy_j
    return params.base_task_energy_j * usl_gain(params, k)


def evaluate_bs(
    params: SystemParams, agent: AgentProfile, rho: float, power_w: float
) -> AgentEvaluation:
    """Full evaluation of an offload decision ``(rho, power_w)``."""
    rate = achievable_rate(params, agent, power_w)
    t_cp = compression_time(agent, rho)
    t_cm = comm_time(agent, rho, rate)
    e_comp, e_comm, e_total = bs_energy(params, agent, rho, power_w)
    e_loc = local_energy(params, agent)
    return AgentEvaluation(
        mode=1,
        rho=rho,
        power_w=power_w,
        compressed_bits=rho * agent.data_bits,
        t_comp=t_cp,
        t_comm=t_cm,
        t_bs=t_cp + t_cm,
        t_local=local_time(params, agent),
        e_comp=e_comp,
        e_comm=e_comm,
        e_bs=e_total,
        e_local=e_loc,
        delta_save=e_loc - e_total,
    )


def evaluate_local(params: SystemParams, agent: AgentProfile) -> AgentEvaluation:
    """Evaluation of the stay-local decision; offload-path fields are zero."""
    e_loc = local_energy(params, agent)
    return AgentEvaluation(
        mode=0,
        rho=1.0,
        power_w=0.0,
        compressed_bits=agent.data_bits,
        t_comp=0.0,
        t_comm=0.0,
        t_bs=0.0,
        t_local=local_time(params, agent),
        e_comp=0.0,
        e_comm=0.0,
        e_bs=0.0,
        e_local=e_loc,
        delta_save=e_loc,
    )


def network_energy(
    params: SystemParams, evaluations: Sequence[AgentEvaluation], k: int
) -> float:
    """Total fleet energy: processing plus task execution across all agents.

    ``k`` must equal the number of collaborating (mode 1) evaluations; it
    determines the shared cluster gain applied to every collaborator.
    """
    n_collab = sum(e.mode for e in evaluations)
    if k != n_collab:
        raise InconsistencyError(
            f"k={k} does not match the {n_collab} collaborating evaluations"
        )
    q = params.base_task_energy_j
    task_collab = q * usl_gain(params, k) if k >= 1 else 0.0
    total = 0.0
    for ev in evaluations:
        if ev.mode == 1:
            total += ev.e_bs + task_collab
        else:
            total += ev.e_local + q
    return total
