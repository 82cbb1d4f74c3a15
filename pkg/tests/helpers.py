"""Shared test fixtures: reference parameters and random agent factories."""

from __future__ import annotations

import numpy as np

from semoff import model, solver
from semoff.config import default_run_config

TABLE_PARAMS = default_run_config().sim.system


def table_agent(channel_gain: float, distance_m: float | None = None) -> model.AgentProfile:
    """Reference-protocol agent (10 Mbit payload, 10 cycles/bit, 1 GHz CPU)."""
    return model.AgentProfile(
        data_bits=1e7,
        complexity=10.0,
        cpu_hz=1e9,
        channel_gain=channel_gain,
        distance_m=distance_m,
    )


def random_feasible_agents(
    params: model.SystemParams,
    n: int,
    seed: int,
    d_range: tuple[float, float] = (50.0, 400.0),
) -> list[model.AgentProfile]:
    """Draw agents from the default channel law until ``n`` are offload-feasible.

    The distance range defaults to the near band where the deadline is
    actually satisfiable under the power cap.
    """
    rng = np.random.default_rng(seed)
    agents: list[model.AgentProfile] = []
    while len(agents) < n:
        d = float(rng.uniform(*d_range))
        gain = float(1e-3 * d**-3.0 * rng.standard_exponential())
        if gain <= 0.0:
            continue
        agent = table_agent(gain, d)
        if not model.snr(params, agent).feasible:
            continue
        if solver.feasible_region(params, agent).empty:
            continue
        agents.append(agent)
    return agents


def random_mixed_agents(
    params: model.SystemParams,
    n: int,
    seed: int,
    d_range: tuple[float, float] = (50.0, 1000.0),
) -> list[model.AgentProfile]:
    """Draw ``n`` agents across the full distance band, feasible or not."""
    rng = np.random.default_rng(seed)
    agents: list[model.AgentProfile] = []
    while len(agents) < n:
        d = float(rng.uniform(*d_range))
        gain = float(1e-3 * d**-3.0 * rng.standard_exponential())
        if gain <= 0.0:
            continue
        agents.append(table_agent(gain, d))
    return agents
