"""Energy-minimal semantic offloading and collaboration planning.

Library layout:

- :mod:`semoff.model` — closed-form time/energy formulas over value types.
- :mod:`semoff.solver` — per-agent convex subproblem (compression ratio and
  transmit power under a hard deadline and power cap).
- :mod:`semoff.selection` — greedy collaboration-scale search and mode vector.
- :mod:`semoff.oracle` — brute-force verifiers (ratio grid, mode enumeration).
- :mod:`semoff.netsim` — Monte Carlo experiment harness and persistence.
- :mod:`semoff.config` — strict config-file ingestion (single unit-conversion
  point) and replayable instance dumps.
- :mod:`semoff.cli` — ``semoff`` command line front end.
"""

from .model import (
    AgentEvaluation,
    AgentProfile,
    LinkState,
    ModelDomainError,
    SystemParams,
)
from .selection import NetworkSolution, SelectionPolicy, solve_network
from .solver import AgentSolution, FeasibleRegion, solve_agent

__version__ = "0.1.0"

__all__ = [
    "AgentEvaluation",
    "AgentProfile",
    "AgentSolution",
    "FeasibleRegion",
    "LinkState",
    "ModelDomainError",
    "NetworkSolution",
    "SelectionPolicy",
    "SystemParams",
    "solve_agent",
    "solve_network",
    "__version__",
]
