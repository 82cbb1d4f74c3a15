"""Strict config-file ingestion and replayable instance dumps.

Configs are YAML (JSON is accepted too, being a YAML subset). Every key is
validated against the schema; unknown keys are rejected with their location
rather than silently ignored. This module is the single unit-conversion
point: payload sizes may be written in Mbit (``data_mbits``) and are turned
into bits here, including sweep values on the data-size axis. Dumps emitted
for replay always use SI keys (``data_bits``) so they round-trip bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .model import AgentProfile, SystemParams
from .netsim import (
    STRATEGY_NAMES,
    ChannelModel,
    SimConfig,
    SweepSpec,
)
from .oracle import OracleConfig
from .selection import SelectionPolicy

BITS_PER_MBIT = 1e6


class ConfigError(Exception):
    """A config document is malformed, inconsistent or out of range."""


@dataclass(frozen=True, slots=True)
class OutputOptions:
    """Report-path knobs: data-quality gate and optional per-trial dump."""

    max_infeasible_rate: float = 0.0
    per_trial_dump: bool = False
    verify_on_solve: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.max_infeasible_rate <= 1.0:
            raise ValueError("max_infeasible_rate must be in [0, 1]")


@dataclass(frozen=True, slots=True)
class VerifySettings:
    """Sizes of the verification battery run by the ``verify`` subcommand."""

    n_continuous: int = 100
    n_trials: int = 50
    n_agents: int = 8

    def __post_init__(self) -> None:
        if self.n_continuous < 1 or self.n_trials < 1 or self.n_agents < 1:
            raise ValueError("verify sizes must be >= 1")


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Everything a CLI invocation needs."""

    sim: SimConfig
    oracle: OracleConfig
    output: OutputOptions
    verify: VerifySettings


_SYSTEM_KEYS = (
    "bandwidth_hz",
    "noise_w",
    "p_max_w",
    "snr_threshold",
    "deadline_s",
    "rho_min",
    "base_task_energy_j",
    "usl_beta",
    "usl_xi",
    "switched_cap",
    "local_cycles_per_bit",
)

_SIM_KEYS = (
    "n_agents",
    "data_mbits",
    "data_bits",
    "complexity_cycles_per_bit",
    "cpu_hz",
    "n_trials",
    "d_min_m",
    "d_max_m",
    "seed",
)

_CHANNEL_KEYS = ("pathloss_ref_gain", "pathloss_exponent", "fading")

_SWEEP_KEYS = ("axis", "values")

_POLICY_KEYS = ("min_k", "force_collaboration", "local_latency", "fixed_tx_power_w")

_AGENT_KEYS = (
    "data_mbits",
    "data_bits",
    "complexity_cycles_per_bit",
    "cpu_hz",
    "channel_gain",
    "distance_m",
)

_ORACLE_KEYS = (
    "rho_grid_points",
    "subset_max_n",
    "tolerance_rel_continuous",
    "tolerance_rel_discrete",
)

_OUTPUT_KEYS = ("max_infeasible_rate", "per_trial_dump", "verify_on_solve")

_VERIFY_KEYS = ("n_continuous", "n_trials", "n_agents")

_TOP_KEYS = (
    "system",
    "sim",
    "channel",
    "sweep",
    "strategies",
    "policies",
    "agents",
    "oracle",
    "output",
    "verify",
)

# Reference experiment protocol, SI units throughout.
DEFAULT_SYSTEM = SystemParams(
    bandwidth_hz=1e6,
    noise_w=4e-11,
    p_max_w=1.0,
    snr_threshold=1.0,
    deadline_s=0.7,
    rho_min=0.1,
    base_task_energy_j=0.1,
    usl_beta=0.4,
    usl_xi=0.008,
    switched_cap=1e-28,
    local_cycles_per_bit=100.0,
)


def default_run_config() -> RunConfig:
    return RunConfig(
        sim=SimConfig(system=DEFAULT_SYSTEM),
        oracle=OracleConfig(),
        output=OutputOptions(),
        verify=VerifySettings(),
    )


def _require_mapping(node: Any, where: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, Mapping):
        raise ConfigError(f"{where} must be a mapping, got {type(node).__name__}")
    return dict(node)


def _reject_unknown(section: Mapping[str, Any], allowed: tuple[str, ...], where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}")


def _number(section: Mapping[str, Any], key: str, where: str, default: float) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(section: Mapping[str, Any], key: str, where: str, default: int) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {value!r}")
    return value


def _boolean(section: Mapping[str, Any], key: str, where: str, default: bool) -> bool:
    value = section.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{where}.{key} must be a boolean, got {value!r}")
    return value


def _string(section: Mapping[str, Any], key: str, where: str, default: str) -> str:
    value = section.get(key, default)
    if not isinstance(value, str):
        raise ConfigError(f"{where}.{key} must be a string, got {value!r}")
    return value


def _data_bits(section: Mapping[str, Any], where: str, default_bits: float) -> float:
    """The one place Mbit turns into bits."""
    if "data_bits" in section and "data_mbits" in section:
        raise ConfigError(f"{where}: give data_bits or data_mbits, not both")
    if "data_bits" in section:
        return _number(section, "data_bits", where, default_bits)
    if "data_mbits" in section:
        return _number(section, "data_mbits", where, 0.0) * BITS_PER_MBIT
    return default_bits


def _parse_system(section: Mapping[str, Any]) -> SystemParams:
    _reject_unknown(section, _SYSTEM_KEYS, "system")
    kwargs = {
        key: _number(section, key, "system", getattr(DEFAULT_SYSTEM, key))
        for key in _SYSTEM_KEYS
    }
    try:
        return SystemParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _parse_sweep(section: Mapping[str, Any]) -> SweepSpec:
    _reject_unknown(section, _SWEEP_KEYS, "sweep")
    axis = _string(section, "axis", "sweep", "")
    raw_values = section.get("values")
    if not isinstance(raw_values, (list, tuple)) or not raw_values:
        raise ConfigError("sweep.values must be a non-empty list of numbers")
    values: list[float] = []
    for v in raw_values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"sweep.values entries must be numbers, got {v!r}")
        values.append(v)
    display = tuple(values)
    if axis == "D":
        si = tuple(float(v) * BITS_PER_MBIT for v in values)
    else:
        si = tuple(float(v) for v in values)
    try:
        return SweepSpec(axis=axis, values=si, display_values=display)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from exc


def _parse_agent(entry: Any, index: int, defaults: SimConfig) -> AgentProfile:
    where = f"agents[{index}]"
    section = _require_mapping(entry, where)
    _reject_unknown(section, _AGENT_KEYS, where)
    if "channel_gain" not in section:
        raise ConfigError(f"{where}: channel_gain is required")
    distance = section.get("distance_m")
    if distance is not None:
        distance = _number(section, "distance_m", where, 0.0)
    try:
        return AgentProfile(
            data_bits=_data_bits(section, where, defaults.data_bits),
            complexity=_number(
                section, "complexity_cycles_per_bit", where, defaults.complexity
            ),
            cpu_hz=_number(section, "cpu_hz", where, defaults.cpu_hz),
            channel_gain=_number(section, "channel_gain", where, 0.0),
            distance_m=distance,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_config(doc: Any, source: str = "<config>") -> RunConfig:
    """Validate a parsed document and build the run configuration."""
    root = _require_mapping(doc, source)
    _reject_unknown(root, _TOP_KEYS, source)

    system = _parse_system(_require_mapping(root.get("system"), "system"))

    sim_section = _require_mapping(root.get("sim"), "sim")
    _reject_unknown(sim_section, _SIM_KEYS, "sim")

    channel_section = _require_mapping(root.get("channel"), "channel")
    _reject_unknown(channel_section, _CHANNEL_KEYS, "channel")
    try:
        channel = ChannelModel(
            pathloss_ref_gain=_number(
                channel_section, "pathloss_ref_gain", "channel", 1e-3
            ),
            pathloss_exponent=_number(
                channel_section, "pathloss_exponent", "channel", 3.0
            ),
            fading=_string(channel_section, "fading", "channel", "rayleigh"),
        )
    except ValueError as exc:
        raise ConfigError(f"channel: {exc}") from exc

    policies_section = _require_mapping(root.get("policies"), "policies")
    _reject_unknown(policies_section, _POLICY_KEYS, "policies")
    try:
        policy = SelectionPolicy(
            min_k=_integer(policies_section, "min_k", "policies", 2),
            force_collaboration=_boolean(
                policies_section, "force_collaboration", "policies", False
            ),
            local_latency=_string(policies_section, "local_latency", "policies", "ignore"),
        )
    except ValueError as exc:
        raise ConfigError(f"policies: {exc}") from exc
    fixed_tx_power_w = _number(policies_section, "fixed_tx_power_w", "policies", 0.5)

    sweep = None
    if root.get("sweep") is not None:
        sweep = _parse_sweep(_require_mapping(root.get("sweep"), "sweep"))

    strategies_node = root.get("strategies")
    if strategies_node is None:
        strategies: tuple[str, ...] = STRATEGY_NAMES
    else:
        if not isinstance(strategies_node, (list, tuple)) or not all(
            isinstance(s, str) for s in strategies_node
        ):
            raise ConfigError("strategies must be a list of strategy names")
        strategies = tuple(strategies_node)

    defaults = SimConfig(system=system)
    try:
        sim = SimConfig(
            system=system,
            n_agents=_integer(sim_section, "n_agents", "sim", defaults.n_agents),
            data_bits=_data_bits(sim_section, "sim", defaults.data_bits),
            complexity=_number(
                sim_section, "complexity_cycles_per_bit", "sim", defaults.complexity
            ),
            cpu_hz=_number(sim_section, "cpu_hz", "sim", defaults.cpu_hz),
            n_trials=_integer(sim_section, "n_trials", "sim", defaults.n_trials),
            d_min_m=_number(sim_section, "d_min_m", "sim", defaults.d_min_m),
            d_max_m=_number(sim_section, "d_max_m", "sim", defaults.d_max_m),
            channel=channel,
            seed=_integer(sim_section, "seed", "sim", defaults.seed),
            sweep=sweep,
            strategies=strategies,
            policy=policy,
            fixed_tx_power_w=fixed_tx_power_w,
            explicit_agents=None,
        )
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from exc

    agents_node = root.get("agents")
    if agents_node is not None:
        if not isinstance(agents_node, (list, tuple)):
            raise ConfigError("agents must be a list of agent mappings")
        explicit = tuple(
            _parse_agent(entry, i, sim) for i, entry in enumerate(agents_node)
        )
        sim = replace(sim, explicit_agents=explicit)

    oracle_section = _require_mapping(root.get("oracle"), "oracle")
    _reject_unknown(oracle_section, _ORACLE_KEYS, "oracle")
    try:
        oracle_cfg = OracleConfig(
            rho_grid_points=_integer(oracle_section, "rho_grid_points", "oracle", 2000),
            subset_max_n=_integer(oracle_section, "subset_max_n", "oracle", 12),
            tolerance_rel_continuous=_number(
                oracle_section, "tolerance_rel_continuous", "oracle", 1e-3
            ),
            tolerance_rel_discrete=_number(
                oracle_section, "tolerance_rel_discrete", "oracle", 1e-6
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"oracle: {exc}") from exc

    output_section = _require_mapping(root.get("output"), "output")
    _reject_unknown(output_section, _OUTPUT_KEYS, "output")
    try:
        output = OutputOptions(
            max_infeasible_rate=_number(
                output_section, "max_infeasible_rate", "output", 0.0
            ),
            per_trial_dump=_boolean(output_section, "per_trial_dump", "output", False),
            verify_on_solve=_boolean(output_section, "verify_on_solve", "output", False),
        )
    except ValueError as exc:
        raise ConfigError(f"output: {exc}") from exc

    verify_section = _require_mapping(root.get("verify"), "verify")
    _reject_unknown(verify_section, _VERIFY_KEYS, "verify")
    try:
        verify = VerifySettings(
            n_continuous=_integer(verify_section, "n_continuous", "verify", 100),
            n_trials=_integer(verify_section, "n_trials", "verify", 50),
            n_agents=_integer(verify_section, "n_agents", "verify", 8),
        )
    except ValueError as exc:
        raise ConfigError(f"verify: {exc}") from exc

    return RunConfig(sim=sim, oracle=oracle_cfg, output=output, verify=verify)


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse config text: JSON first (exact float grammar), then YAML.

    Dumps emitted by this package are JSON with bare-exponent floats like
    ``4e-11``, which YAML 1.1 would read back as strings; routing through the
    JSON parser first keeps replay bit-exact.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {source}: {exc}") from exc
    return parse_config(doc, source=source)


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a YAML/JSON config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def _system_to_dict(params: SystemParams) -> dict:
    return {key: getattr(params, key) for key in _SYSTEM_KEYS}


def _agent_to_dict(agent: AgentProfile) -> dict:
    entry = {
        "data_bits": agent.data_bits,
        "complexity_cycles_per_bit": agent.complexity,
        "cpu_hz": agent.cpu_hz,
        "channel_gain": agent.channel_gain,
    }
    if agent.distance_m is not None:
        entry["distance_m"] = agent.distance_m
    return entry


def _policy_to_dict(policy: SelectionPolicy, fixed_tx_power_w: float) -> dict:
    return {
        "min_k": policy.min_k,
        "force_collaboration": policy.force_collaboration,
        "local_latency": policy.local_latency,
        "fixed_tx_power_w": fixed_tx_power_w,
    }


def config_echo(run_cfg: RunConfig) -> dict:
    """Config-file-format echo of a run configuration.

    Parsing the echo reproduces the configuration bit-exactly (SI keys are
    used for payload sizes, so no unit conversion is re-applied).
    """
    sim = run_cfg.sim
    doc: dict[str, Any] = {
        "system": _system_to_dict(sim.system),
        "sim": {
            "n_agents": sim.n_agents,
            "data_bits": sim.data_bits,
            "complexity_cycles_per_bit": sim.complexity,
            "cpu_hz": sim.cpu_hz,
            "n_trials": sim.n_trials,
            "d_min_m": sim.d_min_m,
            "d_max_m": sim.d_max_m,
            "seed": sim.seed,
        },
        "channel": {
            "pathloss_ref_gain": sim.channel.pathloss_ref_gain,
            "pathloss_exponent": sim.channel.pathloss_exponent,
            "fading": sim.channel.fading,
        },
        "strategies": list(sim.strategies),
        "policies": _policy_to_dict(sim.policy, sim.fixed_tx_power_w),
        "oracle": {
            "rho_grid_points": run_cfg.oracle.rho_grid_points,
            "subset_max_n": run_cfg.oracle.subset_max_n,
            "tolerance_rel_continuous": run_cfg.oracle.tolerance_rel_continuous,
            "tolerance_rel_discrete": run_cfg.oracle.tolerance_rel_discrete,
        },
        "output": {
            "max_infeasible_rate": run_cfg.output.max_infeasible_rate,
            "per_trial_dump": run_cfg.output.per_trial_dump,
            "verify_on_solve": run_cfg.output.verify_on_solve,
        },
        "verify": {
            "n_continuous": run_cfg.verify.n_continuous,
            "n_trials": run_cfg.verify.n_trials,
            "n_agents": run_cfg.verify.n_agents,
        },
    }
    if sim.sweep is not None:
        doc["sweep"] = {
            "axis": sim.sweep.axis,
            "values": list(sim.sweep.display_values),
        }
    if sim.explicit_agents is not None:
        doc["agents"] = [_agent_to_dict(a) for a in sim.explicit_agents]
    return doc


def instance_to_dict(
    params: SystemParams,
    agents: tuple[AgentProfile, ...] | list[AgentProfile],
    policy: SelectionPolicy = SelectionPolicy(),
    fixed_tx_power_w: float = 0.5,
) -> dict:
    """Replayable explicit-instance document (solve-subcommand format)."""
    return {
        "system": _system_to_dict(params),
        "policies": _policy_to_dict(policy, fixed_tx_power_w),
        "agents": [_agent_to_dict(a) for a in agents],
    }


def dump_json(doc: dict) -> str:
    """Serialize a config document with round-trip float formatting."""
    return json.dumps(doc, indent=2) + "\n"
