"""Brute-force oracles versus the main solver and selector."""

import pytest

from semoff import netsim, oracle, selection, solver
from semoff.oracle import EmptyRegionError, OracleConfig, OracleSizeError

from helpers import TABLE_PARAMS, random_feasible_agents, random_mixed_agents, table_agent


def test_oracle_config_guards():
    with pytest.raises(ValueError):
        OracleConfig(rho_grid_points=50)
    with pytest.raises(ValueError):
        OracleConfig(subset_max_n=21)


def test_grid_refuses_empty_region():
    with pytest.raises(EmptyRegionError):
        oracle.grid_solve_agent(TABLE_PARAMS, table_agent(4e-11))


def test_solver_never_loses_to_the_grid():
    cfg = OracleConfig()
    for agent in random_feasible_agents(TABLE_PARAMS, 30, seed=21):
        sol = solver.solve_agent(TABLE_PARAMS, agent)
        _, _, grid_energy = oracle.grid_solve_agent(TABLE_PARAMS, agent, cfg)
        assert sol.evaluation.e_bs <= grid_energy * (1.0 + 1e-6)


def test_grid_argmin_brackets_the_solver_ratio():
    cfg = OracleConfig(rho_grid_points=10_000)
    for agent in random_feasible_agents(TABLE_PARAMS, 10, seed=33):
        sol = solver.solve_agent(TABLE_PARAMS, agent)
        region = sol.region
        rho_grid, _, _ = oracle.grid_solve_agent(TABLE_PARAMS, agent, cfg)
        if region.hi > region.lo:
            step = (region.hi / region.lo) ** (1.0 / (cfg.rho_grid_points - 1))
            assert rho_grid / step**2 <= sol.rho_star <= rho_grid * step**2


def test_degenerate_single_point_region():
    from dataclasses import replace

    params = replace(TABLE_PARAMS, rho_min=1.0)
    agent = table_agent(1e-5)
    rho, power, energy = oracle.grid_solve_agent(params, agent)
    assert rho == 1.0
    assert energy == pytest.approx(
        solver.solve_agent(params, agent).evaluation.e_bs, rel=1e-9
    )


def test_two_dimensional_sweep_confirms_tight_deadline():
    for agent in random_feasible_agents(TABLE_PARAMS, 8, seed=55):
        best, monotone = oracle.grid_solve_agent_2d(TABLE_PARAMS, agent, n_rho=60, n_power=120)
        assert monotone
        sol = solver.solve_agent(TABLE_PARAMS, agent)
        assert sol.evaluation.e_bs <= best[2] * (1.0 + 1e-6)


def test_enumeration_size_guard():
    agents = random_mixed_agents(TABLE_PARAMS, 13, seed=3)
    with pytest.raises(OracleSizeError):
        oracle.enumerate_modes(TABLE_PARAMS, agents, {}, 2, OracleConfig(subset_max_n=12))


def test_enumeration_with_single_feasible_agent_stays_local():
    agents = [table_agent(1e-7), table_agent(1e-12)]
    solutions = selection.solve_feasible_agents(TABLE_PARAMS, agents)
    assert list(solutions) == [0]
    best = oracle.enumerate_modes(
        TABLE_PARAMS, agents, {i: s.evaluation for i, s in solutions.items()}, 2
    )
    assert best.k_star == 0
    assert best.modes == (0, 0)


def test_enumeration_picks_everyone_when_savings_are_strong():
    agents = [table_agent(g) for g in (1e-6, 2e-6, 5e-7, 3e-6, 8e-7)]
    solutions = selection.solve_feasible_agents(TABLE_PARAMS, agents)
    assert len(solutions) == 5
    assert all(s.evaluation.delta_save > 0 for s in solutions.values())
    best = oracle.enumerate_modes(
        TABLE_PARAMS, agents, {i: s.evaluation for i, s in solutions.items()}, 2
    )
    assert best.k_star == 5


def test_enumeration_matches_solve_network():
    for seed in range(12):
        agents = random_mixed_agents(TABLE_PARAMS, 6, seed=200 + seed)
        solutions = selection.solve_feasible_agents(TABLE_PARAMS, agents)
        planned = selection.assemble_solution(TABLE_PARAMS, agents, solutions)
        exact = oracle.enumerate_modes(
            TABLE_PARAMS, agents, {i: s.evaluation for i, s in solutions.items()}, 2
        )
        assert planned.total_energy == pytest.approx(exact.total_energy, rel=1e-6)


def test_verify_agrees_on_random_trials():
    cfg = OracleConfig(rho_grid_points=400)
    for seed in range(6):
        agents = random_mixed_agents(TABLE_PARAMS, 6, seed=300 + seed)
        verdict = oracle.verify(TABLE_PARAMS, agents, cfg)
        assert verdict.agreed, f"seed {seed}: gap {verdict.worst_case_gap_rel}"
        assert verdict.counterexample is None
        assert verdict.solver_energy <= verdict.oracle_energy * (1.0 + 1e-3)


def test_verify_flags_a_broken_solver_with_a_counterexample(monkeypatch):
    from dataclasses import replace as dc_replace

    real = selection.solve_network

    def inflated(params, agents, policy=selection.SelectionPolicy()):
        sol = real(params, agents, policy)
        return dc_replace(sol, total_energy=sol.total_energy * 1.01)

    monkeypatch.setattr(oracle.selection, "solve_network", inflated)
    agents = random_feasible_agents(TABLE_PARAMS, 4, seed=401)
    verdict = oracle.verify(TABLE_PARAMS, agents, OracleConfig(rho_grid_points=400))
    assert not verdict.agreed
    assert verdict.worst_case_gap_rel > 1e-3
    assert verdict.counterexample is not None
    assert verdict.counterexample.agents == tuple(agents)


def test_battery_passes_on_reduced_sizes():
    sim = netsim.SimConfig(system=TABLE_PARAMS, n_agents=6, n_trials=5, seed=7)
    report = oracle.run_battery(
        sim,
        OracleConfig(rho_grid_points=500),
        n_continuous=15,
        n_discrete_trials=8,
        discrete_n_agents=6,
    )
    failed = [c.name for c in report.checks if not c.passed]
    assert report.passed, f"failed checks: {failed}"
    assert {c.name for c in report.checks} >= {
        "continuous-grid-optimality",
        "latency-tightness",
        "power-cap",
        "derivative-cross-check",
        "discrete-enumeration-exactness",
        "end-to-end-grid-agreement",
        "baseline-dominance",
        "objective-form-equivalence",
    }
