"""``semoff`` command line front end.

Subcommands: ``solve`` (one explicit instance), ``sweep`` (Monte Carlo
parameter sweep with CSV/JSON reports and optional figures), ``compare``
(all strategies at a single configuration) and ``verify`` (oracle suite and
invariant battery).

Exit codes: 0 success, 1 verification or data-quality failure, 2 config
error. Progress goes to stderr; data goes to files and stdout. Every flag
can also be set through an environment variable named
``SEMOFF_<SUBCOMMAND>_<FLAG>`` (e.g. ``SEMOFF_SWEEP_SEED``).
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import click

from . import config as configlib
from . import netsim, oracle, selection
from .config import ConfigError, RunConfig


@dataclass(frozen=True, slots=True)
class CliInvocation:
    """Resolved invocation: exactly one subcommand plus the shared flags."""

    subcommand: str
    config_path: str | None
    out_dir: Path
    seed: int | None
    jobs: int
    strategies: tuple[str, ...] | None
    verbosity: int


def _progress(message: str) -> None:
    click.echo(message, err=True)


def _config_error(message: object) -> None:
    click.echo(f"config error: {message}", err=True)
    sys.exit(2)


def _common_options(f):
    f = click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False),
        default=None,
        help="Config file (YAML or JSON); omitted means built-in defaults.",
    )(f)
    f = click.option(
        "--out",
        "out_dir",
        type=click.Path(file_okay=False),
        default="results",
        show_default=True,
        help="Output directory; nothing is written outside it.",
    )(f)
    f = click.option("--seed", type=int, default=None, help="Override the config seed.")(f)
    f = click.option(
        "--jobs",
        type=int,
        default=None,
        help="Worker processes for trials [default: all hardware threads].",
    )(f)
    f = click.option(
        "--strategy",
        "strategies",
        default=None,
        help="Comma-separated strategy subset to run.",
    )(f)
    return f


def _resolve(
    subcommand: str,
    config_path: str | None,
    out_dir: str,
    seed: int | None,
    jobs: int | None,
    strategies: str | None,
    verbosity: int,
) -> tuple[CliInvocation, RunConfig]:
    try:
        run_cfg = (
            configlib.load_config(config_path)
            if config_path is not None
            else configlib.default_run_config()
        )
    except ConfigError as exc:
        _config_error(exc)

    sim = run_cfg.sim
    try:
        if seed is not None:
            sim = replace(sim, seed=seed)
        if strategies is not None:
            wanted = tuple(s.strip() for s in strategies.split(",") if s.strip())
            sim = replace(sim, strategies=wanted)
    except ValueError as exc:
        _config_error(exc)
    run_cfg = replace(run_cfg, sim=sim)

    invocation = CliInvocation(
        subcommand=subcommand,
        config_path=config_path,
        out_dir=Path(out_dir),
        seed=seed,
        jobs=jobs if jobs is not None else (os.cpu_count() or 1),
        strategies=sim.strategies,
        verbosity=verbosity,
    )
    return invocation, run_cfg


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


@click.group()
@click.version_option(package_name="semoff")
@click.option("-v", "--verbose", count=True, help="More progress output.")
@click.pass_context
def cli(ctx: click.Context, verbose: int) -> None:
    """Energy-minimal offloading planner and Monte Carlo experiment runner."""
    ctx.ensure_object(dict)
    ctx.obj["verbosity"] = verbose


@cli.command()
@_common_options
@click.option("--oracle", "with_oracle", is_flag=True, help="Verify the instance against the brute-force oracle.")
@click.pass_context
def solve(ctx, config_path, out_dir, seed, jobs, strategies, with_oracle) -> None:
    """Solve one explicit instance (requires an agents section)."""
    invocation, run_cfg = _resolve(
        "solve", config_path, out_dir, seed, jobs, strategies, ctx.obj["verbosity"]
    )
    sim = run_cfg.sim
    if sim.explicit_agents is None:
        _config_error("solve requires an explicit agents section in the config")
    agents = sim.explicit_agents
    params = sim.system

    solution = selection.solve_network(params, agents, sim.policy)

    click.echo(f"agents: {len(agents)}  offload-capable: {solution.m_feasible}")
    click.echo(f"k_star: {solution.k_star}")
    click.echo(f"total_energy_j: {solution.total_energy:.9g}")
    header = f"{'agent':>5} {'mode':>4} {'rho':>10} {'p_w':>10} {'t_bs_s':>10} {'e_bs_j':>11} {'e_local_j':>11} {'delta_j':>11}"
    click.echo(header)
    agent_rows = []
    for i, ev in enumerate(solution.per_agent):
        if ev.mode == 1:
            row = (
                f"{i:>5} {ev.mode:>4} {ev.rho:>10.6f} {ev.power_w:>10.6f} "
                f"{ev.t_bs:>10.6f} {ev.e_bs:>11.5g} {ev.e_local:>11.5g} {ev.delta_save:>11.5g}"
            )
        else:
            row = (
                f"{i:>5} {ev.mode:>4} {'-':>10} {'-':>10} "
                f"{'-':>10} {'-':>11} {ev.e_local:>11.5g} {'-':>11}"
            )
        click.echo(row)
        agent_rows.append(
            {
                "mode": ev.mode,
                "rho": ev.rho if ev.mode == 1 else None,
                "power_w": ev.power_w if ev.mode == 1 else None,
                "t_bs_s": ev.t_bs if ev.mode == 1 else None,
                "e_bs_j": ev.e_bs if ev.mode == 1 else None,
                "e_local_j": ev.e_local,
                "delta_save_j": ev.delta_save if ev.mode == 1 else None,
            }
        )

    report = {
        "k_star": solution.k_star,
        "m_feasible": solution.m_feasible,
        "total_energy_j": solution.total_energy,
        "modes": list(solution.modes),
        "objective_trace": [[k, e] for k, e in solution.objective_trace],
        "latency_violations": list(solution.latency_violations),
        "agents": agent_rows,
        "config": configlib.config_echo(run_cfg),
    }

    verdict_failed = False
    if with_oracle or run_cfg.output.verify_on_solve:
        try:
            verdict = oracle.verify(params, agents, run_cfg.oracle, sim.policy)
        except oracle.OracleSizeError as exc:
            _config_error(exc)
        click.echo(
            f"oracle: agreed={verdict.agreed} oracle_energy_j={verdict.oracle_energy:.9g} "
            f"gap_rel={verdict.worst_case_gap_rel:.3e}"
        )
        report["oracle"] = {
            "agreed": verdict.agreed,
            "oracle_energy_j": verdict.oracle_energy,
            "solver_energy_j": verdict.solver_energy,
            "worst_case_gap_rel": verdict.worst_case_gap_rel,
        }
        verdict_failed = not verdict.agreed

    invocation.out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(invocation.out_dir / "solve_result.json", report)
    if verdict_failed:
        sys.exit(1)


def _render_figures(out_dir: Path, explicit: bool) -> None:
    try:
        import figkit
    except ImportError:
        if explicit:
            _config_error("--figures requested but the figkit package is not installed")
        _progress("figkit not installed; skipping figure rendering")
        return
    rendered = figkit.render_all(out_dir, out_dir, fmt="png")
    for path in rendered:
        _progress(f"wrote {path}")


@cli.command()
@_common_options
@click.option(
    "--figures/--no-figures",
    "figures",
    default=None,
    help="Render comparison figures next to the CSV (default: if figkit is installed).",
)
@click.pass_context
def sweep(ctx, config_path, out_dir, seed, jobs, strategies, figures) -> None:
    """Run the configured parameter sweep and write the CSV/JSON reports."""
    invocation, run_cfg = _resolve(
        "sweep", config_path, out_dir, seed, jobs, strategies, ctx.obj["verbosity"]
    )
    sim = run_cfg.sim
    if sim.sweep is None:
        _config_error("sweep requires a sweep section in the config")

    invocation.out_dir.mkdir(parents=True, exist_ok=True)
    dump_fh = None
    on_trial = None
    if run_cfg.output.per_trial_dump:
        dump_path = invocation.out_dir / f"trials_{sim.sweep.axis}.jsonl"
        dump_fh = open(dump_path, "w", encoding="utf-8", newline="")

        def on_trial(value, pcfg, trial) -> None:
            doc = {
                "axis": pcfg.sweep.axis if pcfg.sweep else sim.sweep.axis,
                "value": value,
                "trial_index": trial.trial_index,
                **configlib.instance_to_dict(
                    pcfg.system, trial.agents, pcfg.policy, pcfg.fixed_tx_power_w
                ),
            }
            dump_fh.write(json.dumps(doc) + "\n")

    try:
        result = netsim.run_sweep(
            sim, jobs=invocation.jobs, on_trial=on_trial, progress=_progress
        )
    finally:
        if dump_fh is not None:
            dump_fh.close()

    csv_path = invocation.out_dir / f"sweep_{result.axis}.csv"
    netsim.write_sweep_csv(result, csv_path)
    json_path = invocation.out_dir / f"results_{result.axis}.json"
    netsim.write_results_json(
        netsim.results_tree(result, configlib.config_echo(run_cfg)), json_path
    )
    _progress(f"wrote {csv_path}")
    _progress(f"wrote {json_path}")

    if figures or figures is None:
        _render_figures(invocation.out_dir, explicit=bool(figures))

    problems = []
    for point in result.points:
        for name, stats in point.stats.items():
            if not math.isfinite(stats.mean_energy_j):
                problems.append(f"{name}@{point.value}: mean energy is not finite")
            rate = stats.infeasible_trials / stats.n_trials
            if rate > run_cfg.output.max_infeasible_rate:
                problems.append(
                    f"{name}@{point.value}: infeasible-trial rate {rate:.3f} exceeds "
                    f"{run_cfg.output.max_infeasible_rate:.3f}"
                )
            if sim.policy.local_latency == "warn" and stats.latency_violation_trials:
                _progress(
                    f"warning: {name}@{point.value}: local-mode deadline violations in "
                    f"{stats.latency_violation_trials}/{stats.n_trials} trials"
                )
    if problems:
        for problem in problems:
            click.echo(f"data-quality failure: {problem}", err=True)
        sys.exit(1)


@cli.command()
@_common_options
@click.pass_context
def compare(ctx, config_path, out_dir, seed, jobs, strategies) -> None:
    """Run every configured strategy at the base configuration."""
    invocation, run_cfg = _resolve(
        "compare", config_path, out_dir, seed, jobs, strategies, ctx.obj["verbosity"]
    )
    sim = run_cfg.sim
    _progress(f"compare: {sim.n_trials} trials, {len(sim.strategies)} strategies")
    stats = netsim.run_point(sim, jobs=invocation.jobs)

    click.echo(f"{'strategy':<14} {'label':<14} {'mean_energy_j':>14} {'stderr_j':>12} {'n':>6}")
    for name in sim.strategies:
        s = stats[name]
        click.echo(
            f"{name:<14} {netsim.STRATEGY_LABELS[name]:<14} "
            f"{s.mean_energy_j:>14.6g} {s.stderr_j:>12.3g} {s.n_trials:>6}"
        )

    invocation.out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "config": configlib.config_echo(run_cfg),
        "strategies": {
            name: {
                "label": netsim.STRATEGY_LABELS[name],
                "mean_energy_j": stats[name].mean_energy_j,
                "stderr_j": stats[name].stderr_j,
                "n_trials": stats[name].n_trials,
                "infeasible_trials": stats[name].infeasible_trials,
                "k_histogram": {str(k): c for k, c in stats[name].k_histogram},
            }
            for name in sim.strategies
        },
    }
    _write_json(invocation.out_dir / "compare.json", doc)


@cli.command()
@_common_options
@click.pass_context
def verify(ctx, config_path, out_dir, seed, jobs, strategies) -> None:
    """Run the brute-force oracle suite and the invariant battery."""
    invocation, run_cfg = _resolve(
        "verify", config_path, out_dir, seed, jobs, strategies, ctx.obj["verbosity"]
    )
    settings = run_cfg.verify
    if settings.n_agents > run_cfg.oracle.subset_max_n:
        _config_error(
            f"verify.n_agents={settings.n_agents} exceeds oracle.subset_max_n="
            f"{run_cfg.oracle.subset_max_n}"
        )
    _progress(
        f"verify: {settings.n_continuous} continuous checks, "
        f"{settings.n_trials} trials at n={settings.n_agents}"
    )
    try:
        report = oracle.run_battery(
            run_cfg.sim,
            run_cfg.oracle,
            n_continuous=settings.n_continuous,
            n_discrete_trials=settings.n_trials,
            discrete_n_agents=settings.n_agents,
        )
    except ValueError as exc:
        _config_error(exc)

    for check in report.checks:
        tag = "PASS" if check.passed else "FAIL"
        click.echo(f"[{tag}] {check.name}: {check.detail}")

    invocation.out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "passed": report.passed,
        "checks": [
            {"name": c.name, "passed": c.passed, "detail": c.detail}
            for c in report.checks
        ],
        "config": configlib.config_echo(run_cfg),
    }
    _write_json(invocation.out_dir / "verify_verdict.json", doc)

    if report.counterexample is not None:
        ce = report.counterexample
        _write_json(
            invocation.out_dir / "counterexample.json",
            configlib.instance_to_dict(ce.params, ce.agents, ce.policy),
        )
        _progress("wrote counterexample.json (replay with: semoff solve --oracle)")

    if not report.passed:
        sys.exit(1)


def main() -> None:
    cli(auto_envvar_prefix="SEMOFF")


if __name__ == "__main__":
    main()
