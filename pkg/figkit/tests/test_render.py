"""figkit: schema strictness, rendering, determinism, CLI exit codes."""

from pathlib import Path

import pytest
from click.testing import CliRunner

import figkit
from figkit.cli import render
from figkit.reader import SchemaError

HEADER = "axis,value,strategy,mean_energy_j,stderr_j,n_trials"

FIVE_STRATEGIES = ("proposed", "snr_based", "local_only", "no_semcom", "fixed_power")


def _sweep_csv(axis: str, values, strategies=FIVE_STRATEGIES) -> str:
    lines = [HEADER]
    for v in values:
        for i, name in enumerate(strategies):
            mean = 1.0 + 0.2 * i + 0.05 * v
            lines.append(f"{axis},{v},{name},{mean},{0.01},{100}")
    return "\n".join(lines) + "\n"


def _write_three_sweeps(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "sweep_N.csv").write_text(_sweep_csv("N", [5, 10, 15, 20]))
    (directory / "sweep_D.csv").write_text(_sweep_csv("D", [2, 6, 10, 14]))
    (directory / "sweep_T0.csv").write_text(_sweep_csv("T0", [0.5, 0.7, 0.9, 1.1]))


def test_reader_parses_series_in_file_order(tmp_path):
    path = tmp_path / "sweep_N.csv"
    path.write_text(_sweep_csv("N", [5, 10]))
    data = figkit.read_sweep_csv(path)
    assert data.axis == "N"
    assert data.strategies == FIVE_STRATEGIES
    assert data.series[0].values == (5.0, 10.0)


@pytest.mark.parametrize(
    "text,match",
    [
        ("", "empty"),
        ("axis,value,oops\nN,5,1\n", "does not match"),
        (HEADER + "\n", "no data rows"),
        (HEADER + "\nN,5,proposed,abc,0.1,10\n", "non-numeric"),
        (HEADER + "\nN,5,proposed,1,0.1,10\nD,5,proposed,1,0.1,10\n", "mixed axes"),
    ],
)
def test_reader_rejects_bad_schemas(tmp_path, text, match):
    path = tmp_path / "sweep_bad.csv"
    path.write_text(text)
    with pytest.raises(SchemaError, match=match):
        figkit.read_sweep_csv(path)


def test_missing_style_is_an_error_not_a_default(tmp_path):
    path = tmp_path / "sweep_N.csv"
    path.write_text(_sweep_csv("N", [5], strategies=("proposed", "mystery")))
    data = figkit.read_sweep_csv(path)
    spec = figkit.FigureSpec(csv_path=path, out_path=tmp_path / "x.png")
    with pytest.raises(SchemaError, match="mystery"):
        figkit.build_figure(data, spec)


def test_render_five_and_single_strategy_figures(tmp_path):
    path = tmp_path / "sweep_N.csv"
    path.write_text(_sweep_csv("N", [5, 10, 15, 20]))
    data = figkit.read_sweep_csv(path)
    spec = figkit.FigureSpec(csv_path=path, out_path=tmp_path / "five.png")
    fig = figkit.build_figure(data, spec)
    assert len(fig.axes[0].containers) == 5
    labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
    assert labels == ["Proposed", "SNR-Based", "Local Only", "No SemCom", "Fixed Tx Power"]

    single = tmp_path / "sweep_T0.csv"
    single.write_text(_sweep_csv("T0", [0.5, 0.7], strategies=("proposed",)))
    out = figkit.render_sweep(single)
    assert out.exists()
    assert out.name == "energy_vs_T0.png"


def test_render_all_discovers_three_axes(tmp_path):
    _write_three_sweeps(tmp_path / "in")
    rendered = figkit.render_all(tmp_path / "in", tmp_path / "out")
    names = sorted(p.name for p in rendered)
    assert names == ["energy_vs_D.png", "energy_vs_N.png", "energy_vs_T0.png"]
    assert all(p.stat().st_size > 0 for p in rendered)


def test_render_all_errors_on_empty_directory(tmp_path):
    (tmp_path / "in").mkdir()
    with pytest.raises(SchemaError, match="no sweep"):
        figkit.render_all(tmp_path / "in", tmp_path / "out")


@pytest.mark.parametrize("fmt", ["png", "pdf", "svg"])
def test_rendering_is_deterministic(tmp_path, fmt):
    path = tmp_path / "sweep_N.csv"
    path.write_text(_sweep_csv("N", [5, 10, 15]))
    outputs = []
    for name in ("one", "two"):
        spec = figkit.FigureSpec(
            csv_path=path, out_path=tmp_path / f"{name}.{fmt}", fmt=fmt
        )
        outputs.append(figkit.render_sweep(path, spec).read_bytes())
    assert outputs[0] == outputs[1]


def test_cli_renders_directory(tmp_path):
    _write_three_sweeps(tmp_path / "in")
    runner = CliRunner()
    result = runner.invoke(
        render, ["--in", str(tmp_path / "in"), "--out", str(tmp_path / "out")]
    )
    assert result.exit_code == 0, result.output
    assert len(list((tmp_path / "out").glob("*.png"))) == 3


def test_cli_schema_mismatch_exits_one(tmp_path):
    bad = tmp_path / "in"
    bad.mkdir()
    (bad / "sweep_N.csv").write_text("wrong,header\n1,2\n")
    runner = CliRunner()
    result = runner.invoke(render, ["--in", str(bad), "--out", str(tmp_path / "out")])
    assert result.exit_code == 1
    assert "schema error" in result.output
    assert "wrong" in result.output  # the offending header is reported


def test_cli_usage_errors_exit_two(tmp_path):
    runner = CliRunner()
    result = runner.invoke(render, ["--in", str(tmp_path / "missing"), "--out", "o"])
    assert result.exit_code == 2
