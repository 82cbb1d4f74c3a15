"""Figure rendering: sweep CSVs to error-bar comparison plots."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reader import SchemaError, SweepData, read_sweep_csv

DEFAULT_AXIS_LABELS = {
    "N": "Number of agents",
    "D": "Data size (Mbit)",
    "T0": "Time constraint (s)",
}

FORMATS = ("png", "pdf", "svg")


@dataclass(frozen=True)
class StrategyStyle:
    label: str
    color: str
    marker: str
    linestyle: str = "-"


# Legend labels follow the established strategy names so figures can be read
# against the published comparisons directly.
DEFAULT_STYLES: dict[str, StrategyStyle] = {
    "proposed": StrategyStyle("Proposed", "tab:blue", "o"),
    "snr_based": StrategyStyle("SNR-Based", "tab:orange", "s"),
    "local_only": StrategyStyle("Local Only", "tab:green", "^"),
    "no_semcom": StrategyStyle("No SemCom", "tab:red", "v"),
    "fixed_power": StrategyStyle("Fixed Tx Power", "tab:purple", "D"),
}


@dataclass(frozen=True)
class FigureSpec:
    """What to read, how to style each strategy, and where to write."""

    csv_path: Path
    out_path: Path
    fmt: str = "png"
    axis_labels: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_AXIS_LABELS))
    styles: Mapping[str, StrategyStyle] = field(default_factory=lambda: dict(DEFAULT_STYLES))

    def __post_init__(self) -> None:
        if self.fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.fmt!r}")


def build_figure(data: SweepData, spec: FigureSpec) -> plt.Figure:
    """Plot one line with error bars per strategy; unknown strategies error."""
    missing = [s for s in data.strategies if s not in spec.styles]
    if missing:
        raise SchemaError(
            f"no style entry for strategies {missing}; add them to the figure spec"
        )
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=150)
    for series in data.series:
        style = spec.styles[series.strategy]
        ax.errorbar(
            series.values,
            series.means,
            yerr=series.stderrs,
            label=style.label,
            color=style.color,
            marker=style.marker,
            linestyle=style.linestyle,
            capsize=3,
            markersize=5,
        )
    ax.set_xlabel(spec.axis_labels.get(data.axis, data.axis))
    ax.set_ylabel("Mean total energy (J)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def _save_deterministic(fig: plt.Figure, path: Path, fmt: str) -> None:
    # Strip the volatile metadata each backend would embed (creation dates,
    # hashed ids) so identical inputs give identical bytes.
    if fmt == "pdf":
        fig.savefig(path, format=fmt, metadata={"CreationDate": None})
    elif fmt == "svg":
        with matplotlib.rc_context({"svg.hashsalt": "figkit"}):
            fig.savefig(path, format=fmt, metadata={"Date": None})
    else:
        fig.savefig(path, format=fmt)


def render_sweep(csv_path: str | Path, spec: FigureSpec | None = None) -> Path:
    """Render one sweep CSV to an image file; returns the output path."""
    csv_path = Path(csv_path)
    if spec is None:
        data = read_sweep_csv(csv_path)
        out = csv_path.with_name(f"energy_vs_{data.axis}.png")
        spec = FigureSpec(csv_path=csv_path, out_path=out)
    else:
        data = read_sweep_csv(spec.csv_path)
    fig = build_figure(data, spec)
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    _save_deterministic(fig, spec.out_path, spec.fmt)
    plt.close(fig)
    return spec.out_path


def render_all(in_dir: str | Path, out_dir: str | Path, fmt: str = "png") -> list[Path]:
    """Render every ``sweep_*.csv`` found in ``in_dir``."""
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    csvs = sorted(in_dir.glob("sweep_*.csv"))
    if not csvs:
        raise SchemaError(f"no sweep_*.csv files found in {in_dir}")
    rendered = []
    for csv_path in csvs:
        data = read_sweep_csv(csv_path)
        spec = FigureSpec(
            csv_path=csv_path,
            out_path=out_dir / f"energy_vs_{data.axis}.{fmt}",
            fmt=fmt,
        )
        rendered.append(render_sweep(csv_path, spec))
    return rendered
