"""Figure toolkit for sweep CSVs: pure CSV-to-image transformation."""

from .reader import EXPECTED_HEADER, SchemaError, SweepData, SweepSeries, read_sweep_csv
from .render import (
    DEFAULT_AXIS_LABELS,
    DEFAULT_STYLES,
    FigureSpec,
    StrategyStyle,
    build_figure,
    render_all,
    render_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_HEADER",
    "DEFAULT_AXIS_LABELS",
    "DEFAULT_STYLES",
    "FigureSpec",
    "SchemaError",
    "StrategyStyle",
    "SweepData",
    "SweepSeries",
    "build_figure",
    "read_sweep_csv",
    "render_all",
    "render_sweep",
    "__version__",
]
