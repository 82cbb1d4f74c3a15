"""Strict reader for sweep CSVs.

The expected schema is the one the simulator documents:
``axis,value,strategy,mean_energy_j,stderr_j,n_trials``. Anything else is a
schema error carrying the offending header; figures are a pure view of the
CSV, so nothing is ever recomputed or silently defaulted here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

EXPECTED_HEADER = ["axis", "value", "strategy", "mean_energy_j", "stderr_j", "n_trials"]


class SchemaError(ValueError):
    """The CSV does not match the documented sweep schema."""


@dataclass(frozen=True)
class SweepSeries:
    """One strategy's curve: axis values, means and standard errors."""

    strategy: str
    values: tuple[float, ...]
    means: tuple[float, ...]
    stderrs: tuple[float, ...]


@dataclass(frozen=True)
class SweepData:
    axis: str
    series: tuple[SweepSeries, ...]

    @property
    def strategies(self) -> tuple[str, ...]:
        return tuple(s.strategy for s in self.series)


def read_sweep_csv(path: str | Path) -> SweepData:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: file is empty")
    header = rows[0]
    if header != EXPECTED_HEADER:
        raise SchemaError(
            f"{path}: header {header!r} does not match expected {EXPECTED_HEADER!r}"
        )
    if len(rows) == 1:
        raise SchemaError(f"{path}: no data rows")

    axes: set[str] = set()
    by_strategy: dict[str, list[tuple[float, float, float]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(EXPECTED_HEADER):
            raise SchemaError(f"{path}:{lineno}: expected {len(EXPECTED_HEADER)} fields")
        axis, value, strategy, mean, stderr, _ = row
        axes.add(axis)
        try:
            point = (float(value), float(mean), float(stderr))
        except ValueError as exc:
            raise SchemaError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
        by_strategy.setdefault(strategy, []).append(point)
    if len(axes) != 1:
        raise SchemaError(f"{path}: mixed axes {sorted(axes)} in one file")

    series = tuple(
        SweepSeries(
            strategy=name,
            values=tuple(p[0] for p in points),
            means=tuple(p[1] for p in points),
            stderrs=tuple(p[2] for p in points),
        )
        for name, points in by_strategy.items()
    )
    return SweepData(axis=axes.pop(), series=series)
