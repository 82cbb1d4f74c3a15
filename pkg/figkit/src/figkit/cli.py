"""``figkit-render``: batch-render sweep CSVs to comparison figures.

Exit codes: 0 success, 1 schema mismatch or missing/empty data, 2 usage
errors.
"""

from __future__ import annotations

import sys

import click

from .reader import SchemaError
from .render import FORMATS, render_all


@click.command(name="render")
@click.option(
    "--in",
    "in_dir",
    type=click.Path(exists=True, file_okay=False),
    required=True,
    help="Directory holding sweep_*.csv files.",
)
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False),
    required=True,
    help="Directory to write figures into.",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(FORMATS),
    default="png",
    show_default=True,
)
def render(in_dir: str, out_dir: str, fmt: str) -> None:
    """Render every sweep CSV in a directory to an error-bar figure."""
    try:
        rendered = render_all(in_dir, out_dir, fmt=fmt)
    except SchemaError as exc:
        click.echo(f"schema error: {exc}", err=True)
        sys.exit(1)
    for path in rendered:
        click.echo(f"wrote {path}")


def main() -> None:
    render()


if __name__ == "__main__":
    main()
