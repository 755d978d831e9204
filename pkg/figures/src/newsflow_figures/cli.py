"""Figure-rendering CLI over report-bundle JSON artifacts."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .render import FigureSpec, render
from .schema import ARTIFACT_KINDS, SchemaMismatch


@click.group()
def main() -> None:
    """Render publication figures from report-bundle artifacts."""


@main.command("render")
@click.option("--kind", type=click.Choice(sorted(ARTIFACT_KINDS)), required=True)
@click.option("--in", "input_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--dpi", default=150, show_default=True)
@click.option("--linear", is_flag=True, help="Linear axes instead of log-log (engagement).")
@click.option("--show-bins", is_flag=True, help="Overlay the bin grid on the joint contour.")
def render_cmd(kind, input_path, out_path, dpi, linear, show_bins):
    """Render one figure; exits nonzero on a schema mismatch."""
    spec = FigureSpec(kind=kind, input=Path(input_path), out=Path(out_path),
                      dpi=dpi, log_axes=not linear, show_bins=show_bins)
    try:
        out = render(spec)
    except SchemaMismatch as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(str(out))


if __name__ == "__main__":
    main()
