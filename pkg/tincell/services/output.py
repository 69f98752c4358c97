"""Rich console output and table/manifest emission."""

import hashlib
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Generator

import pandas as pd
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
)
from rich.table import Table

from tincell.models.config import OutputConfig, RunManifest
from tincell.models.results import GainReport


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Route library logging through rich.

    WARNING by default, INFO with ``verbose``, ERROR with ``quiet``.
    """
    level = logging.INFO if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=False, show_path=False)],
        force=True,
    )


def display_error(message: str, console: Console) -> None:
    """Display an error message.

    Args:
        message: Error message to display
        console: Rich console for output
    """
    console.print(f"[bold red]Error:[/bold red] {message}")


def display_warning(message: str, console: Console) -> None:
    console.print(f"[yellow]Warning:[/yellow] {message}")


def _cell(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return "" if value is None else str(value)


def display_table(frame: pd.DataFrame, title: str, console: Console) -> None:
    """Render a result table, hiding columns that are constant over all rows.

    Constant columns (the fixed parameters of a sweep) are shown once in a
    panel above the table instead.
    """
    constant = [c for c in frame.columns if frame[c].nunique(dropna=False) <= 1]
    varying = [c for c in frame.columns if c not in constant]
    if constant and len(frame):
        fixed = "  ".join(f"{c}={_cell(frame[c].iloc[0])}" for c in constant)
        console.print(
            Panel(fixed, title=f"[bold]{title}[/bold]", border_style="blue")
        )

    table = Table(show_header=True, header_style="bold cyan")
    for column in varying or list(frame.columns):
        table.add_column(column)
    for row in frame[varying or list(frame.columns)].itertuples(index=False):
        table.add_row(*(_cell(v) for v in row))
    console.print(table)


def display_gains(
    reports: list[tuple[str, str, GainReport]], console: Console
) -> None:
    """Summarize gain reports as (policy, metric, report) lines."""
    lines = [
        f"{policy:<16} {metric:<10} "
        f"baseline={report.baseline:.4g}  treatment={report.treatment:.4g}  "
        f"[green]gain={report.relative_gain:+.1%}[/green]"
        for policy, metric, report in reports
    ]
    console.print(
        Panel("\n".join(lines), title="Gain over classical", border_style="blue")
    )


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def manifest_path(out_path: Path) -> Path:
    return out_path.with_name(out_path.name + ".manifest.json")


def render_csv(frame: pd.DataFrame, manifest: RunManifest) -> str:
    """Comma-delimited table preceded by the manifest as ``#`` comment lines.

    Execution settings such as ``workers`` are left out of the embedded
    manifest and recorded only in the sibling ``.manifest.json``.

    Read it back with ``pd.read_csv(path, comment="#")``.
    """
    embedded = json.dumps(manifest.reproducible(), indent=2)
    header = "".join(f"# {line}\n" for line in embedded.splitlines())
    return header + frame.to_csv(index=False, lineterminator="\n")


def render_json(frame: pd.DataFrame, manifest: RunManifest) -> str:
    payload = {
        "manifest": manifest.reproducible(),
        "rows": json.loads(frame.to_json(orient="records", double_precision=15)),
    }
    return json.dumps(payload, indent=2) + "\n"


def write_results(
    frame: pd.DataFrame,
    manifest: RunManifest,
    output: OutputConfig,
    console: Console,
    title: str,
) -> Path | None:
    """Emit a result table.

    With ``output.out_path`` set, writes the table (CSV with a manifest
    header, or JSON) and a sibling ``.manifest.json`` holding the sha256
    checksums of every artifact. Otherwise prints to the console.

    Returns:
        Path of the written table, or None when printed
    """
    render = render_json if output.format == "json" else render_csv
    if output.out_path is None:
        if output.format == "json":
            console.print_json(render_json(frame, manifest))
        else:
            display_table(frame, title, console)
        return None

    out_path = output.out_path
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(render(frame, manifest))
    artifacts = {**manifest.artifacts, out_path.name: sha256_file(out_path)}
    final = manifest.model_copy(update={"artifacts": artifacts})
    manifest_path(out_path).write_text(final.model_dump_json(indent=2) + "\n")
    if not output.quiet:
        console.print(f"[green]Wrote:[/green] {out_path}")
    return out_path


@contextmanager
def create_progress(quiet: bool = False) -> Generator[Progress, None, None]:
    """Progress bar for trial and sweep loops.

    Args:
        quiet: If True, create a no-op progress

    Yields:
        Progress context manager
    """
    if quiet:
        progress = Progress(TextColumn(""), transient=True, disable=True)
    else:
        progress = Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            transient=True,
        )
    with progress:
        yield progress
