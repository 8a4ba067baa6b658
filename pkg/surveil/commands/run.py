"""Run an experiment configuration."""

import logging
import math
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from core.exceptions import ConfigurationError
from surveil.experiment_config import load_config, with_overrides
from surveil.runner import EXIT_CONFIG, EXIT_IO, EXIT_OK, run_experiment

logger = logging.getLogger(__name__)
console = Console()

# Rows shown per artifact before the table is elided
PREVIEW_ROWS = 12


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def _preview(rows):
    if len(rows) <= PREVIEW_ROWS:
        return rows, 0
    step = math.ceil(len(rows) / PREVIEW_ROWS)
    return rows[::step], len(rows)


def print_summary(result):
    for name, content in result.tables.items():
        if name == 'stats':
            continue
        header, rows = content
        shown, total = _preview(rows)
        title = name if not total else f"{name} ({len(shown)} of {total} rows)"
        table = Table(title=title, box=None)
        for column in header:
            table.add_column(column, style="cyan" if column == header[0] else None, justify="right")
        for row in shown:
            table.add_row(*(_cell(v) for v in row))
        console.print(table)
        console.print()

    if 'stats' in result.tables:
        table = Table(title="Trajectory", box=None)
        table.add_column("Aircraft", style="cyan")
        for column in ("Input", "Abandoned", "Supplemented", "Abandoned %"):
            table.add_column(column, justify="right")
        for source, stats in result.tables['stats']:
            table.add_row(
                source,
                str(stats['input_count']),
                str(stats['abandoned_count']),
                str(stats['supplemented_count']),
                f"{stats['abandoned_fraction'] * 100:.1f}%",
            )
        console.print(table)
        console.print()

    table = Table(title="Artifacts", show_header=False, box=None)
    table.add_column("File", style="cyan")
    for path in result.artifacts:
        table.add_row(str(path))
    console.print(table)


@click.command('run')
@click.argument('config_file')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Output directory (overrides the config)')
@click.option('--seed', type=int, help='Override [experiment] seed')
@click.option('--trials', type=int, help='Override [experiment] trials')
def run(config_file, out_dir, seed, trials):
    """Run the scenario described by CONFIG_FILE and write CSVs plus a manifest."""
    try:
        config = with_overrides(load_config(config_file), seed=seed, trials=trials)
    except ConfigurationError as e:
        console.print(f"[red]Invalid configuration:[/red] {e}")
        sys.exit(EXIT_CONFIG)
    except OSError as e:
        console.print(f"[red]Cannot read {config_file}:[/red] {e}")
        sys.exit(EXIT_IO)

    console.print()
    console.print(Panel(f"{config.scenario} - seed {config.seed}", style="bold blue"))
    result = run_experiment(config, Path(out_dir) if out_dir else None)

    if result.status != EXIT_OK:
        console.print(f"[red]Run failed ({result.status}):[/red] {result.error}")
        sys.exit(result.status)

    print_summary(result)
    console.print(f"\n[green]Done:[/green] {len(result.artifacts)} files written")
