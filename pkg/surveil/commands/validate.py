"""Check a configuration file and show what a run would use."""

import sys

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from core.exceptions import ConfigurationError
from surveil.experiment_config import load_config
from surveil.runner import EXIT_CONFIG, EXIT_IO

console = Console()


def _show(value) -> str:
    if isinstance(value, float):
        return f"{value:g}"
    if isinstance(value, tuple):
        return ', '.join(_show(v) for v in value)
    return str(value)


@click.command('validate')
@click.argument('config_file')
def validate(config_file):
    """Parse CONFIG_FILE and print the resolved parameters without running."""
    try:
        config = load_config(config_file)
    except ConfigurationError as e:
        console.print(f"[red]Invalid configuration:[/red] {e}")
        sys.exit(EXIT_CONFIG)
    except OSError as e:
        console.print(f"[red]Cannot read {config_file}:[/red] {e}")
        sys.exit(EXIT_IO)

    console.print()
    console.print(Panel(f"{config.source} - {config.scenario}", style="bold blue"))

    table = Table(title="Parameters", show_header=False, box=None)
    table.add_column("Key", style="cyan")
    table.add_column("Value", justify="right")
    for section, keys in config.values.items():
        for key, value in keys.items():
            if value is None:
                continue
            table.add_row(f"{section}.{key}", _show(value))
    console.print(table)

    console.print()
    table = Table(title="dB conversions", box=None)
    table.add_column("Key", style="cyan")
    table.add_column("dB", justify="right")
    table.add_column("Linear", justify="right")
    for key, (db, linear) in sorted(config.resolved.items()):
        table.add_row(key, f"{db:g}", f"{linear:.6g}")
    console.print(table)

    console.print(f"\n[green]OK[/green] sha256 {config.text_sha256[:16]}")
