"""Optimise a recorded SBS position feed without a configuration file."""

import sys
from pathlib import Path

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from config import settings
from core import parameters
from core.exceptions import NumericalError, SurveilError
from core.onboard import MecConfig
from surveil.runner import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL
from surveil.services import trajectory

console = Console()


@click.command('traj')
@click.argument('sbs_file', type=click.Path(dir_okay=False))
@click.option('--n', 'window_size', type=int, default=parameters.WINDOW_SIZE, show_default=True,
              help='Minkowski window size')
@click.option('--p', 'order', type=float, default=parameters.MINKOWSKI_ORDER, show_default=True,
              help='Minkowski order')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False),
              default=str(settings.OUTPUT_DIR / 'trajectory'), show_default=True)
@click.option('--threshold', type=float, default=parameters.DEGENERACY_THRESHOLD, show_default=True,
              help='Relative determinant below which four points count as coplanar')
@click.option('--normalize/--no-normalize', default=False,
              help='Measure distances in a local metric frame instead of raw degrees and feet')
@click.option('--lenient', is_flag=True, help='Skip malformed SBS lines instead of failing')
def traj(sbs_file, window_size, order, out_dir, threshold, normalize, lenient):
    """Run SBS_FILE through the on-board window and write the optimised feed."""
    try:
        config = MecConfig(window_size, order, threshold, normalize)
        config.new_window()
        vectors = trajectory.read_position_vectors(Path(sbs_file), strict=not lenient)
        result = trajectory.process_vectors(vectors, config)
        paths = trajectory.write_outputs(result, Path(out_dir))
    except OSError as e:
        console.print(f"[red]I/O error:[/red] {e}")
        sys.exit(EXIT_IO)
    except NumericalError as e:
        console.print(f"[red]Numerical error:[/red] {e}")
        sys.exit(EXIT_NUMERICAL)
    except SurveilError as e:
        console.print(f"[red]Error:[/red] {e}")
        sys.exit(EXIT_CONFIG)

    console.print()
    console.print(Panel(f"{sbs_file} - N={window_size}, p={order:g}", style="bold blue"))

    table = Table(title="Per aircraft", box=None)
    table.add_column("Aircraft", style="cyan")
    for column in ("Input", "Warm-up", "Relayed", "Abandoned", "Supplemented", "Linear", "Abandoned %"):
        table.add_column(column, justify="right")

    def add(name, stats):
        table.add_row(
            name,
            str(stats.input_count),
            str(stats.warmup_count),
            str(stats.relayed_count),
            str(stats.abandoned_count),
            str(stats.supplemented_count),
            str(stats.linear_count),
            f"{stats.abandoned_fraction * 100:.1f}%",
        )

    for source in sorted(result.stats):
        add(source, result.stats[source])
    if len(result.stats) > 1:
        add("[bold]total[/bold]", result.total)
    console.print(table)

    console.print(f"\n[green]Wrote[/green] {', '.join(str(p) for p in paths)}")
