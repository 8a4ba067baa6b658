"""Scenario dispatch: run one experiment and write its artifacts."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from core.airspace import Layer, deploy, write_deployment_csv
from core.exceptions import NumericalError, SurveilError

from .experiment_config import ExperimentConfig
from .services import a2a_sweeps, a2g_sweep, trajectory
from .services.artifacts import write_csv, write_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


@dataclass
class RunResult:
    status: int
    artifacts: List[Path] = field(default_factory=list)
    # Per-artifact (header, rows) kept for the console summary
    tables: Dict[str, object] = field(default_factory=dict)
    error: Optional[str] = None


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit status."""
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(error, OSError):
        return EXIT_IO
    if isinstance(error, SurveilError):
        return EXIT_CONFIG
    raise error


def _run_a2g(config: ExperimentConfig, out_dir: Path, result: RunResult):
    settings = config.a2g
    for layer in settings.layers:
        low, high = settings.height_range[layer]
        heights = a2g_sweep.height_grid(low, high, settings.height_step)
        rows = a2g_sweep.run_a2g_sweep(
            settings.params(layer),
            heights,
            settings.ground_arc,
            settings.reflection_arcs,
            settings.fade_trials,
            config.seed,
            layer_index=Layer(layer).index,
            workers=config.workers,
        )
        path = write_csv(out_dir / f'a2g_sweep_{layer}.csv', a2g_sweep.CSV_HEADER, (r.as_row() for r in rows))
        result.artifacts.append(path)
        result.tables[path.name] = (a2g_sweep.CSV_HEADER, [r.as_row() for r in rows])


def _write_deployment(config: ExperimentConfig, out_dir: Path, result: RunResult):
    deployment = deploy(config.airspace, config.seed)
    result.artifacts.append(write_deployment_csv(deployment, out_dir / 'deployment.csv'))


def _run_a2a_coverage(config: ExperimentConfig, out_dir: Path, result: RunResult, axis: str):
    points = a2a_sweeps.run_coverage_sweep(
        config.a2a, config.airspace, axis, config.trials, config.seed, workers=config.workers,
    )
    analytic = config.a2a.analytic
    rows = [a2a_sweeps.coverage_row(p, analytic) for p in points]
    name = 'a2a_power.csv' if axis == 'power' else 'a2a_pathloss.csv'
    header = a2a_sweeps.coverage_header(axis, analytic)
    path = write_csv(out_dir / name, header, rows)
    result.artifacts.append(path)
    result.tables[path.name] = (header, rows)
    _write_deployment(config, out_dir, result)


def _run_a2a_density(config: ExperimentConfig, out_dir: Path, result: RunResult):
    points = a2a_sweeps.run_density_sweep(config.a2a, config.airspace, config.trials, config.seed)
    rows = [a2a_sweeps.density_row(p) for p in points]
    header = a2a_sweeps.DENSITY_HEADER
    path = write_csv(out_dir / 'a2a_density.csv', header, rows)
    result.artifacts.append(path)
    result.tables[path.name] = (header, rows)
    _write_deployment(config, out_dir, result)


def _run_trajectory(config: ExperimentConfig, out_dir: Path, result: RunResult):
    vectors = trajectory.read_position_vectors(config.input_sbs)
    outcome = trajectory.process_vectors(vectors, config.mec)
    result.artifacts.extend(trajectory.write_outputs(outcome, out_dir))
    result.tables['stats'] = [
        (source, stats.as_dict()) for source, stats in sorted(outcome.stats.items())
    ]


SCENARIO_RUNNERS = {
    'a2g_sweep': _run_a2g,
    'a2a_power': lambda c, o, r: _run_a2a_coverage(c, o, r, 'power'),
    'a2a_pathloss': lambda c, o, r: _run_a2a_coverage(c, o, r, 'pathloss'),
    'a2a_density': _run_a2a_density,
    'trajectory': _run_trajectory,
}


def run_experiment(config: ExperimentConfig, out_dir: Optional[Path] = None) -> RunResult:
    """
    Run the configured scenario and write CSVs plus manifest.txt.

    Errors are logged and turned into a non-zero status: 1 for configuration
    problems, 2 for numerical failures, 3 for I/O failures.

    Args:
        config: Parsed experiment
        out_dir: Overrides config.output_dir

    Returns:
        RunResult with status and the artifacts written so far
    """
    out_dir = Path(out_dir) if out_dir is not None else config.output_dir
    result = RunResult(status=EXIT_OK)
    logger.info(f"Running {config.scenario} (seed {config.seed}) into {out_dir}")

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        SCENARIO_RUNNERS[config.scenario](config, out_dir, result)
        result.artifacts.append(write_manifest(out_dir / 'manifest.txt', config, list(result.artifacts)))
    except NumericalError as e:
        logger.error(f"Numerical failure in {config.scenario}: {e}")
        result.status, result.error = EXIT_NUMERICAL, str(e)
    except (SurveilError, OSError) as e:
        logger.error(f"{config.scenario} failed: {e}")
        result.status, result.error = exit_code_for(e), str(e)

    return result
