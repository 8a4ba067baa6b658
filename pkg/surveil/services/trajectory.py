"""Run recorded SBS position feeds through the on-board processor."""

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

from core.exceptions import ConfigurationError, EncodingError
from core.onboard import MecConfig, OnboardProcessor, PositionVector, TrajectoryStats, run_trajectory
from core.sbs_codec import encode_sbs, iter_sbs_lines

from .artifacts import format_value, write_csv

logger = logging.getLogger(__name__)

DECISIONS_HEADER = (
    'source_id', 'sequence', 'action', 'distance', 'fallback',
    'supplement_lon_deg', 'supplement_lat_deg', 'supplement_alt',
)


@dataclass
class TrajectoryResult:
    optimized: List[PositionVector]
    stats: Dict[str, TrajectoryStats]

    @property
    def total(self) -> TrajectoryStats:
        total = TrajectoryStats()
        for stats in self.stats.values():
            for name in ('input_count', 'warmup_count', 'relayed_count', 'abandoned_count',
                         'supplemented_count', 'sphere_count', 'linear_count'):
                setattr(total, name, getattr(total, name) + getattr(stats, name))
        return total


def read_position_vectors(path: Path, strict: bool = True) -> List[PositionVector]:
    """Decode an SBS file; sequence numbers count each aircraft's packets in file order."""
    counters = defaultdict(int)
    vectors = []
    with open(path, encoding='utf-8') as f:
        for report in iter_sbs_lines(f, strict=strict):
            counters[report.hex_ident] += 1
            vectors.append(PositionVector.from_report(report, counters[report.hex_ident]))
    logger.info(f"Read {len(vectors)} position reports for {len(counters)} aircraft from {path}")
    return vectors


def process_vectors(vectors: List[PositionVector], config: MecConfig) -> TrajectoryResult:
    """
    Single-aircraft feeds go through run_trajectory; mixed feeds through an
    OnboardProcessor holding one window per aircraft.
    """
    minimum = config.window_size + 2
    if len(vectors) < minimum:
        raise ConfigurationError(
            f"input has {len(vectors)} reports, at least {minimum} are needed for window size {config.window_size}",
            key='window_size',
        )
    sources = {v.source_id for v in vectors}
    if len(sources) == 1:
        optimized, stats = run_trajectory(vectors, config)
        return TrajectoryResult(optimized, {vectors[0].source_id: stats})

    processor = OnboardProcessor(config)
    optimized = processor.run(vectors)
    for source, stats in processor.stats.items():
        if stats.input_count < minimum:
            logger.warning(f"aircraft {source} has only {stats.input_count} reports; all relayed as warm-up")
    return TrajectoryResult(optimized, processor.stats)


def write_outputs(result: TrajectoryResult, out_dir: Path) -> List[Path]:
    """Write optimized.sbs, decisions.csv and stats.txt; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    sbs_path = out_dir / 'optimized.sbs'
    lines = []
    for vector in result.optimized:
        if vector.report is None:
            raise EncodingError(f"packet {vector.sequence} of {vector.source_id} has no SBS report", field='report')
        lines.append(encode_sbs(vector.report))
    sbs_path.write_text(''.join(f"{line}\n" for line in lines), encoding='utf-8')

    rows = []
    for source in sorted(result.stats):
        for decision in result.stats[source].decisions:
            supplement = decision.supplement
            rows.append((
                source,
                decision.incoming.sequence,
                decision.action.value,
                float(decision.distance),
                decision.fallback_used.value,
                supplement.lon if supplement else '',
                supplement.lat if supplement else '',
                supplement.alt if supplement else '',
            ))
    decisions_path = write_csv(out_dir / 'decisions.csv', DECISIONS_HEADER, rows)

    stats_path = out_dir / 'stats.txt'
    text = []
    for source in sorted(result.stats):
        for key, value in result.stats[source].as_dict().items():
            text.append(f"{source}.{key} = {format_value(value)}")
    for key, value in result.total.as_dict().items():
        text.append(f"total.{key} = {format_value(value)}")
    stats_path.write_text('\n'.join(text) + '\n', encoding='utf-8')

    return [sbs_path, decisions_path, stats_path]
