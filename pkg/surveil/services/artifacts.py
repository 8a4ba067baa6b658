"""CSV and manifest writers shared by every scenario."""

import csv
import hashlib
import logging
import math
from importlib import metadata
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from surveil import __version__

logger = logging.getLogger(__name__)

TRACKED_PACKAGES = ('numpy', 'scipy', 'crcmod', 'bitstruct', 'click', 'rich', 'python-dotenv')


def format_value(value) -> str:
    """Fixed-precision text for CSV cells; ints and strings pass through."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return '%.10g' % value
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """
    Write a CSV whose header names carry their units (e.g. height_m, snr_db).

    Args:
        path: Destination file
        header: Column names
        rows: Row values, formatted with format_value

    Returns:
        The written path
    """
    path = Path(path)
    count = 0
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(65536), b''):
            digest.update(block)
    return digest.hexdigest()


def package_versions() -> Dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'not installed'
    return versions


def write_manifest(path: Path, config, artifacts: List[Path]) -> Path:
    """
    Record what produced a run: config digest, seed, versions, resolved
    parameters in dB and linear form, and the digest of every artifact.

    No wall-clock fields are written, so identical runs give identical manifests.
    """
    path = Path(path)
    lines = [
        f"surveil_version = {__version__}",
        f"scenario = {config.scenario}",
        f"seed = {config.seed}",
        f"trials = {config.trials}",
        f"config_sha256 = {config.text_sha256}",
        "",
        "[versions]",
    ]
    lines += [f"{name} = {version}" for name, version in package_versions().items()]
    lines += ["", "[parameters]"]
    for section, values in config.values.items():
        for key, value in values.items():
            if isinstance(value, tuple):
                text = ', '.join(format_value(v) for v in value)
            elif value is None:
                text = ''
            else:
                text = format_value(value)
            lines.append(f"{section}.{key} = {text}")
    lines += ["", "[resolved]"]
    for key, (db_value, linear_value) in sorted(config.resolved.items()):
        lines.append(f"{key} = {format_value(float(db_value))} dB | {format_value(float(linear_value))} linear")
    lines += ["", "[artifacts]"]
    for artifact in artifacts:
        lines.append(f"{Path(artifact).name} = {sha256_file(artifact)}")

    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path
