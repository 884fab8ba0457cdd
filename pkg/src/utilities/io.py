# =============================================================================
# utilities/io.py
# =============================================================================
# Purpose:
# Writers whose bytes depend only on the data:
# - CSV with every float printed to 17 significant digits
# - JSON with sorted keys and a trailing newline
# - JSON lines, one record per line
# plus the sha256 checksums recorded in run manifests.
# =============================================================================

import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

from config import Config

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """CSV cell text: floats as .17g, None as an empty cell, everything else str()."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.{Config.CSV_DIGITS}g}"
    if hasattr(value, "dtype") and value.dtype.kind == "f":
        return f"{float(value):.{Config.CSV_DIGITS}g}"
    return str(value)


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = _prepare(path)
    count = 0
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str | Path, data: Any) -> Path:
    path = _prepare(path)
    with open(path, "w", newline="") as f:
        f.write(dumps_json(data))
    logger.info(f"Wrote {path}")
    return path


def write_json_lines(path: str | Path, records: Iterable[Any]) -> Path:
    path = _prepare(path)
    count = 0
    with open(path, "w", newline="") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True, allow_nan=False) + "\n")
            count += 1
    logger.info(f"Wrote {count} records to {path}")
    return path


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
