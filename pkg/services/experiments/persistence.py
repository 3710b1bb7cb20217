"""CSV and manifest files of a run, each written to a temporary file and renamed into place."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from services.circuits import Estimate
from services.observables import TimeSeries

log = logging.getLogger("experiments")

MANIFEST = "manifest.json"
SERIES_COLUMNS = ("n", "t", "value", "imag_residual")
ESTIMATE_COLUMNS = ("n", "mean", "stderr", "trajectories")


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def atomic_write(path: Path, text: str) -> Path:
    """Write ``text`` next to ``path`` and rename it over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def render_table(
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Mapping[str, Any] | None = None,
) -> str:
    """``# key=value`` metadata lines, then a CSV header and body."""
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}={_cell(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_table(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    atomic_write(path, render_table(columns, rows, metadata))
    log.info("Wrote %s", path)
    return path


def write_series(
    path: Path, series: TimeSeries, metadata: Mapping[str, Any] | None = None, *, fingerprint: str
) -> Path:
    """One row per period; the header carries the run fingerprint and the protocol."""
    residual = series.imag_residual if series.imag_residual is not None else np.zeros(len(series))
    rows = (
        (n, t, v, r)
        for n, (t, v, r) in enumerate(zip(series.times, series.values, residual, strict=True))
    )
    meta = {
        "fingerprint": fingerprint,
        "observable": series.label,
        "period": series.period,
        **series.protocol,
        **(metadata or {}),
    }
    return write_table(path, SERIES_COLUMNS, rows, meta)


def write_estimates(
    path: Path, label: str, estimates: Sequence[Estimate], metadata: Mapping[str, Any] | None = None
) -> Path:
    rows = ((n, e.mean, e.stderr, e.trajectories) for n, e in enumerate(estimates))
    return write_table(path, ESTIMATE_COLUMNS, rows, {"observable": label, **(metadata or {})})


def read_table(path: Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """(metadata, header, rows) of a file written by :func:`write_table`."""
    metadata: dict[str, str] = {}
    body: list[str] = []
    with path.open(encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("# ") and not body:
                key, _, value = line[2:].rstrip("\n").partition("=")
                metadata[key] = value
            else:
                body.append(line)
    reader = csv.reader(body)
    header = next(reader, [])
    return metadata, header, [row for row in reader]


def table_body(path: Path) -> str:
    """The CSV part without metadata lines; what determinism checks compare."""
    return "".join(line for line in path.read_text(encoding="utf-8").splitlines(keepends=True)
                   if not line.startswith("# "))


def write_manifest(out_dir: Path, manifest: Mapping[str, Any]) -> Path:
    path = out_dir / MANIFEST
    atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    log.info("Wrote %s", path)
    return path


def read_manifest(out_dir: Path) -> dict[str, Any]:
    return json.loads((out_dir / MANIFEST).read_text(encoding="utf-8"))
