"""
Result Files
=============

Everything a run writes goes through a `ResultStore` rooted at the output
directory:

    <field>.csv     one row per cell, one column per time node
    *.json          summaries and reports, keys sorted
    manifest.json   RunManifest: config echo, status, wall time, and the
                    sha256 + size of every other result file

CSV layout (floats always printed with 17 significant digits, so a value
read back is bit-identical to the value written):

    cell,x,t=0,t=0.001,...           1D
    cell,x,y,t=0,t=0.001,...         2D

Wall time only appears in the manifest. Every other file depends on the
config alone, which is what makes repeated runs byte-identical.

LEARNING POINT: Path Traversal Prevention
--------------------------------------------
File names come from code here, but the output directory comes from a
config file. `_safe_path` resolves every target and refuses anything that
lands outside the output directory.
"""

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, Field

from gliorad.core.errors import ConfigurationError
from gliorad.core.fields import SpaceTimeField
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)

MANIFEST_NAME = "manifest.json"
LOG_NAME = "run.log"


def format_float(value: float) -> str:
    return f"{float(value):.17g}"


def sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class FileRecord(BaseModel):
    path: str
    sha256: str
    bytes: int


class RunManifest(BaseModel):
    """Inventory of one run's outputs."""

    version: str
    mode: str
    status: Literal["ok", "failed"] = "ok"
    error: str | None = None
    wall_time: float = 0.0
    config: dict[str, Any] = Field(default_factory=dict)
    files: list[FileRecord] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class ResultStore:
    """Writes result files under one output directory and remembers them."""

    def __init__(self, base_dir: str | Path):
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self._written: dict[str, Path] = {}

    # ─── Writers ──────────────────────────────────────────────────

    def write_text(self, relative_path: str, content: str) -> Path:
        file_path = self._safe_path(relative_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(content, encoding="utf-8")
        self._written[relative_path] = file_path
        logger.info(f"Wrote {file_path}")
        return file_path

    def write_json(self, relative_path: str, data: dict) -> Path:
        content = json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False)
        return self.write_text(relative_path, content + "\n")

    def write_rows(self, relative_path: str, headers: list[str], rows: list[list]) -> Path:
        """Plain CSV table; float cells are printed with 17 significant digits."""
        file_path = self._safe_path(relative_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(headers)
            for row in rows:
                writer.writerow(
                    [format_float(cell) if isinstance(cell, float) else cell for cell in row]
                )
        self._written[relative_path] = file_path
        logger.info(f"Wrote {file_path} ({len(rows)} rows)")
        return file_path

    def write_field(self, relative_path: str, field: SpaceTimeField) -> Path:
        grid = field.grid
        axes = ["x", "y"][: grid.dim]
        headers = ["cell", *axes, *(f"t={format_float(t)}" for t in grid.times)]
        rows = [
            [index, *map(float, grid.centers[index]), *map(float, field.values[index])]
            for index in range(grid.num_cells)
        ]
        return self.write_rows(relative_path, headers, rows)

    def write_manifest(self, manifest: RunManifest) -> Path:
        """Write manifest.json; it is never part of its own inventory."""
        file_path = self._safe_path(MANIFEST_NAME)
        content = json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True)
        file_path.write_text(content + "\n", encoding="utf-8")
        logger.info(f"Wrote {file_path} (status {manifest.status})")
        return file_path

    # ─── Inventory ────────────────────────────────────────────────

    def inventory(self) -> list[FileRecord]:
        """Checksums of everything written so far, sorted by path."""
        return [
            FileRecord(path=name, sha256=sha256(path), bytes=path.stat().st_size)
            for name, path in sorted(self._written.items())
        ]

    def path(self, relative_path: str) -> Path:
        return self._safe_path(relative_path)

    def _safe_path(self, relative_path: str) -> Path:
        resolved = (self.base_dir / relative_path).resolve()
        base_resolved = self.base_dir.resolve()
        if not resolved.is_relative_to(base_resolved):
            raise ConfigurationError(
                f"path traversal blocked: '{relative_path}' resolves outside {base_resolved}",
                "output_dir",
            )
        return resolved


# ─── Readers ──────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class FieldTable:
    """Contents of a field CSV."""

    coordinates: np.ndarray
    times: np.ndarray
    values: np.ndarray

    @property
    def num_cells(self) -> int:
        return self.values.shape[0]


def read_field_csv(path: str | Path) -> FieldTable:
    """
    Load a CSV written by `ResultStore.write_field`.

    Raises:
        ConfigurationError: missing file or a malformed header / row.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"field file not found: {path}")

    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ConfigurationError(f"field file is empty: {path}")

    header, body = rows[0], rows[1:]
    time_columns = [index for index, name in enumerate(header) if name.startswith("t=")]
    axis_columns = [index for index, name in enumerate(header) if name in ("x", "y")]
    if not header or header[0] != "cell" or not time_columns or not axis_columns:
        raise ConfigurationError(f"unexpected field header in {path}: {header[:4]}")

    try:
        times = np.array([float(header[index][2:]) for index in time_columns])
        table = np.array([[float(cell) for cell in row] for row in body], dtype=float)
    except ValueError as e:
        raise ConfigurationError(f"malformed number in {path}: {e}") from e
    if table.ndim != 2 or table.shape[1] != len(header):
        raise ConfigurationError(f"ragged rows in {path}")

    return FieldTable(
        coordinates=table[:, axis_columns],
        times=times,
        values=table[:, time_columns],
    )


def load_manifest(path: str | Path) -> RunManifest:
    return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))


def verify_manifest(manifest: RunManifest, base_dir: str | Path) -> list[str]:
    """Problems found re-checking every listed file; empty when all match."""
    base_dir = Path(base_dir)
    problems = []
    for record in manifest.files:
        path = base_dir / record.path
        if not path.is_file():
            problems.append(f"{record.path}: missing")
        elif sha256(path) != record.sha256:
            problems.append(f"{record.path}: checksum mismatch")
        elif path.stat().st_size != record.bytes:
            problems.append(f"{record.path}: size mismatch")
    return problems
