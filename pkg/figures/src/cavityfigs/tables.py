"""Loading of simulation result tables (CSV or JSON) with their sidecars.

The generator CLI writes tables in two formats:

- CSV: one header row of column names, float cells in round-trip notation,
  empty cells for undefined values, and (for sweep tables) a trailing
  ``error`` column holding a message for rows whose parameters were invalid.
  A ``<path>.meta.json`` sidecar carries the resolved configuration.
- JSON: an object ``{"columns", "data", "metadata", "row_errors"}`` where
  ``columns`` excludes the error column and ``row_errors`` is a parallel
  list of messages (empty string for clean rows).

Both load into the same :class:`Table`; rendering code never touches the
files directly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyTableError, MissingColumnsError, TableFormatError

__all__ = ["Table", "load_table"]

ERROR_COLUMN = "error"


@dataclass(frozen=True)
class Table:
    """A numeric result table plus its provenance metadata."""

    path: Path
    columns: tuple[str, ...]
    data: np.ndarray  # shape (n_rows, n_columns), NaN for undefined cells
    row_errors: tuple[str, ...]  # one entry per row, "" when the row is clean
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        self.require(name)
        return self.data[:, self.columns.index(name)]

    def require(self, *names: str) -> None:
        """Raise :class:`MissingColumnsError` unless every column exists."""
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise MissingColumnsError(self.path, missing, names, self.columns)

    def clean_rows(self) -> np.ndarray:
        """Boolean mask of rows that carry no error message."""
        return np.array([not e for e in self.row_errors], dtype=bool)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]


def _cell_to_float(text: str) -> float:
    if text == "":
        return math.nan
    return float(text)


def _load_csv(path: Path) -> tuple[list[str], list[list[float]], list[str]]:
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise TableFormatError(f"{path}: no header row") from None
        has_error_col = bool(header) and header[-1] == ERROR_COLUMN
        names = header[:-1] if has_error_col else header
        rows, errors = [], []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise TableFormatError(
                    f"{path}:{lineno}: {len(record)} cells but {len(header)} columns"
                )
            payload = record[:-1] if has_error_col else record
            try:
                rows.append([_cell_to_float(cell) for cell in payload])
            except ValueError as exc:
                raise TableFormatError(f"{path}:{lineno}: {exc}") from None
            errors.append(record[-1] if has_error_col else "")
    return names, rows, errors


def _load_json(path: Path) -> tuple[list[str], list[list[float]], list[str], dict]:
    with path.open() as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict) or "columns" not in payload or "data" not in payload:
        raise TableFormatError(f"{path}: expected a table object with columns and data")
    names = list(payload["columns"])
    rows = [
        [math.nan if cell is None else float(cell) for cell in row]
        for row in payload["data"]
    ]
    errors = list(payload.get("row_errors") or [""] * len(rows))
    return names, rows, errors, payload.get("metadata") or {}


def _sidecar_metadata(path: Path) -> dict:
    sidecar = path.with_name(path.name + ".meta.json")
    if sidecar.exists():
        with sidecar.open() as handle:
            return json.load(handle)
    return {}


def load_table(path) -> Table:
    """Load one table file, CSV or JSON decided by extension."""
    path = Path(path)
    if not path.exists():
        raise TableFormatError(f"{path}: table file does not exist")
    if path.suffix.lower() == ".json":
        names, rows, errors, metadata = _load_json(path)
    else:
        names, rows, errors = _load_csv(path)
        metadata = _sidecar_metadata(path)
    if not rows:
        raise EmptyTableError(f"{path}: table has no data rows, nothing to render")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(names):
        raise TableFormatError(
            f"{path}: data width {data.shape[1]} does not match header ({len(names)})"
        )
    return Table(
        path=path,
        columns=tuple(names),
        data=data,
        row_errors=tuple(errors),
        metadata=metadata,
    )
