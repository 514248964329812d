# -*- coding: utf-8 -*-
"""
snapshot.py
Geometry Module - Field Snapshots
=====================

Plain-text dump of grid fields: one `# {json header}` line followed by CSV
rows in row-major axis order, one column per component.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ahsolve.errors import ConfigError
from ahsolve.geometry.grid import PeriodicGrid, ScalarField

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "ahsolve-field/1"


@dataclass
class FieldSnapshot:
    """Decoded snapshot: header metadata plus per-point component columns."""
    name: str
    grid: PeriodicGrid
    columns: List[str]
    values: np.ndarray = field(repr=False)  # (*grid, len(columns))
    meta: Dict = field(default_factory=dict)

    def scalar(self, column: Optional[str] = None) -> ScalarField:
        """Column as a ScalarField (the only column when `column` is None)."""
        index = 0 if column is None else self.columns.index(column)
        return ScalarField(self.grid, self.values[..., index])


def write_field(
    path: Union[str, Path],
    grid: PeriodicGrid,
    values: Union[ScalarField, np.ndarray, Dict[str, np.ndarray]],
    name: str,
    preset: str = "",
    meta: Optional[Dict] = None,
) -> Path:
    """
    Write one or more per-point fields.

    Args:
        path (str | Path): Output file.
        grid (PeriodicGrid): Grid the values live on.
        values: A ScalarField, a grid-shaped array, or a mapping column → array.
        name (str): Field name stored in the header.
        preset (str): Geometry preset label.
        meta (dict | None): Extra JSON-serializable header entries.

    Returns:
        Path: Written path.
    """
    if isinstance(values, ScalarField):
        columns: Dict[str, np.ndarray] = {name: values.values}
    elif isinstance(values, dict):
        columns = values
    else:
        columns = {name: np.asarray(values)}

    flat = []
    for column, array in columns.items():
        array = np.asarray(array, dtype=float)
        if array.size != grid.num_points:
            raise ValueError(f"column '{column}' has {array.size} values, grid has {grid.num_points}")
        flat.append(array.reshape(-1))

    header = {
        "format": SNAPSHOT_FORMAT,
        "name": name,
        "preset": preset,
        "columns": list(columns),
        **grid.describe(),
        **(meta or {}),
    }
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        out,
        np.column_stack(flat),
        delimiter=",",
        fmt="%.17g",
        header=json.dumps(header, ensure_ascii=False),
        comments="# ",
    )
    logger.debug("Field '%s' -> %s", name, out)
    return out


def read_field(path: Union[str, Path]) -> FieldSnapshot:
    """
    Read a snapshot written by `write_field`.

    Raises:
        ConfigError: If the header is missing or inconsistent with the body.
    """
    source = Path(path)
    if not source.is_file():
        raise ConfigError(f"field snapshot not found: {source}")
    with source.open("r", encoding="utf-8") as fh:
        first = fh.readline()
    if not first.startswith("#"):
        raise ConfigError(f"{source}: missing '# {{json}}' header line")
    try:
        header = json.loads(first.lstrip("#").strip())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: unreadable header ({exc})") from exc

    grid = PeriodicGrid(int(header["n"]), tuple(int(s) for s in header["sizes"]), float(header.get("period", 1.0)))
    columns: Sequence[str] = header.get("columns") or [header.get("name", "u")]
    body = np.loadtxt(source, delimiter=",", comments="#", ndmin=2)
    if body.shape != (grid.num_points, len(columns)):
        raise ConfigError(
            f"{source}: body has shape {body.shape}, header promises ({grid.num_points}, {len(columns)})"
        )
    reserved = {"format", "name", "preset", "columns", "n", "sizes", "spacing", "period"}
    meta = {key: value for key, value in header.items() if key not in reserved}
    meta["preset"] = header.get("preset", "")
    return FieldSnapshot(
        name=header.get("name", ""),
        grid=grid,
        columns=list(columns),
        values=body.reshape(grid.shape + (len(columns),)),
        meta=meta,
    )
