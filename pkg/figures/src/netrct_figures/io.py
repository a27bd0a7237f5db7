"""Readers for the simulator's documented file formats.

The figures package consumes the CSV, JSON and edge-list files the
simulator CLI emits; it deliberately has no dependency on the simulator
itself.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path


class InputError(RuntimeError):
    """A required input file is missing or malformed; carries the path."""

    def __init__(self, path, message: str):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


def _open_checked(path):
    path = Path(path)
    if not path.is_file():
        raise InputError(path, "input file not found")
    return path


def _to_float(cell: str) -> float:
    if cell == "":
        return math.nan
    return float(cell)


def read_csv_columns(path) -> dict[str, list]:
    """A CSV with a header row; numeric cells parsed, blanks as NaN."""
    path = _open_checked(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows) < 1:
        raise InputError(path, "empty CSV")
    header = rows[0]
    columns: dict[str, list] = {name: [] for name in header}
    for row in rows[1:]:
        if len(row) != len(header):
            raise InputError(path, f"row has {len(row)} cells, header has {len(header)}")
        for name, cell in zip(header, row):
            try:
                columns[name].append(_to_float(cell))
            except ValueError:
                columns[name].append(cell)
    return columns


def read_timeseries(path) -> dict[str, list]:
    columns = read_csv_columns(path)
    for required in ("t", "mean_all"):
        if required not in columns:
            raise InputError(path, f"missing column {required!r}")
    return columns


def read_edge_list(path) -> tuple[int, list[tuple[int, int]]]:
    """Edge-list text: '# n=<n> ...' header then 'u v' lines."""
    path = _open_checked(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise InputError(path, "missing '# n=...' header line")
    meta = dict(part.split("=", 1) for part in lines[0][1:].split() if "=" in part)
    if "n" not in meta:
        raise InputError(path, "header does not declare n")
    n = int(meta["n"])
    edges = []
    for line in lines[1:]:
        if not line.strip():
            continue
        try:
            u, v = map(int, line.split())
        except ValueError as exc:
            raise InputError(path, f"bad edge line {line!r}") from exc
        edges.append((u, v))
    return n, edges


def read_node_ids(path) -> set[int]:
    path = _open_checked(path)
    try:
        return {int(line) for line in path.read_text().split()}
    except ValueError as exc:
        raise InputError(path, "expected one integer node id per line") from exc


def read_report(path) -> dict:
    path = _open_checked(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(path, f"invalid JSON: {exc}") from exc
