"""Profile CSV, report JSON and config-file reading/writing."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .energy import Profile
from .errors import InvalidParameters
from .grid import RadialGrid, grid_from_nodes

# 17 significant digits always round-trip an IEEE double
FLOAT_FORMAT = ".17g"


class ProfileFormatError(InvalidParameters):
    """Malformed profile or config file; the message carries the location."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def format_float(x: float) -> str:
    return format(float(x), FLOAT_FORMAT)


# --------------------------------------------------------------------------
# profiles


@dataclass
class LoadedProfile:
    grid: RadialGrid
    u: np.ndarray
    f: np.ndarray | None  # None for an `r,u` (γ = ∞) file

    def as_profile(self) -> Profile:
        f = np.ones(self.grid.n) if self.f is None else self.f
        return Profile(self.u, f, self.grid)


def write_profile(path, r, u, f=None) -> None:
    """Write `r,u,f` (or `r,u` when f is None), one row per node."""
    cols = [np.asarray(r, dtype=float), np.asarray(u, dtype=float)]
    header = ["r", "u"]
    if f is not None:
        cols.append(np.asarray(f, dtype=float))
        header.append("f")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([format_float(x) for x in row])


def _grid_ratio(nodes) -> float:
    gaps = np.diff(nodes)
    if len(gaps) < 2:
        return 1.0
    return float(np.median(gaps[1:] / gaps[:-1]))


def read_profile(path) -> LoadedProfile:
    """Parse a profile CSV; any defect raises ProfileFormatError naming the line."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ProfileFormatError(path, 1, "empty file") from None
        header = [h.strip() for h in header]
        if header not in (["r", "u"], ["r", "u", "f"]):
            raise ProfileFormatError(path, 1, f"expected header r,u,f or r,u, got {','.join(header)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ProfileFormatError(path, line, f"expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise ProfileFormatError(path, line, str(exc)) from None
            if not all(math.isfinite(v) for v in values):
                raise ProfileFormatError(path, line, "non-finite value")
            if rows and values[0] <= rows[-1][0]:
                raise ProfileFormatError(path, line, "r must be strictly increasing")
            rows.append(values)
    if len(rows) < 3:
        raise ProfileFormatError(path, 1, f"need at least 3 rows, got {len(rows)}")
    data = np.array(rows)
    try:
        grid = grid_from_nodes(data[:, 0], _grid_ratio(data[:, 0]))
    except InvalidParameters as exc:
        raise ProfileFormatError(path, 2, str(exc)) from None
    f = data[:, 2].copy() if data.shape[1] == 3 else None
    return LoadedProfile(grid, data[:, 1].copy(), f)


# --------------------------------------------------------------------------
# reports


def jsonable(obj):
    """Recursively replace non-finite floats with strings ("inf", "-inf",
    "nan") and numpy scalars with Python ones."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path, payload: dict) -> None:
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# --------------------------------------------------------------------------
# config files


def read_config(path) -> dict[str, str]:
    """`key = value` lines; `#` starts a comment; keys may use - or _.

    Values are returned as strings for the caller to convert.
    """
    out = {}
    path = Path(path)
    for n, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ProfileFormatError(path, n, f"expected 'key = value', got {raw.strip()!r}")
        out[key.replace("-", "_")] = value
    return out
