"""Interpolation data over a rectangular grid.

A grid is a pair of strictly increasing knot vectors plus a matrix of
heights z[i, j] at (x_i, y_j). Grid tables arrive as CSV: the first row
holds the x knots behind one empty cell, the first column holds the y
knots, and the body holds z with one row per y knot (comma separator,
'.' decimal, UTF-8).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import GridFormatError, ValidationError

#: A section counts as collinear when its height is below this times (max|z|+1).
COLLINEAR_RTOL = 1e-12

#: Knot spacings may deviate from their mean by this relative amount and
#: still count as uniform.
UNIFORM_RTOL = 1e-12


@dataclass(frozen=True)
class KnotVector:
    """Strictly increasing coordinates along one axis."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or len(v) < 2:
            raise ValidationError("a knot vector needs at least two entries")
        if not np.all(np.isfinite(v)):
            raise ValidationError("knots must be finite")
        if not np.all(np.diff(v) > 0):
            bad = int(np.flatnonzero(np.diff(v) <= 0)[0]) + 1
            raise ValidationError(f"knots not strictly increasing at index {bad}")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i) -> float:
        return float(self.values[i])

    @property
    def intervals(self) -> int:
        return len(self.values) - 1

    @property
    def span(self) -> float:
        return float(self.values[-1] - self.values[0])


@dataclass(frozen=True)
class DataGrid:
    """Knot vectors plus the (n+1) x (m+1) height matrix z[i, j]."""

    xs: KnotVector
    ys: KnotVector
    z: np.ndarray
    source_window: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        object.__setattr__(self, "z", z)
        if z.shape != (len(self.xs), len(self.ys)):
            raise ValidationError(
                f"z is {z.shape[0]}x{z.shape[1]} but knots imply "
                f"{len(self.xs)}x{len(self.ys)}")
        if not np.all(np.isfinite(z)):
            raise ValidationError("z values must be finite")

    @property
    def n(self) -> int:
        return self.xs.intervals

    @property
    def m(self) -> int:
        return self.ys.intervals

    @property
    def z_scale(self) -> float:
        return float(np.abs(self.z).max())

    def corner_values(self):
        """z at the four domain corners: (z00, zn0, z0m, znm)."""
        z = self.z
        return float(z[0, 0]), float(z[-1, 0]), float(z[0, -1]), float(z[-1, -1])


def make_grid(xs, ys, z) -> DataGrid:
    return DataGrid(KnotVector(np.asarray(xs, float)),
                    KnotVector(np.asarray(ys, float)),
                    np.asarray(z, float))


# ---------------------------------------------------------------------------
# Loading


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise GridFormatError(f"non-numeric cell {text!r}", row, col)
    if not np.isfinite(v):
        raise GridFormatError(f"non-finite cell {text!r}", row, col)
    return v


def load_grid(source) -> DataGrid:
    """Read a grid table from a path, text, or open text stream."""
    if isinstance(source, str) and "\n" not in source and "," not in source:
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_grid(fh)
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = [r for r in csv.reader(source) if any(cell.strip() for cell in r)]
    if len(rows) < 3:
        raise GridFormatError("grid table needs a header row and at least two data rows")
    header = rows[0]
    if header[0].strip() != "":
        raise GridFormatError("first cell of the header row must be empty", 1, 1)
    xs = [_parse_cell(c, 1, k + 2) for k, c in enumerate(header[1:]) if c.strip() != ""]
    if len(xs) != len(header) - 1:
        raise GridFormatError("empty cell inside the x-knot header", 1, None)
    if len(xs) < 2:
        raise GridFormatError("need at least two x knots", 1, None)
    ys = []
    zrows = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise GridFormatError(
                f"row has {len(row)} cells, expected {len(header)}", r, None)
        ys.append(_parse_cell(row[0], r, 1))
        zrows.append([_parse_cell(c, r, k + 2) for k, c in enumerate(row[1:])])
    try:
        xknots = KnotVector(np.array(xs))
        yknots = KnotVector(np.array(ys))
    except ValidationError as exc:
        raise GridFormatError(str(exc)) from exc
    # CSV body is one row per y knot; DataGrid stores z[i, j] = z(x_i, y_j).
    z = np.array(zrows, dtype=float).T
    return DataGrid(xknots, yknots, z)


# ---------------------------------------------------------------------------
# Section heights


@dataclass(frozen=True)
class HeightReport:
    """Largest chord-to-point vertical distance over all grid sections.

    A column section fixes one x knot and varies y; its chord joins the
    first and last points of the section. 'height' is the maximum over
    every column and row section; degenerate() tells whether that maximum
    is small enough to count all sections as collinear.
    """

    best_axis: str  # "column" | "row"
    best_index: int
    height: float
    per_column: np.ndarray
    per_row: np.ndarray
    z_scale: float

    def degenerate(self) -> bool:
        return self.height <= COLLINEAR_RTOL * (self.z_scale + 1.0)


def _section_heights(knots: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Max |value - chord| per section; sections are the rows of `values`."""
    t = (knots - knots[0]) / (knots[-1] - knots[0])
    chord = values[:, :1] * (1 - t)[None, :] + values[:, -1:] * t[None, :]
    return np.abs(values - chord).max(axis=1)


def height_report(grid: DataGrid) -> HeightReport:
    """Heights of all column and row sections; ties go to the earliest column."""
    per_col = _section_heights(grid.ys.values, grid.z)
    per_row = _section_heights(grid.xs.values, grid.z.T)
    best_axis, best_index = "column", int(np.argmax(per_col))
    height = float(per_col[best_index])
    if per_row.max() > height:
        best_axis, best_index = "row", int(np.argmax(per_row))
        height = float(per_row[best_index])
    return HeightReport(best_axis, best_index, height, per_col, per_row,
                        grid.z_scale)


# ---------------------------------------------------------------------------
# Uniformity and normalization


@dataclass(frozen=True)
class UniformityCheck:
    uniform: bool
    max_rel_deviation: float


def _axis_deviation(knots: np.ndarray) -> float:
    d = np.diff(knots)
    mean = d.mean()
    return float(np.abs(d - mean).max() / mean)


def is_uniform(grid: DataGrid) -> UniformityCheck:
    """Equal spacing on both axes (to UNIFORM_RTOL) and a square cell count."""
    dev = max(_axis_deviation(grid.xs.values), _axis_deviation(grid.ys.values))
    return UniformityCheck(dev <= UNIFORM_RTOL and grid.n == grid.m, dev)


def normalize_to_unit(grid: DataGrid) -> DataGrid:
    """Rescale both axes onto [0, 1]; z untouched; original spans kept."""
    def unit(knots: KnotVector) -> np.ndarray:
        v = knots.values
        return (v - v[0]) / (v[-1] - v[0])

    window = ((grid.xs[0], grid.xs[-1]), (grid.ys[0], grid.ys[-1]))
    return DataGrid(KnotVector(unit(grid.xs)), KnotVector(unit(grid.ys)),
                    grid.z.copy(), source_window=window)
