"""Construction of the surface IFS.

Cells are indexed 1..n by 1..m as in E_ij = [x_{i-1}, x_i] x [y_{j-1}, y_j].
Each cell carries one map W_ij = (L_ij, F_ij): L_ij squeezes the whole
domain onto the cell (affine per axis, alternating orientation so that
neighbouring maps send a common domain endpoint onto their shared knot),
and F_ij(x, y, z) = s(L_ij(x, y)) * (z - g(x, y)) + h(L_ij(x, y)) with a
vertical scaling field s, |s| strictly inside (0, 1).

Points on interior borders belong to the cell on their right/upper side
(half-open cells, the last cell closed); continuity of the attractor
makes the choice value-irrelevant, which check_border_consistency
verifies at runtime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import expr as expr_mod
from .errors import ValidationError
from .expr import ExprAst, FieldMeta, evaluate, field_meta_of
from .grid import DataGrid, KnotVector

DEFAULT_FIELD_RESOLUTION = 64

#: Tolerance for user-supplied g/h matching the data (scaled by 1+max|z|).
FIELD_MATCH_RTOL = 1e-9


# ---------------------------------------------------------------------------
# Domain maps


@dataclass(frozen=True)
class AxisMaps:
    """Per-interval affine maps of one axis, evaluated in endpoint form.

    Map i sends the full span onto [knot_{i-1}, knot_i]; `lo[i-1]` and
    `hi[i-1]` are the images of the span's first and last knot, so
    endpoint images are exact and orientation is sign(hi - lo).
    """

    knots: KnotVector
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        if len(self.lo) != self.knots.intervals or len(self.hi) != len(self.lo):
            raise ValidationError("one (lo, hi) pair per knot interval required")

    @property
    def count(self) -> int:
        return len(self.lo)

    def orientation(self, i: int) -> int:
        return 1 if self.hi[i - 1] > self.lo[i - 1] else -1

    def contraction(self, i: int) -> float:
        return abs(self.hi[i - 1] - self.lo[i - 1]) / self.knots.span

    def apply(self, i: int, x):
        t = (x - self.knots[0]) / self.knots.span
        return self.lo[i - 1] * (1 - t) + self.hi[i - 1] * t

    def invert(self, i: int, x):
        t = (x - self.lo[i - 1]) / (self.hi[i - 1] - self.lo[i - 1])
        return self.knots[0] * (1 - t) + self.knots[-1] * t

    def matching_defect(self) -> float:
        """Worst deviation from the shared-endpoint condition.

        For every interior knot there must be a common domain endpoint e
        with L_i(e) = L_{i+1}(e) = knot_i; returns the max over interior
        knots of the best achievable mismatch (0 for a sound family).
        """
        worst = 0.0
        ends = (self.knots[0], self.knots[-1])
        for i in range(1, self.count):
            target = self.knots[i]
            best = min(
                max(abs(self.apply(i, e) - target), abs(self.apply(i + 1, e) - target))
                for e in ends
            )
            worst = max(worst, best)
        return worst


def build_axis_maps(knots: KnotVector) -> AxisMaps:
    """Affine maps with alternating orientation (+, -, +, ...).

    Orientation-preserving maps for every interval would leave adjacent
    maps without a common endpoint over each interior knot; alternating
    them is the minimal scheme that restores it.
    """
    k = knots.values
    lo = np.where(np.arange(len(k) - 1) % 2 == 0, k[:-1], k[1:])
    hi = np.where(np.arange(len(k) - 1) % 2 == 0, k[1:], k[:-1])
    return AxisMaps(knots, lo, hi)


def cell_index(knots: KnotVector, x) -> int:
    """1-based half-open cell lookup along one axis (last cell closed)."""
    v = knots.values
    if x < v[0] or x > v[-1]:
        raise ValidationError(f"coordinate {x} outside [{v[0]}, {v[-1]}]")
    return min(int(np.searchsorted(v, x, side="right")), len(v) - 1)


# ---------------------------------------------------------------------------
# Fields


class CornerBilinear:
    """Bilinear interpolant of the four domain-corner values."""

    def __init__(self, grid: DataGrid):
        self.rect = (grid.xs[0], grid.xs[-1], grid.ys[0], grid.ys[-1])
        self.z00, self.zn0, self.z0m, self.znm = grid.corner_values()

    def __call__(self, x, y):
        x0, x1, y0, y1 = self.rect
        u = (x - x0) / (x1 - x0)
        v = (y - y0) / (y1 - y0)
        return (self.z00 * (1 - u) * (1 - v) + self.zn0 * u * (1 - v)
                + self.z0m * (1 - u) * v + self.znm * u * v)

    def eval_in_cell(self, i, j, x, y):
        return self(x, y)

    def lipschitz(self) -> float:
        x0, x1, y0, y1 = self.rect
        du = max(abs(self.zn0 - self.z00), abs(self.znm - self.z0m)) / (x1 - x0)
        dv = max(abs(self.z0m - self.z00), abs(self.znm - self.zn0)) / (y1 - y0)
        return math.hypot(du, dv)

    def describe(self) -> str:
        return "bilinear through domain corners"


class PiecewiseBilinear:
    """Bilinear on each grid cell, through every knot value."""

    def __init__(self, grid: DataGrid):
        self.xs = grid.xs
        self.ys = grid.ys
        self.z = grid.z

    def _locate(self, knots: KnotVector, t):
        idx = np.searchsorted(knots.values, t, side="right")
        return np.clip(idx, 1, knots.intervals)

    def __call__(self, x, y):
        xi = self._locate(self.xs, x)
        yj = self._locate(self.ys, y)
        xv, yv = self.xs.values, self.ys.values
        u = (x - xv[xi - 1]) / (xv[xi] - xv[xi - 1])
        v = (y - yv[yj - 1]) / (yv[yj] - yv[yj - 1])
        z = self.z
        out = (z[xi - 1, yj - 1] * (1 - u) * (1 - v) + z[xi, yj - 1] * u * (1 - v)
               + z[xi - 1, yj] * (1 - u) * v + z[xi, yj] * u * v)
        return out if isinstance(out, np.ndarray) else float(out)

    def eval_in_cell(self, i, j, x, y):
        """Single-patch evaluation for points known to lie in cell (i, j)."""
        xv, yv = self.xs.values, self.ys.values
        u = (x - xv[i - 1]) / (xv[i] - xv[i - 1])
        v = (y - yv[j - 1]) / (yv[j] - yv[j - 1])
        z = self.z
        return (z[i - 1, j - 1] * (1 - u) * (1 - v) + z[i, j - 1] * u * (1 - v)
                + z[i - 1, j] * (1 - u) * v + z[i, j] * u * v)

    def lipschitz(self) -> float:
        worst = 0.0
        xv, yv, z = self.xs.values, self.ys.values, self.z
        for i in range(1, len(xv)):
            for j in range(1, len(yv)):
                dx = xv[i] - xv[i - 1]
                dy = yv[j] - yv[j - 1]
                du = max(abs(z[i, j - 1] - z[i - 1, j - 1]),
                         abs(z[i, j] - z[i - 1, j])) / dx
                dv = max(abs(z[i - 1, j] - z[i - 1, j - 1]),
                         abs(z[i, j] - z[i, j - 1])) / dy
                worst = max(worst, math.hypot(du, dv))
        return worst

    def describe(self) -> str:
        return "piecewise bilinear through all knots"


class ExprField:
    """User-supplied closed-form field."""

    def __init__(self, ast: ExprAst, text: str | None = None):
        self.ast = ast
        self.text = text if text is not None else expr_mod.to_text(ast)

    def __call__(self, x, y):
        return evaluate(self.ast, x, y)

    def eval_in_cell(self, i, j, x, y):
        return self(x, y)

    def describe(self) -> str:
        return f"expression {self.text!r}"


def default_g(grid: DataGrid) -> CornerBilinear:
    """Default g: bilinear through the four corner data values."""
    return CornerBilinear(grid)


def default_h(grid: DataGrid) -> PiecewiseBilinear:
    """Default h: continuous piecewise-bilinear interpolant of all knots."""
    return PiecewiseBilinear(grid)


# ---------------------------------------------------------------------------
# Vertical scaling field


@dataclass(frozen=True)
class VerticalValidation:
    cell_meta: tuple          # (n, m) nested tuple of FieldMeta
    sign: int
    certified: bool
    resolution: int
    allow_negative: bool

    def max_abs(self) -> float:
        return max(m.max_abs for row in self.cell_meta for m in row)

    def min_abs(self) -> float:
        return min(m.min_abs for row in self.cell_meta for m in row)

    def lipschitz(self) -> float:
        return max(m.lipschitz_estimate for row in self.cell_meta for m in row)


class VerticalField:
    """Vertical scaling factor: one constant per cell, one global
    expression, or one expression per cell."""

    def __init__(self, kind: str, *, const=None, ast=None, cell_asts=None,
                 text: str | None = None):
        if kind not in ("constant", "expression", "per-cell"):
            raise ValueError(f"unknown vertical field kind {kind!r}")
        self.kind = kind
        self.const = None if const is None else np.asarray(const, dtype=float)
        self.ast = ast
        self.cell_asts = cell_asts
        self.text = text
        self.validation: VerticalValidation | None = None

    # -- constructors

    @classmethod
    def constant(cls, value: float, n: int, m: int) -> "VerticalField":
        return cls("constant", const=np.full((n, m), float(value)),
                   text=repr(float(value)))

    @classmethod
    def constant_matrix(cls, matrix) -> "VerticalField":
        return cls("constant", const=np.asarray(matrix, dtype=float))

    @classmethod
    def from_expression(cls, source: str | ExprAst) -> "VerticalField":
        if isinstance(source, str):
            ast = expr_mod.parse(source)
            return cls("expression", ast=ast, text=source)
        return cls("expression", ast=source, text=expr_mod.to_text(source))

    @classmethod
    def per_cell(cls, cell_sources) -> "VerticalField":
        rows = []
        for row in cell_sources:
            rows.append(tuple(expr_mod.parse(c) if isinstance(c, str) else c
                              for c in row))
        return cls("per-cell", cell_asts=tuple(rows))

    # -- shape and evaluation

    def dims(self) -> tuple[int, int] | None:
        if self.kind == "constant":
            return self.const.shape
        if self.kind == "per-cell":
            return len(self.cell_asts), len(self.cell_asts[0])
        return None

    def eval_in_cell(self, i: int, j: int, x, y):
        """Value(s) of s at points lying in cell (i, j); cell 1-based."""
        if self.kind == "constant":
            return float(self.const[i - 1, j - 1])
        if self.kind == "expression":
            return evaluate(self.ast, x, y)
        return evaluate(self.cell_asts[i - 1][j - 1], x, y)

    def describe(self) -> str:
        if self.kind == "constant":
            vals = np.unique(self.const)
            if len(vals) == 1:
                return f"constant {vals[0]!r}"
            return "per-cell constants"
        if self.kind == "expression":
            return f"expression {self.text!r}"
        return "per-cell expressions"


def vertical_field_from_spec(spec, n: int, m: int) -> VerticalField:
    """Coerce a float, expression text/AST, matrix, or field into a field."""
    if isinstance(spec, VerticalField):
        return spec
    if isinstance(spec, (int, float)):
        return VerticalField.constant(float(spec), n, m)
    if isinstance(spec, (str, expr_mod.Num, expr_mod.Var, expr_mod.Neg,
                         expr_mod.BinOp, expr_mod.Call)):
        return VerticalField.from_expression(spec)
    arr = np.asarray(spec, dtype=object)
    if arr.ndim != 2:
        raise ValidationError("per-cell s must be a 2-D matrix")
    try:
        return VerticalField.constant_matrix(arr.astype(float))
    except (TypeError, ValueError):
        return VerticalField.per_cell(arr.tolist())


def validate_vertical_field(field: VerticalField, grid: DataGrid,
                            resolution: int = DEFAULT_FIELD_RESOLUTION,
                            allow_negative: bool = False) -> VerticalValidation:
    """Sample s on every cell and certify 0 < |s| < 1.

    Default mode insists on 0 < s < 1; allow_negative relaxes to
    0 < |s| < 1 (a continuous nowhere-zero field keeps one sign, which is
    recorded). Certification adds a Lipschitz slack of L * (cell diagonal
    / resolution) on both ends; without it the verdict is sampled-only.
    """
    n, m = grid.n, grid.m
    dims = field.dims()
    if dims is not None and dims != (n, m):
        raise ValidationError(
            f"vertical field is {dims[0]}x{dims[1]} but the grid has "
            f"{n}x{m} cells")
    xv, yv = grid.xs.values, grid.ys.values
    signs = set()
    certified = True
    meta_rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, m + 1):
            rect = (xv[i - 1], xv[i], yv[j - 1], yv[j])
            if field.kind == "constant":
                v = float(field.const[i - 1, j - 1])
                _check_sample_range(v, v, (i, j), rect, allow_negative)
                signs.add(1 if v > 0 else -1)
                row.append(FieldMeta(0.0, resolution, abs(v), abs(v)))
                continue
            xs, ys = expr_mod.sample_lattice(rect, resolution)
            values = np.asarray(
                field.eval_in_cell(i, j, xs[:, None], ys[None, :]), dtype=float)
            values = np.broadcast_to(values, (len(xs), len(ys)))
            lo, hi = float(values.min()), float(values.max())
            if lo <= 0 <= hi:
                k = np.unravel_index(np.abs(values).argmin(), values.shape)
                raise ValidationError(
                    f"s changes sign or vanishes on cell ({i}, {j}) near "
                    f"({xs[k[0]]}, {ys[k[1]]})")
            _check_sample_range(lo, hi, (i, j), rect, allow_negative,
                                values=values, xs=xs, ys=ys)
            signs.add(1 if lo > 0 else -1)
            dx = (rect[1] - rect[0]) / resolution
            dy = (rect[3] - rect[2]) / resolution
            lip = max(float(np.abs(np.diff(values, axis=0)).max() / dx),
                      float(np.abs(np.diff(values, axis=1)).max() / dy))
            meta = FieldMeta(lip, resolution, min(abs(lo), abs(hi)),
                             max(abs(lo), abs(hi)))
            delta = math.hypot(rect[1] - rect[0], rect[3] - rect[2]) / resolution
            if not (meta.max_abs + lip * delta < 1.0
                    and meta.min_abs - lip * delta > 0.0):
                certified = False
            row.append(meta)
        meta_rows.append(tuple(row))
    if len(signs) > 1:
        if field.kind != "per-cell":
            raise ValidationError(
                "s changes sign between cells; a continuous nowhere-zero "
                "field keeps one sign")
        sign = 0  # per-cell fields may legitimately mix signs
    else:
        sign = signs.pop()
    validation = VerticalValidation(tuple(meta_rows), sign, certified,
                                    resolution, allow_negative)
    field.validation = validation
    return validation


def _check_sample_range(lo, hi, cell, rect, allow_negative, values=None,
                        xs=None, ys=None):
    def locate(pred):
        if values is None:
            return f"({rect[0]}, {rect[2]})"
        k = np.unravel_index(pred(values), values.shape)
        return f"({xs[k[0]]}, {ys[k[1]]})"

    if not allow_negative and lo <= 0:
        raise ValidationError(
            f"s must satisfy 0 < s < 1 but sampled {lo} on cell {cell} near "
            f"{locate(np.argmin)}; pass allow_negative_s for 0 < |s| < 1")
    if max(abs(lo), abs(hi)) >= 1.0:
        worst = lo if abs(lo) >= abs(hi) else hi
        raise ValidationError(
            f"|s| must stay below 1 but sampled {worst} on cell {cell} near "
            f"{locate(np.argmax if worst == hi else np.argmin)}")
    if allow_negative and lo <= 0 <= hi:
        raise ValidationError(f"s changes sign or vanishes on cell {cell}")


# ---------------------------------------------------------------------------
# The assembled system


@dataclass(frozen=True)
class SurfaceSystem:
    """Immutable bundle of the grid, domain maps, and fields."""

    grid: DataGrid
    x_maps: AxisMaps
    y_maps: AxisMaps
    s: VerticalField
    g: Callable
    h: Callable
    resolution: int
    allow_negative_s: bool

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def m(self) -> int:
        return self.grid.m

    def contraction(self, i: int, j: int) -> float:
        return max(self.x_maps.contraction(i), self.y_maps.contraction(j))

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return cell_index(self.grid.xs, x), cell_index(self.grid.ys, y)

    def s_meta(self) -> VerticalValidation:
        if self.s.validation is None:
            validate_vertical_field(self.s, self.grid, self.resolution,
                                    self.allow_negative_s)
        return self.s.validation


def _match_or_raise(fn, pts, expected, what, scale):
    tol = FIELD_MATCH_RTOL * (scale + 1.0)
    for (x, y), want in zip(pts, expected):
        got = float(fn(x, y))
        if abs(got - want) > tol:
            raise ValidationError(
                f"{what} must match the data at ({x}, {y}): "
                f"expected {want}, field gives {got}")


def build_system(grid: DataGrid, s, g=None, h=None, *,
                 resolution: int = DEFAULT_FIELD_RESOLUTION,
                 allow_negative_s: bool = False) -> SurfaceSystem:
    """Validate and assemble the full IFS for a data grid.

    s may be a float, expression text, AST, per-cell matrix, or a
    VerticalField. g and h default to the bilinear interpolants of the
    corner/knot data; expression overrides must still match those values.
    """
    if grid.n < 2 or grid.m < 2:
        raise ValidationError(
            "need at least two intervals per axis; a single-interval axis "
            "map is not a contraction")
    s_field = vertical_field_from_spec(s, grid.n, grid.m)
    validate_vertical_field(s_field, grid, resolution, allow_negative_s)

    if g is None:
        g_field = default_g(grid)
    else:
        g_field = g if not isinstance(g, (str, expr_mod.Num, expr_mod.Var,
                                          expr_mod.Neg, expr_mod.BinOp,
                                          expr_mod.Call)) else \
            ExprField(expr_mod.parse(g) if isinstance(g, str) else g,
                      g if isinstance(g, str) else None)
        xv, yv, z = grid.xs.values, grid.ys.values, grid.z
        corners = [(xv[0], yv[0]), (xv[-1], yv[0]), (xv[0], yv[-1]), (xv[-1], yv[-1])]
        wanted = [z[0, 0], z[-1, 0], z[0, -1], z[-1, -1]]
        _match_or_raise(g_field, corners, wanted, "g", grid.z_scale)

    if h is None:
        h_field = default_h(grid)
    else:
        h_field = h if not isinstance(h, (str, expr_mod.Num, expr_mod.Var,
                                          expr_mod.Neg, expr_mod.BinOp,
                                          expr_mod.Call)) else \
            ExprField(expr_mod.parse(h) if isinstance(h, str) else h,
                      h if isinstance(h, str) else None)
        xv, yv, z = grid.xs.values, grid.ys.values, grid.z
        pts = [(xv[i], yv[j]) for i in range(len(xv)) for j in range(len(yv))]
        wanted = [z[i, j] for i in range(len(xv)) for j in range(len(yv))]
        _match_or_raise(h_field, pts, wanted, "h", grid.z_scale)

    return SurfaceSystem(grid, build_axis_maps(grid.xs), build_axis_maps(grid.ys),
                         s_field, g_field, h_field, resolution, allow_negative_s)


# ---------------------------------------------------------------------------
# Operations


def apply_w(system: SurfaceSystem, i: int, j: int, p) -> tuple:
    """Apply W_ij to a point p = (x, y, z); returns ((x', y'), z')."""
    if not (1 <= i <= system.n and 1 <= j <= system.m):
        raise ValidationError(f"cell ({i}, {j}) out of range for "
                              f"{system.n}x{system.m} cells")
    x, y, z = p
    xi = system.x_maps.apply(i, x)
    yj = system.y_maps.apply(j, y)
    s_val = system.s.eval_in_cell(i, j, xi, yj)
    z_new = s_val * (z - system.g(x, y)) + system.h.eval_in_cell(i, j, xi, yj)
    return (float(xi), float(yj)), float(z_new)


def q_field(system: SurfaceSystem, x: float, y: float) -> float:
    """Additive part of the fixed-point relation at (x, y)."""
    i, j = system.cell_of(x, y)
    u = system.x_maps.invert(i, x)
    v = system.y_maps.invert(j, y)
    s_val = system.s.eval_in_cell(i, j, x, y)
    return float(-s_val * system.g(u, v) + system.h.eval_in_cell(i, j, x, y))


def transform_block(system: SurfaceSystem, i: int, j: int, shifted,
                    src_x, src_y, img_x=None, img_y=None):
    """Push graph samples over the whole domain through W_ij.

    shifted[p, q] must hold f(u_p, v_q) - g(u_p, v_q) on ascending source
    coordinates. Returns (img_x, img_y, block) with img_x, img_y ascending
    and block the transformed values over the image lattice in cell (i, j).
    Callers that know the exact image coordinates (the lattice recursion)
    may pass them; otherwise they are derived from the maps.
    """
    blk = shifted
    flip_x = system.x_maps.orientation(i) < 0
    flip_y = system.y_maps.orientation(j) < 0
    if flip_x:
        blk = blk[::-1, :]
    if flip_y:
        blk = blk[:, ::-1]
    if img_x is None:
        img_x = system.x_maps.apply(i, src_x)
        if flip_x:
            img_x = img_x[::-1]
    if img_y is None:
        img_y = system.y_maps.apply(j, src_y)
        if flip_y:
            img_y = img_y[::-1]
    s_img = system.s.eval_in_cell(i, j, img_x[:, None], img_y[None, :])
    h_img = system.h.eval_in_cell(i, j, img_x[:, None], img_y[None, :])
    return img_x, img_y, s_img * blk + h_img


def check_border_consistency(system: SurfaceSystem,
                             samples_per_edge: int = 33) -> float:
    """Max z-disagreement of adjacent maps over their shared borders.

    Both cells' maps are applied to graph points of probe functions over
    the border pre-images; a sound construction gives 0 up to rounding,
    a broken shared-endpoint condition shows up as a positive mismatch.
    """
    if samples_per_edge < 2:
        raise ValidationError("samples_per_edge must be >= 2")
    grid = system.grid
    xv, yv = grid.xs.values, grid.ys.values
    amp = grid.z_scale + 1.0
    spanx, spany = grid.xs.span, grid.ys.span

    def bump(x, y):
        return (system.h(x, y)
                + amp * 16.0 * (x - xv[0]) * (xv[-1] - x) * (y - yv[0])
                * (yv[-1] - y) / (spanx * spanx * spany * spany)
                + amp * 0.5 * (x - xv[0]) / spanx)

    probes = (system.h, bump)
    t = np.arange(samples_per_edge) / (samples_per_edge - 1)
    u_line = xv[0] * (1 - t) + xv[-1] * t
    v_line = yv[0] * (1 - t) + yv[-1] * t

    def f_values(cell_i, cell_j, u, v, probe):
        ix = system.x_maps.apply(cell_i, u)
        iy = system.y_maps.apply(cell_j, v)
        s_val = system.s.eval_in_cell(cell_i, cell_j, ix, iy)
        return (s_val * (probe(u, v) - system.g(u, v))
                + system.h.eval_in_cell(cell_i, cell_j, ix, iy))

    worst = 0.0
    for probe in probes:
        for i in range(1, system.n):  # border x = xv[i] between cells i, i+1
            border = xv[i]
            u_left = system.x_maps.invert(i, border)
            u_right = system.x_maps.invert(i + 1, border)
            for j in range(1, system.m + 1):
                z_left = f_values(i, j, u_left, v_line, probe)
                z_right = f_values(i + 1, j, u_right, v_line, probe)
                worst = max(worst, float(np.abs(z_left - z_right).max()))
        for j in range(1, system.m):  # border y = yv[j]
            border = yv[j]
            v_low = system.y_maps.invert(j, border)
            v_high = system.y_maps.invert(j + 1, border)
            for i in range(1, system.n + 1):
                z_low = f_values(i, j, u_line, v_low, probe)
                z_high = f_values(i, j + 1, u_line, v_high, probe)
                worst = max(worst, float(np.abs(z_low - z_high).max()))
    return worst


@dataclass(frozen=True)
class LemmaGap:
    """Sampled range of one transformed cell against its contraction bound."""

    lhs: float
    rhs: float
    s_bar: float
    c_s: float
    l_q: float
    r_f: float
    f_bar: float
    diameter: float

    def holds(self) -> bool:
        return self.lhs <= self.rhs


def lemma_gap(system: SurfaceSystem, cell: tuple[int, int], lattice,
              resolution: int | None = None) -> LemmaGap:
    """Range-contraction inequality for one cell.

    lhs samples the range of the transformed graph over the cell using
    the lattice values of f; rhs is s_bar * range(f) + diam(E) * (c_s *
    max|f| + L_Q) with every constant taken from finite sampling, so the
    inequality is checked with estimates on both sides.
    """
    i, j = cell
    if not (1 <= i <= system.n and 1 <= j <= system.m):
        raise ValidationError(f"cell {cell} out of range")
    res = resolution or system.resolution
    grid = system.grid
    src_x, src_y = lattice.xs(), lattice.ys()
    shifted = lattice.values - system.g(src_x[:, None], src_y[None, :])
    _, _, block = transform_block(system, i, j, shifted, src_x, src_y)
    lhs = float(block.max() - block.min())

    meta = system.s_meta()
    s_bar = meta.max_abs()
    c_s = meta.lipschitz()
    r_f = float(lattice.values.max() - lattice.values.min())
    f_bar = float(np.abs(lattice.values).max())
    diam = math.hypot(grid.xs.span, grid.ys.span)

    def lemma_q(u, v):
        ix = system.x_maps.apply(i, u)
        iy = system.y_maps.apply(j, v)
        s_val = system.s.eval_in_cell(i, j, ix, iy)
        return -s_val * system.g(u, v) + system.h.eval_in_cell(i, j, ix, iy)

    rect = (grid.xs[0], grid.xs[-1], grid.ys[0], grid.ys[-1])
    l_q = field_meta_of(lemma_q, rect, res).lipschitz_estimate
    rhs = s_bar * r_f + diam * (c_s * f_bar + l_q)
    return LemmaGap(lhs, rhs, s_bar, c_s, l_q, r_f, f_bar, diam)
