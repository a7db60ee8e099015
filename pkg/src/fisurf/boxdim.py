"""Dimension analysis: theoretical verdict and empirical mesh counts.

The verdict comes from per-cell extrema of |s| on an n x n uniform grid:
with a_tilde = sum of cell minima and a_bar = sum of cell maxima, the
attractor's box-counting dimension lies in
[1 + log_n a_tilde, 1 + log_n a_bar] when a_tilde > n and some grid
section is non-collinear, and equals 2 when a_bar <= n. The band
a_tilde <= n < a_bar is reported as inconclusive rather than guessed.

The empirical side counts mesh boxes of side n**-r touched by the
rendered lattice, column by column, and regresses log N against
log(1 / eps).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import parallel
from .attractor import LatticeValues
from .errors import ValidationError
from .expr import FieldMeta, sample_lattice
from .grid import DataGrid, HeightReport, is_uniform
from .ifs import VerticalField


def log_base(x: float, n: int) -> float:
    """log_n(x) as a ratio of base-2 logarithms (base choice cancels)."""
    return math.log2(x) / math.log2(n)


# ---------------------------------------------------------------------------
# Cell extrema of |s|


@dataclass(frozen=True)
class CellExtremaMatrix:
    """Sampled per-cell extrema of |s| with a certification margin.

    certified means every cell's sampled range, widened by the Lipschitz
    slack L * (cell diagonal / resolution), still stays inside (0, 1).
    """

    s_min: np.ndarray
    s_max: np.ndarray
    resolution: int
    certified: bool
    lipschitz_slack: float

    def __post_init__(self):
        if self.s_min.shape != self.s_max.shape:
            raise ValidationError("extrema matrices must share a shape")
        if not (np.all(self.s_min > 0) and np.all(self.s_min <= self.s_max)
                and np.all(self.s_max < 1)):
            raise ValidationError("need 0 < s_min <= s_max < 1 per cell")

    @property
    def a_tilde(self) -> float:
        return float(self.s_min.sum())

    @property
    def a_bar(self) -> float:
        return float(self.s_max.sum())

    def global_min(self) -> float:
        return float(self.s_min.min())

    def global_max(self) -> float:
        return float(self.s_max.max())


def cell_extrema(s: VerticalField, grid: DataGrid,
                 resolution: int = 64) -> CellExtremaMatrix:
    """Sample |s| on every cell of a uniform square grid.

    Each cell gets an (resolution+1)^2 lattice including its corners, so
    fields monotone per variable yield exact corner extrema.
    """
    if resolution < 2:
        raise ValidationError("resolution must be >= 2")
    check = is_uniform(grid)
    if not check.uniform:
        raise ValidationError("cell extrema need a uniform square grid")
    n = grid.n
    dims = s.dims()
    if dims is not None and dims != (n, n):
        raise ValidationError(f"vertical field is {dims[0]}x{dims[1]} but the "
                              f"grid has {n}x{n} cells")
    xv, yv = grid.xs.values, grid.ys.values

    def one_cell(cell):
        i, j = cell
        rect = (xv[i - 1], xv[i], yv[j - 1], yv[j])
        if s.kind == "constant":
            v = float(s.const[i - 1, j - 1])
            return abs(v), abs(v), 0.0
        xs, ys = sample_lattice(rect, resolution)
        vals = np.asarray(s.eval_in_cell(i, j, xs[:, None], ys[None, :]), float)
        vals = np.broadcast_to(vals, (len(xs), len(ys)))
        absv = np.abs(vals)
        k = absv.argmin()
        if absv.ravel()[k] <= 0:
            pos = np.unravel_index(k, absv.shape)
            raise ValidationError(
                f"|s| vanishes on cell ({i}, {j}) at ({xs[pos[0]]}, {ys[pos[1]]})")
        k = absv.argmax()
        if absv.ravel()[k] >= 1:
            pos = np.unravel_index(k, absv.shape)
            raise ValidationError(
                f"|s| reaches {absv.ravel()[k]} >= 1 on cell ({i}, {j}) at "
                f"({xs[pos[0]]}, {ys[pos[1]]})")
        dx = (rect[1] - rect[0]) / resolution
        dy = (rect[3] - rect[2]) / resolution
        lip = max(float(np.abs(np.diff(vals, axis=0)).max() / dx),
                  float(np.abs(np.diff(vals, axis=1)).max() / dy))
        return float(absv.min()), float(absv.max()), lip

    cells = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    results = parallel.ordered_map(one_cell, cells)
    s_min = np.empty((n, n))
    s_max = np.empty((n, n))
    slack = 0.0
    certified = True
    for (i, j), (lo, hi, lip) in zip(cells, results):
        s_min[i - 1, j - 1] = lo
        s_max[i - 1, j - 1] = hi
        diag = math.hypot(xv[i] - xv[i - 1], yv[j] - yv[j - 1])
        delta = lip * diag / resolution
        slack = max(slack, delta)
        if not (hi + delta < 1.0 and lo - delta > 0.0):
            certified = False
    return CellExtremaMatrix(s_min, s_max, resolution, certified, slack)


# ---------------------------------------------------------------------------
# Theoretical verdict


@dataclass(frozen=True)
class DimensionVerdict:
    """Outcome of the dimension dichotomy.

    case is one of bounds / exact_two / inconclusive / hypothesis_failed;
    bounds carries [1 + log_n a_tilde, 1 + log_n a_bar], exact_two pins
    the dimension at 2, hypothesis_failed means the sums would give
    bounds but every grid section is collinear.
    """

    case: str
    lower: float | None
    upper: float | None
    a_tilde: float
    a_bar: float
    n: int
    height: float

    def band(self) -> tuple[float, float] | None:
        if self.case == "bounds":
            return (self.lower, self.upper)
        if self.case == "exact_two":
            return (2.0, 2.0)
        return None


def theorem_verdict(extrema: CellExtremaMatrix, height: HeightReport,
                    n: int) -> DimensionVerdict:
    """Classify the system by the cell-extrema sums.

    exact_two needs no non-collinearity hypothesis; the bounds case does,
    and degenerates to hypothesis_failed on plane-like data.
    """
    if n < 2:
        raise ValidationError("the dimension dichotomy needs n >= 2")
    if extrema.s_min.shape != (n, n):
        raise ValidationError(f"extrema matrix is {extrema.s_min.shape}, "
                              f"expected ({n}, {n})")
    a_tilde, a_bar = extrema.a_tilde, extrema.a_bar
    if a_bar <= n:
        return DimensionVerdict("exact_two", 2.0, 2.0, a_tilde, a_bar, n,
                                height.height)
    if a_tilde > n:
        if height.degenerate():
            return DimensionVerdict("hypothesis_failed", None, None, a_tilde,
                                    a_bar, n, height.height)
        return DimensionVerdict("bounds",
                                1.0 + log_base(a_tilde, n),
                                1.0 + log_base(a_bar, n),
                                a_tilde, a_bar, n, height.height)
    return DimensionVerdict("inconclusive", None, None, a_tilde, a_bar, n,
                            height.height)


@dataclass(frozen=True)
class Remark1Bounds:
    """Coarser dimension bracket from the global extrema of |s| alone.

    regime 'bounds' gives [max(2, 3 + log_n s_min), 3 + log_n s_max]; the
    raw lower bound is kept alongside since 3 + log_n s_min may dip below
    the trivial dimension 2 of any surface. regime 'dim_two' signals
    s_min <= 1/n, the global-extrema criterion's dimension-2 side.
    """

    regime: str  # "bounds" | "dim_two"
    lower: float | None
    upper: float | None
    lower_raw: float | None
    s_min: float
    s_max: float
    n: int


def remark1_bounds(s_global_min: float, s_global_max: float,
                   n: int) -> Remark1Bounds:
    """Dimension bracket using only min/max of |s| over the whole domain.

    Always at least as wide as the per-cell verdict band.
    """
    if n < 2:
        raise ValidationError("need n >= 2")
    if not (0 < s_global_min <= s_global_max < 1):
        raise ValidationError("need 0 < s_min <= s_max < 1")
    if s_global_min <= 1.0 / n:
        return Remark1Bounds("dim_two", None, None, None,
                             s_global_min, s_global_max, n)
    raw = 3.0 + log_base(s_global_min, n)
    return Remark1Bounds("bounds", max(2.0, raw),
                         3.0 + log_base(s_global_max, n), raw,
                         s_global_min, s_global_max, n)


# ---------------------------------------------------------------------------
# Mesh counting


def count_boxes(lattice: LatticeValues, r: int) -> int:
    """Number of mesh cubes of side n**-r touched by the lattice samples.

    The unit square splits into (n**r)^2 half-open columns (last ones
    closed); each contributes floor(max/eps) - floor(min/eps) + 1 cubes
    from its sampled column extrema.
    """
    if r < 1:
        raise ValidationError("r must be >= 1")
    if r > lattice.depth:
        raise ValidationError(
            f"scale r={r} exceeds lattice depth {lattice.depth}")
    x0, x1, y0, y1 = lattice.rect
    if max(abs(x0), abs(y0), abs(x1 - 1), abs(y1 - 1)) > 1e-12:
        raise ValidationError(
            "box counting expects the unit domain; normalize the grid first")
    n = lattice.base_n
    cols = n ** r
    per = (lattice.side - 1) // cols
    idx = np.arange(cols) * per
    col_min = np.minimum.reduceat(
        np.minimum.reduceat(lattice.values, idx, axis=0), idx, axis=1)
    col_max = np.maximum.reduceat(
        np.maximum.reduceat(lattice.values, idx, axis=0), idx, axis=1)
    inv_eps = float(cols)
    boxes = np.floor(col_max * inv_eps) - np.floor(col_min * inv_eps) + 1.0
    return int(boxes.sum())


@dataclass(frozen=True)
class BoxCountSeries:
    """Mesh counts N(eps_r) over a ladder of scales r."""

    scales: tuple        # ((r, eps), ...)
    counts: tuple        # (N_r, ...)
    lattice_depth: int

    def __post_init__(self):
        if len(self.scales) != len(self.counts):
            raise ValidationError("one count per scale required")
        rs = [r for (r, _) in self.scales]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValidationError("scales must be strictly increasing")
        if any(r > self.lattice_depth for r in rs):
            raise ValidationError("every scale must satisfy r <= lattice depth")
        if any(c <= 0 for c in self.counts):
            raise ValidationError("counts must be positive")
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise ValidationError("counts must not decrease as eps shrinks")

    def rs(self) -> list[int]:
        return [r for (r, _) in self.scales]


def box_count_series(lattice: LatticeValues, r_lo: int,
                     r_hi: int) -> BoxCountSeries:
    """Count boxes for every scale r in [r_lo, r_hi]."""
    if r_lo < 1 or r_hi < r_lo:
        raise ValidationError("need 1 <= r_lo <= r_hi")
    rs = list(range(r_lo, r_hi + 1))
    counts = parallel.ordered_map(lambda r: count_boxes(lattice, r), rs)
    n = lattice.base_n
    scales = tuple((r, float(n) ** (-r)) for r in rs)
    return BoxCountSeries(scales, tuple(counts), lattice.depth)


def estimate_dimension(series: BoxCountSeries,
                       fit_range: tuple[int, int] | None = None
                       ) -> tuple[float, float]:
    """Least-squares slope of log N against log(1/eps), with its stderr."""
    if fit_range is None:
        pick = list(range(len(series.counts)))
    else:
        r_lo, r_hi = fit_range
        if r_hi <= r_lo or r_lo < 1:
            raise ValidationError("need r_hi > r_lo >= 1")
        pick = [k for k, (r, _) in enumerate(series.scales)
                if r_lo <= r <= r_hi]
    if len(pick) < 3:
        raise ValidationError("need at least 3 scales in the fit range")
    x = np.array([-math.log(series.scales[k][1]) for k in pick])
    y = np.array([math.log(series.counts[k]) for k in pick])
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    dof = len(pick) - 2
    sigma2 = float((resid ** 2).sum() / dof) if dof > 0 else 0.0
    return slope, math.sqrt(sigma2 / sxx)


# ---------------------------------------------------------------------------
# Containment


@dataclass(frozen=True)
class ContainmentResult:
    """Whether the empirical slope falls in the verdict's band."""

    applicable: bool
    contained: bool | None
    band: tuple[float, float] | None
    slope: float
    tolerance: float


def verify_containment(verdict: DimensionVerdict, slope: float,
                       tolerance: float) -> ContainmentResult:
    """Compare the regression slope against the verdict band +- tolerance.

    Inconclusive and hypothesis-failed verdicts yield not-applicable with
    the slope still reported.
    """
    if tolerance <= 0:
        raise ValidationError("tolerance must be positive")
    band = verdict.band()
    if band is None:
        return ContainmentResult(False, None, None, slope, tolerance)
    lo, hi = band
    contained = (lo - tolerance) <= slope <= (hi + tolerance)
    return ContainmentResult(True, contained, band, slope, tolerance)


@dataclass(frozen=True)
class DimensionReport:
    """Bundle of the theoretical verdict and the empirical estimate."""

    verdict: DimensionVerdict
    series: BoxCountSeries
    empirical_slope: float
    slope_stderr: float
    contained: bool | None
    tolerance: float
