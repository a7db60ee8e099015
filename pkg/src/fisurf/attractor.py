"""Rendering the invariant surface.

The primary evaluator walks the fixed-point relation forward over nested
lattices: on a uniform square grid the affine domain maps send the level-t
lattice exactly onto the level-(t+1) lattice, so each refinement step is
interpolation-free. Points written by two adjacent cells (shared borders)
are asserted to agree, which turns the construction's border-consistency
property into a runtime check.

Pointwise evaluation expands a cell address downward instead and works on
any grid, as does the chaos game.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BorderMismatchError, LatticeBudgetError, ValidationError
from .expr import field_meta_of
from .grid import is_uniform
from .ifs import SurfaceSystem, transform_block

#: Default cap on lattice memory (bytes), with headroom for temporaries.
DEFAULT_LATTICE_BUDGET = 4 << 30

#: Overlapping writes from adjacent cells must agree to this, scaled by
#: (1 + max|z|).
BORDER_AGREEMENT_TOL = 1e-10


@dataclass(frozen=True)
class LatticeValues:
    """Exact samples of the surface on the depth-k refinement lattice.

    side = n * n**depth + 1 per axis; depth 0 is the knot lattice itself.
    """

    depth: int
    side: int
    values: np.ndarray
    base_n: int
    rect: tuple  # (x0, x1, y0, y1)

    def _axis(self, lo: float, hi: float) -> np.ndarray:
        t = np.arange(self.side) / (self.side - 1)
        return lo * (1 - t) + hi * t

    def xs(self) -> np.ndarray:
        return self._axis(self.rect[0], self.rect[1])

    def ys(self) -> np.ndarray:
        return self._axis(self.rect[2], self.rect[3])

    def nearest_indices(self, x, y):
        x0, x1, y0, y1 = self.rect
        ix = np.rint((np.asarray(x) - x0) / (x1 - x0) * (self.side - 1))
        iy = np.rint((np.asarray(y) - y0) / (y1 - y0) * (self.side - 1))
        ix = np.clip(ix, 0, self.side - 1).astype(int)
        iy = np.clip(iy, 0, self.side - 1).astype(int)
        return ix, iy

    def nearest_values(self, x, y):
        """Surface height at the lattice sample nearest to (x, y)."""
        ix, iy = self.nearest_indices(x, y)
        return self.values[ix, iy]

    def knot_stride(self) -> int:
        return (self.side - 1) // self.base_n


def evaluate_lattice(system: SurfaceSystem, depth: int,
                     max_bytes: int = DEFAULT_LATTICE_BUDGET) -> LatticeValues:
    """Exact surface values on the depth-k lattice of a uniform square grid.

    Level 0 is the knot data; each level pushes every sample through every
    cell map. Border overlaps are checked, then the last write wins.
    """
    if depth < 0:
        raise ValidationError("depth must be >= 0")
    check = is_uniform(system.grid)
    if not check.uniform:
        raise ValidationError(
            "lattice evaluation needs a uniform square grid "
            f"(n == m, equal spacing); deviation {check.max_rel_deviation:.3g}")
    grid = system.grid
    n = grid.n
    side = n ** (depth + 1) + 1
    need = 8 * side * side * 3 // 2
    if need > max_bytes:
        raise LatticeBudgetError(
            f"depth {depth} needs about {need / 2**30:.2f} GiB "
            f"(side {side}); budget is {max_bytes / 2**30:.2f} GiB")

    x0, x1 = grid.xs[0], grid.xs[-1]
    y0, y1 = grid.ys[0], grid.ys[-1]

    def axis(points: int) -> np.ndarray:
        t = np.arange(points) / (points - 1)
        return x0 * (1 - t) + x1 * t

    def axis_y(points: int) -> np.ndarray:
        t = np.arange(points) / (points - 1)
        return y0 * (1 - t) + y1 * t

    tol = BORDER_AGREEMENT_TOL * (1.0 + grid.z_scale)
    values = grid.z.copy()
    intervals = n
    for _ in range(depth):
        src_x, src_y = axis(intervals + 1), axis_y(intervals + 1)
        nxt = n * intervals
        new = np.full((nxt + 1, nxt + 1), np.nan)
        new_x, new_y = axis(nxt + 1), axis_y(nxt + 1)
        shifted = values - system.g(src_x[:, None], src_y[None, :])
        for i in range(1, n + 1):
            sl_x = slice((i - 1) * intervals, i * intervals + 1)
            for j in range(1, n + 1):
                sl_y = slice((j - 1) * intervals, j * intervals + 1)
                _, _, block = transform_block(
                    system, i, j, shifted, src_x, src_y,
                    img_x=new_x[sl_x], img_y=new_y[sl_y])
                region = new[sl_x, sl_y]
                written = ~np.isnan(region)
                if written.any():
                    gap = float(np.abs(region[written] - block[written]).max())
                    if gap > tol:
                        raise BorderMismatchError(
                            f"cells disagree on a shared border by {gap:.3g} "
                            f"(cell ({i}, {j}), lattice intervals {nxt}); the "
                            "vertical field is not border-compatible")
                new[sl_x, sl_y] = block
        values = new
        intervals = nxt
    return LatticeValues(depth, side, values, n, (x0, x1, y0, y1))


def fixed_point_residual(system: SurfaceSystem, lattice: LatticeValues,
                         interior_only: bool = False) -> float:
    """Worst self-consistency defect of the rendered lattice.

    Re-derives every sample from its cell's pre-image sample and the
    additive field (resolving border points by the half-open cell rule)
    and returns the largest absolute difference.
    """
    n = lattice.base_n
    total = lattice.side - 1
    per_cell = total // n
    cx, cy = lattice.xs(), lattice.ys()
    lo_i, hi_i = (1, total) if interior_only else (0, total)

    def cell_ranges(axis_maps):
        out = []
        for c in range(1, n + 1):
            lo = max((c - 1) * per_cell, lo_i)
            hi = min(c * per_cell - 1, hi_i) if c < n else min(c * per_cell, hi_i)
            if lo > hi:
                continue
            idx = np.arange(lo, hi + 1)
            offset = idx - (c - 1) * per_cell
            if axis_maps.orientation(c) > 0:
                src = offset * n
            else:
                src = (per_cell - offset) * n
            out.append((c, idx, src))
        return out

    worst = 0.0
    for (i, idx_x, src_x) in cell_ranges(system.x_maps):
        for (j, idx_y, src_y) in cell_ranges(system.y_maps):
            f_here = lattice.values[np.ix_(idx_x, idx_y)]
            f_back = lattice.values[np.ix_(src_x, src_y)]
            px = cx[idx_x][:, None]
            py = cy[idx_y][None, :]
            s_blk = system.s.eval_in_cell(i, j, px, py)
            q_blk = (-s_blk * system.g(cx[src_x][:, None], cy[src_y][None, :])
                     + system.h.eval_in_cell(i, j, px, py))
            resid = np.abs(f_here - s_blk * f_back - q_blk)
            worst = max(worst, float(resid.max()))
    return worst


def eval_point(system: SurfaceSystem, x: float, y: float,
               depth: int = 12) -> tuple[float, float]:
    """Approximate the surface at one point by cell-address expansion.

    Returns (value, error_bound); the bound contracts like max|s|**depth.
    Works on any grid, rectangular or non-uniform.
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    grid = system.grid
    xa, xb = grid.xs[0], grid.xs[-1]
    ya, yb = grid.ys[0], grid.ys[-1]
    if not (xa <= x <= xb and ya <= y <= yb):
        raise ValidationError(f"point ({x}, {y}) outside the domain")

    chain = []
    cx, cy = float(x), float(y)
    for _ in range(depth):
        i, j = system.cell_of(cx, cy)
        chain.append((i, j))
        cx = min(max(float(system.x_maps.invert(i, cx)), xa), xb)
        cy = min(max(float(system.y_maps.invert(j, cy)), ya), yb)

    val = float(system.h(cx, cy))
    for (i, j) in reversed(chain):
        nx = float(system.x_maps.apply(i, cx))
        ny = float(system.y_maps.apply(j, cy))
        s_val = system.s.eval_in_cell(i, j, nx, ny)
        val = float(s_val * (val - system.g(cx, cy))
                    + system.h.eval_in_cell(i, j, nx, ny))
        cx, cy = nx, ny

    meta = system.s_meta()
    s_bar = meta.max_abs()
    diff = field_meta_of(lambda X, Y: system.h(X, Y) - system.g(X, Y),
                         (xa, xb, ya, yb), system.resolution)
    seed_gap = s_bar * diff.max_abs / (1.0 - s_bar)
    return val, (s_bar ** depth) * seed_gap


@dataclass(frozen=True)
class PointCloud:
    """Chaos-game sample of the attractor."""

    points: np.ndarray  # (count, 3)
    seed: int
    count: int
    burn_in: int


def chaos_game(system: SurfaceSystem, count: int, seed: int = 0,
               burn_in: int = 50) -> PointCloud:
    """Random-iteration rendering of the attractor.

    The cell stream comes from numpy's PCG64 generator seeded with `seed`:
    one draw k in [0, n*m) per step, decoded as i = k // m + 1,
    j = k % m + 1. The orbit starts at the corner interpolation point
    (x_0, y_0, z_00), which already lies on the attractor, and the first
    `burn_in` images are discarded. Bit-reproducible for fixed inputs.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if burn_in < 0:
        raise ValidationError("burn_in must be >= 0")
    grid = system.grid
    n, m = grid.n, grid.m
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.integers(0, n * m, size=burn_in + count)

    x = grid.xs[0]
    y = grid.ys[0]
    z = float(grid.z[0, 0])
    xm, ym, s, g, h = system.x_maps, system.y_maps, system.s, system.g, system.h
    pts = np.empty((count, 3))
    out = 0
    for step, k in enumerate(draws):
        i = int(k) // m + 1
        j = int(k) % m + 1
        nx = float(xm.apply(i, x))
        ny = float(ym.apply(j, y))
        z = float(s.eval_in_cell(i, j, nx, ny) * (z - g(x, y))
                  + h.eval_in_cell(i, j, nx, ny))
        x, y = nx, ny
        if step >= burn_in:
            pts[out, 0] = x
            pts[out, 1] = y
            pts[out, 2] = z
            out += 1
    return PointCloud(pts, int(seed), int(count), int(burn_in))
