"""Pipelines and report documents.

Every pipeline normalizes the grid domain onto the unit square first:
expression fields are always evaluated in unit coordinates, and mesh or
point-cloud exports map x, y back to the original window. Reports are
JSON documents under the versioned schema "fisurf/1"; they echo the full
effective configuration, so a run is reproducible from its report alone.
Everything but the timings block is deterministic for a fixed
configuration and seed.
"""
from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .attractor import (LatticeValues, PointCloud, chaos_game,
                        evaluate_lattice, eval_point)
from .boxdim import (BoxCountSeries, CellExtremaMatrix, ContainmentResult,
                     DimensionReport, DimensionVerdict, Remark1Bounds,
                     box_count_series, cell_extrema, estimate_dimension,
                     remark1_bounds, theorem_verdict, verify_containment)
from .errors import ValidationError
from .grid import DataGrid, HeightReport, height_report, is_uniform, normalize_to_unit
from .ifs import SurfaceSystem, build_system

SCHEMA = "fisurf/1"


def _plain(value):
    """Recursively convert numpy scalars/arrays into JSON-able types."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass(frozen=True)
class ReportDocument:
    """Structured, versioned run report; round-trips through JSON."""

    schema: str
    tool: dict
    config: dict
    grid: dict
    height: dict | None = None
    extrema: dict | None = None
    verdict: dict | None = None
    remark1: dict | None = None
    box_counts: dict | None = None
    fit: dict | None = None
    containment: dict | None = None
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ValidationError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Dict builders for the typed pieces


def grid_summary(original: DataGrid, working: DataGrid) -> dict:
    check = is_uniform(working)
    window = working.source_window or ((working.xs[0], working.xs[-1]),
                                       (working.ys[0], working.ys[-1]))
    return _plain({
        "n": working.n,
        "m": working.m,
        "uniform": bool(check.uniform),
        "max_rel_spacing_deviation": check.max_rel_deviation,
        "source_window": window,
        "z_min": float(original.z.min()),
        "z_max": float(original.z.max()),
    })


def height_dict(hr: HeightReport) -> dict:
    return _plain({
        "best_axis": hr.best_axis,
        "best_index": hr.best_index,
        "height": hr.height,
        "per_column": hr.per_column,
        "per_row": hr.per_row,
        "degenerate": bool(hr.degenerate()),
    })


def extrema_dict(ext: CellExtremaMatrix) -> dict:
    return _plain({
        "resolution": ext.resolution,
        "certified": bool(ext.certified),
        "lipschitz_slack": ext.lipschitz_slack,
        "a_tilde": ext.a_tilde,
        "a_bar": ext.a_bar,
        "s_min": ext.s_min,
        "s_max": ext.s_max,
    })


def verdict_dict(v: DimensionVerdict) -> dict:
    return _plain({
        "case": v.case,
        "lower": v.lower,
        "upper": v.upper,
        "a_tilde": v.a_tilde,
        "a_bar": v.a_bar,
        "n": v.n,
        "height": v.height,
    })


def remark1_dict(r: Remark1Bounds) -> dict:
    return _plain({
        "regime": r.regime,
        "lower": r.lower,
        "upper": r.upper,
        "lower_raw": r.lower_raw,
        "s_min": r.s_min,
        "s_max": r.s_max,
        "n": r.n,
    })


def series_dict(series: BoxCountSeries) -> dict:
    return _plain({
        "lattice_depth": series.lattice_depth,
        "scales": [{"r": r, "epsilon": eps, "count": c}
                   for (r, eps), c in zip(series.scales, series.counts)],
    })


def containment_dict(c: ContainmentResult) -> dict:
    return _plain({
        "applicable": c.applicable,
        "contained": c.contained,
        "band": c.band,
        "slope": c.slope,
        "tolerance": c.tolerance,
    })


# ---------------------------------------------------------------------------
# Pipelines


def prepare_system(grid: DataGrid, s, g=None, h=None, *, resolution: int = 64,
                   allow_negative_s: bool = False) -> SurfaceSystem:
    """Normalize the domain and assemble the validated system."""
    return build_system(normalize_to_unit(grid), s, g, h,
                        resolution=resolution,
                        allow_negative_s=allow_negative_s)


@dataclass(frozen=True)
class TheoreticalParts:
    height: HeightReport
    extrema: CellExtremaMatrix
    verdict: DimensionVerdict
    remark1: Remark1Bounds


def theoretical_parts(system: SurfaceSystem,
                      resolution: int = 64) -> TheoreticalParts:
    hr = height_report(system.grid)
    ext = cell_extrema(system.s, system.grid, resolution)
    verdict = theorem_verdict(ext, hr, system.n)
    r1 = remark1_bounds(ext.global_min(), ext.global_max(), system.n)
    return TheoreticalParts(hr, ext, verdict, r1)


@dataclass(frozen=True)
class EmpiricalParts:
    lattice: LatticeValues
    series: BoxCountSeries
    slope: float
    stderr: float


def empirical_parts(system: SurfaceSystem, depth: int, r_lo: int, r_hi: int,
                    max_bytes: int | None = None) -> EmpiricalParts:
    """Lattice rendering, mesh counting, and the log-log regression.

    Requires depth >= r_hi + 1 so that every column at the finest counted
    scale holds at least (n^2 + 1)^2 lattice samples.
    """
    if depth < r_hi + 1:
        raise ValidationError(
            f"depth {depth} too shallow for scales up to {r_hi}; "
            f"need depth >= {r_hi + 1}")
    kwargs = {} if max_bytes is None else {"max_bytes": max_bytes}
    lattice = evaluate_lattice(system, depth, **kwargs)
    series = box_count_series(lattice, r_lo, r_hi)
    slope, stderr = estimate_dimension(series)
    return EmpiricalParts(lattice, series, slope, stderr)


@dataclass(frozen=True)
class VerifyOutcome:
    report: ReportDocument
    dimension: DimensionReport | None
    lattice: LatticeValues | None


def run_verify(grid: DataGrid, *, s, g=None, h=None, depth: int = 6,
               r_lo: int = 2, r_hi: int = 5, resolution: int = 64,
               tolerance: float = 0.1, allow_negative_s: bool = False,
               config_echo: dict | None = None, keep_lattice: bool = False,
               max_bytes: int | None = None) -> VerifyOutcome:
    """Full pipeline: verdict, mesh counts, slope, containment."""
    t0 = time.perf_counter()
    system = prepare_system(grid, s, g, h, resolution=resolution,
                            allow_negative_s=allow_negative_s)
    theo = theoretical_parts(system, resolution)
    t1 = time.perf_counter()
    emp = empirical_parts(system, depth, r_lo, r_hi, max_bytes)
    t2 = time.perf_counter()
    containment = verify_containment(theo.verdict, emp.slope, tolerance)
    dimension = DimensionReport(theo.verdict, emp.series, emp.slope,
                                emp.stderr, containment.contained, tolerance)
    report = ReportDocument(
        schema=SCHEMA,
        tool={"name": "fisurf", "version": __version__},
        config=_plain(config_echo or {}),
        grid=grid_summary(grid, system.grid),
        height=height_dict(theo.height),
        extrema=extrema_dict(theo.extrema),
        verdict=verdict_dict(theo.verdict),
        remark1=remark1_dict(theo.remark1),
        box_counts=series_dict(emp.series),
        fit=_plain({"r_lo": r_lo, "r_hi": r_hi, "slope": emp.slope,
                    "stderr": emp.stderr}),
        containment=containment_dict(containment),
        timings={"theory_s": t1 - t0, "empirical_s": t2 - t1,
                 "total_s": time.perf_counter() - t0},
    )
    return VerifyOutcome(report, dimension,
                         emp.lattice if keep_lattice else None)


def run_bounds(grid: DataGrid, *, s, g=None, h=None, resolution: int = 64,
               allow_negative_s: bool = False,
               config_echo: dict | None = None) -> ReportDocument:
    """Theory-only subset: heights, extrema, verdict, global-extrema bracket."""
    t0 = time.perf_counter()
    system = prepare_system(grid, s, g, h, resolution=resolution,
                            allow_negative_s=allow_negative_s)
    theo = theoretical_parts(system, resolution)
    return ReportDocument(
        schema=SCHEMA,
        tool={"name": "fisurf", "version": __version__},
        config=_plain(config_echo or {}),
        grid=grid_summary(grid, system.grid),
        height=height_dict(theo.height),
        extrema=extrema_dict(theo.extrema),
        verdict=verdict_dict(theo.verdict),
        remark1=remark1_dict(theo.remark1),
        timings={"total_s": time.perf_counter() - t0},
    )


def run_dim(grid: DataGrid, *, s, g=None, h=None, depth: int = 6,
            r_lo: int = 2, r_hi: int = 5, resolution: int = 64,
            allow_negative_s: bool = False, config_echo: dict | None = None,
            keep_lattice: bool = False,
            max_bytes: int | None = None) -> VerifyOutcome:
    """Empirical subset: lattice, counts, slope (no verdict, no containment)."""
    t0 = time.perf_counter()
    system = prepare_system(grid, s, g, h, resolution=resolution,
                            allow_negative_s=allow_negative_s)
    emp = empirical_parts(system, depth, r_lo, r_hi, max_bytes)
    report = ReportDocument(
        schema=SCHEMA,
        tool={"name": "fisurf", "version": __version__},
        config=_plain(config_echo or {}),
        grid=grid_summary(grid, system.grid),
        box_counts=series_dict(emp.series),
        fit=_plain({"r_lo": r_lo, "r_hi": r_hi, "slope": emp.slope,
                    "stderr": emp.stderr}),
        timings={"total_s": time.perf_counter() - t0},
    )
    return VerifyOutcome(report, None, emp.lattice if keep_lattice else None)


# ---------------------------------------------------------------------------
# File output


def write_text_atomic(path: str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see halves."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fisurf-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _window_rescale(lattice: LatticeValues, window):
    (wx0, wx1), (wy0, wy1) = window
    xs = lattice.xs()
    ys = lattice.ys()
    ux = (xs - lattice.rect[0]) / (lattice.rect[1] - lattice.rect[0])
    uy = (ys - lattice.rect[2]) / (lattice.rect[3] - lattice.rect[2])
    return wx0 * (1 - ux) + wx1 * ux, wy0 * (1 - uy) + wy1 * uy


def lattice_obj_text(lattice: LatticeValues, window=None) -> str:
    """Wavefront OBJ with quad faces over the lattice; height on the up axis."""
    if window is None:
        window = ((lattice.rect[0], lattice.rect[1]),
                  (lattice.rect[2], lattice.rect[3]))
    xs, ys = _window_rescale(lattice, window)
    xs, ys = xs.tolist(), ys.tolist()
    side = lattice.side
    chunks = ["# fisurf surface mesh (y-up)\n"]
    v = lattice.values
    for p in range(side):
        xp = xs[p]
        row = v[p].tolist()
        chunks.append("".join(
            f"v {xp!r} {row[q]!r} {ys[q]!r}\n" for q in range(side)))
    face_rows = []
    for p in range(side - 1):
        base = p * side
        face_rows.append("".join(
            f"f {base + q + 1} {base + q + 2} {base + side + q + 2} "
            f"{base + side + q + 1}\n"
            for q in range(side - 1)))
    chunks.extend(face_rows)
    return "".join(chunks)


def lattice_csv_text(lattice: LatticeValues, window=None) -> str:
    """Delimited x,y,f rows over the lattice."""
    if window is None:
        window = ((lattice.rect[0], lattice.rect[1]),
                  (lattice.rect[2], lattice.rect[3]))
    xs, ys = _window_rescale(lattice, window)
    xs, ys = xs.tolist(), ys.tolist()
    out = ["x,y,f\n"]
    v = lattice.values
    for p in range(lattice.side):
        xp = xs[p]
        row = v[p].tolist()
        out.append("".join(
            f"{xp!r},{ys[q]!r},{row[q]!r}\n" for q in range(lattice.side)))
    return "".join(out)


def cloud_xyz_text(cloud: PointCloud, window=None) -> str:
    """Whitespace-separated x y z lines."""
    pts = _cloud_points(cloud, window)
    return "".join(f"{x!r} {y!r} {z!r}\n" for x, y, z in pts)


def cloud_csv_text(cloud: PointCloud, window=None) -> str:
    pts = _cloud_points(cloud, window)
    return "x,y,z\n" + "".join(f"{x!r},{y!r},{z!r}\n" for x, y, z in pts)


def _cloud_points(cloud: PointCloud, window):
    pts = cloud.points
    if window is None:
        return [(float(a), float(b), float(c)) for a, b, c in pts]
    (wx0, wx1), (wy0, wy1) = window
    out = []
    for a, b, c in pts:
        out.append((wx0 + (wx1 - wx0) * float(a), wy0 + (wy1 - wy0) * float(b),
                    float(c)))
    return out


def boxcount_csv_text(report: ReportDocument) -> str:
    """The box-count table as delimited text."""
    if not report.box_counts:
        raise ValidationError("report has no box-count table")
    lines = ["r,epsilon,count\n"]
    for row in report.box_counts["scales"]:
        lines.append(f"{row['r']},{row['epsilon']!r},{row['count']}\n")
    return "".join(lines)
