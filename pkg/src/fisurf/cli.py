"""Command-line front end.

Subcommands:
    generate   render the surface lattice to OBJ or CSV
    eval       evaluate the surface at points
    bounds     theoretical dimension verdict only
    dim        empirical box-count estimate only
    verify     full pipeline with containment check
    chaos      chaos-game point cloud to XYZ or CSV

Exit codes: 0 success, 1 validation failure, 2 I/O failure,
3 containment failure. Grids arrive as CSV (x knots in the header row
behind one empty cell, y knots in the first column, z in the body).
Expression fields see coordinates in the grid's normalized unit square;
exports map x, y back to the original window. A per-cell vertical field
comes from --s @FILE, a CSV body of one expression per cell laid out like
the grid body (quote any expression containing a comma).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass

from . import __version__, report as report_mod
from .attractor import chaos_game, eval_point, evaluate_lattice
from .errors import FisurfError, ValidationError
from .grid import load_grid

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_CONTAINMENT = 3


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the validation code, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings of one invocation (echoed into reports)."""

    command: str
    grid_path: str
    s_spec: str
    g_spec: str | None = None
    h_spec: str | None = None
    depth: int = 6
    scales: tuple[int, int] = (2, 5)
    resolution: int = 64
    tolerance: float = 0.1
    seed: int = 0
    points: int = 10000
    burn_in: int = 50
    output: str | None = None
    format: str = "json"
    allow_negative_s: bool = False
    plot: bool = False
    at: tuple = ()

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.command in ("dim", "verify"):
            lo, hi = self.scales
            if lo < 1 or hi < lo:
                raise ValidationError("scales must satisfy 1 <= LO <= HI")
            if self.depth < hi:
                raise ValidationError(
                    f"depth {self.depth} must be >= the top scale {hi}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scales"] = list(self.scales)
        d["at"] = [list(p) for p in self.at]
        return d


def _parse_scales(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise ValidationError(f"--scales expects LO:HI, got {text!r}")


def _parse_point(text: str) -> tuple[float, float]:
    try:
        xs, ys = text.split(",")
        return float(xs), float(ys)
    except ValueError:
        raise ValidationError(f"--at expects X,Y, got {text!r}")


def _load_s_spec(spec: str):
    """An expression, a constant, or @FILE with per-cell entries."""
    if not spec.startswith("@"):
        return spec
    with open(spec[1:], "r", encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"per-cell file {spec[1:]!r} is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValidationError("per-cell file rows have unequal lengths")
    # File rows follow y cells (like the grid body); store x-major.
    cells = [[rows[j][i].strip() for j in range(len(rows))]
             for i in range(width)]
    try:
        return [[float(c) for c in row] for row in cells]
    except ValueError:
        return cells


def build_parser() -> _Parser:
    parser = _Parser(prog="fisurf",
                     description="Fractal interpolation surfaces: rendering "
                                 "and box-counting dimension analysis.")
    parser.add_argument("--version", action="version",
                        version=f"fisurf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--grid", required=True, metavar="PATH",
                        help="grid CSV file")
        sp.add_argument("--s", required=True, metavar="EXPR|@FILE",
                        help="vertical scaling field: expression, constant, "
                             "or @FILE with per-cell entries")
        sp.add_argument("--g", metavar="EXPR", default=None,
                        help="override the corner interpolant g "
                             "(unit coordinates; must match corner data)")
        sp.add_argument("--h", metavar="EXPR", default=None,
                        help="override the knot interpolant h "
                             "(unit coordinates; must match all knot data)")
        sp.add_argument("--resolution", type=int, default=64, metavar="R",
                        help="field sampling resolution per cell axis")
        sp.add_argument("--allow-negative-s", action="store_true",
                        help="accept 0 < |s| < 1 instead of 0 < s < 1")
        sp.add_argument("--out", metavar="PATH", default=None,
                        help="output file (default: stdout)")

    sp = sub.add_parser("generate", help="render the surface lattice to a mesh")
    add_common(sp)
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--format", choices=["obj", "csv"], default="obj",
                    help="obj: y-up mesh with quad faces; csv: x,y,f rows")

    sp = sub.add_parser("eval", help="evaluate the surface at points")
    add_common(sp)
    sp.add_argument("--at", action="append", required=True, metavar="X,Y",
                    help="evaluation point in original grid coordinates "
                         "(repeatable)")
    sp.add_argument("--depth", type=int, default=12,
                    help="cell-address expansion depth")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = sub.add_parser("bounds", help="theoretical dimension verdict")
    add_common(sp)

    sp = sub.add_parser("dim", help="empirical box-count estimate")
    add_common(sp)
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--scales", default=None, metavar="LO:HI",
                    help="mesh scales to count (default 2:depth-1)")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--plot", action="store_true",
                    help="render log-log and surface figures plus the "
                         "box-count CSV next to --out")

    sp = sub.add_parser("verify", help="verdict, estimate, and containment")
    add_common(sp)
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--scales", default=None, metavar="LO:HI")
    sp.add_argument("--tol", type=float, default=0.1,
                    help="containment tolerance on the slope")
    sp.add_argument("--plot", action="store_true",
                    help="render figures and the box-count CSV next to --out")

    sp = sub.add_parser("chaos", help="chaos-game point cloud")
    add_common(sp)
    sp.add_argument("--points", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--burn-in", type=int, default=50, dest="burn_in")
    sp.add_argument("--format", choices=["xyz", "csv"], default="xyz")

    return parser


def _config_from_args(args) -> RunConfig:
    scales = getattr(args, "scales", None)
    depth = getattr(args, "depth", 6)
    if scales is None:
        scales = (2, max(depth - 1, 2))
    elif isinstance(scales, str):
        scales = _parse_scales(scales)
    at = tuple(_parse_point(p) for p in (getattr(args, "at", None) or ()))
    return RunConfig(
        command=args.command,
        grid_path=args.grid,
        s_spec=args.s,
        g_spec=args.g,
        h_spec=args.h,
        depth=depth,
        scales=scales,
        resolution=args.resolution,
        tolerance=getattr(args, "tol", 0.1),
        seed=getattr(args, "seed", 0),
        points=getattr(args, "points", 10000),
        burn_in=getattr(args, "burn_in", 50),
        output=args.out,
        format=getattr(args, "format", "json"),
        allow_negative_s=args.allow_negative_s,
        plot=getattr(args, "plot", False),
        at=at,
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        report_mod.write_text_atomic(out, text)


def _system_for(cfg: RunConfig):
    grid = load_grid(cfg.grid_path)
    window = ((grid.xs[0], grid.xs[-1]), (grid.ys[0], grid.ys[-1]))
    system = report_mod.prepare_system(
        grid, _load_s_spec(cfg.s_spec), cfg.g_spec, cfg.h_spec,
        resolution=cfg.resolution, allow_negative_s=cfg.allow_negative_s)
    return grid, window, system


def _render_figures(cfg: RunConfig, outcome) -> None:
    from . import plots

    if cfg.output is None:
        raise ValidationError("--plot needs --out to derive figure paths")
    stem = cfg.output.rsplit(".", 1)[0]
    report_mod.write_text_atomic(
        f"{stem}_boxcounts.csv", report_mod.boxcount_csv_text(outcome.report))
    plots.save_loglog_figure(outcome.report.to_dict(), f"{stem}_loglog.png")
    if outcome.lattice is not None:
        snap = plots.surface_snapshot(outcome.lattice)
        plots.save_surface_figure(snap, f"{stem}_surface.png")


def cmd_generate(cfg: RunConfig) -> int:
    grid, window, system = _system_for(cfg)
    lattice = evaluate_lattice(system, cfg.depth)
    if cfg.format == "obj":
        text = report_mod.lattice_obj_text(lattice, window)
    else:
        text = report_mod.lattice_csv_text(lattice, window)
    _emit(text, cfg.output)
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    grid, window, system = _system_for(cfg)
    (wx0, wx1), (wy0, wy1) = window
    rows = []
    for (x, y) in cfg.at:
        u = (x - wx0) / (wx1 - wx0)
        v = (y - wy0) / (wy1 - wy0)
        if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
            raise ValidationError(f"point ({x}, {y}) outside the grid window")
        value, bound = eval_point(system, u, v, cfg.depth)
        rows.append({"x": x, "y": y, "value": value, "error_bound": bound})
    if cfg.format == "json":
        text = json.dumps({"schema": report_mod.SCHEMA, "points": rows,
                           "config": cfg.to_dict()},
                          indent=2, sort_keys=True) + "\n"
    else:
        text = "x,y,value,error_bound\n" + "".join(
            f"{r['x']!r},{r['y']!r},{r['value']!r},{r['error_bound']!r}\n"
            for r in rows)
    _emit(text, cfg.output)
    return EXIT_OK


def cmd_bounds(cfg: RunConfig) -> int:
    grid = load_grid(cfg.grid_path)
    doc = report_mod.run_bounds(
        grid, s=_load_s_spec(cfg.s_spec), g=cfg.g_spec, h=cfg.h_spec,
        resolution=cfg.resolution, allow_negative_s=cfg.allow_negative_s,
        config_echo=cfg.to_dict())
    _emit(doc.to_json(), cfg.output)
    return EXIT_OK


def cmd_dim(cfg: RunConfig) -> int:
    grid = load_grid(cfg.grid_path)
    outcome = report_mod.run_dim(
        grid, s=_load_s_spec(cfg.s_spec), g=cfg.g_spec, h=cfg.h_spec,
        depth=cfg.depth, r_lo=cfg.scales[0], r_hi=cfg.scales[1],
        resolution=cfg.resolution, allow_negative_s=cfg.allow_negative_s,
        config_echo=cfg.to_dict(), keep_lattice=cfg.plot)
    if cfg.format == "csv":
        _emit(report_mod.boxcount_csv_text(outcome.report), cfg.output)
    else:
        _emit(outcome.report.to_json(), cfg.output)
    if cfg.plot:
        _render_figures(cfg, outcome)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    grid = load_grid(cfg.grid_path)
    outcome = report_mod.run_verify(
        grid, s=_load_s_spec(cfg.s_spec), g=cfg.g_spec, h=cfg.h_spec,
        depth=cfg.depth, r_lo=cfg.scales[0], r_hi=cfg.scales[1],
        resolution=cfg.resolution, tolerance=cfg.tolerance,
        allow_negative_s=cfg.allow_negative_s, config_echo=cfg.to_dict(),
        keep_lattice=cfg.plot)
    _emit(outcome.report.to_json(), cfg.output)
    if cfg.plot:
        _render_figures(cfg, outcome)
    containment = outcome.report.containment
    if containment["applicable"] and containment["contained"] is False:
        print("containment FAILED: slope "
              f"{containment['slope']:.4f} outside band "
              f"{containment['band']} ± {containment['tolerance']}",
              file=sys.stderr)
        return EXIT_CONTAINMENT
    return EXIT_OK


def cmd_chaos(cfg: RunConfig) -> int:
    grid, window, system = _system_for(cfg)
    cloud = chaos_game(system, cfg.points, cfg.seed, cfg.burn_in)
    if cfg.format == "csv":
        text = report_mod.cloud_csv_text(cloud, window)
    else:
        text = report_mod.cloud_xyz_text(cloud, window)
    _emit(text, cfg.output)
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "eval": cmd_eval,
    "bounds": cmd_bounds,
    "dim": cmd_dim,
    "verify": cmd_verify,
    "chaos": cmd_chaos,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](cfg)
    except FisurfError as exc:
        print(f"fisurf: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"fisurf: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
