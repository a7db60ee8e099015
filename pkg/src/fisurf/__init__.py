"""Fractal interpolation surfaces over rectangular grids.

Build an iterated function system with a variable vertical scaling field
over gridded data, render the invariant surface exactly on refinement
lattices, derive theoretical box-counting-dimension bounds from per-cell
field extrema, estimate the dimension empirically by mesh counting, and
check that the estimate falls inside the predicted band.
"""

__version__ = "1.0.0"

from .attractor import (LatticeValues, PointCloud, chaos_game, eval_point,
                        evaluate_lattice, fixed_point_residual)
from .boxdim import (BoxCountSeries, CellExtremaMatrix, ContainmentResult,
                     DimensionReport, DimensionVerdict, Remark1Bounds,
                     box_count_series, cell_extrema, count_boxes,
                     estimate_dimension, log_base, remark1_bounds,
                     theorem_verdict, verify_containment)
from .errors import (BorderMismatchError, ExprDomainError, ExprSyntaxError,
                     FisurfError, GridFormatError, LatticeBudgetError,
                     ValidationError)
from .expr import FieldMeta, evaluate, field_meta, parse, to_text
from .grid import (DataGrid, HeightReport, KnotVector, height_report,
                   is_uniform, load_grid, make_grid, normalize_to_unit)
from .ifs import (AxisMaps, SurfaceSystem, VerticalField, apply_w,
                  build_axis_maps, build_system, check_border_consistency,
                  default_g, default_h, lemma_gap, q_field)
from .report import ReportDocument, run_bounds, run_dim, run_verify
