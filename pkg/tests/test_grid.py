import numpy as np
import pytest

from fisurf import (GridFormatError, ValidationError, height_report, is_uniform,
                    load_grid, make_grid, normalize_to_unit)

GOOD_CSV = ",0,0.5,1\n0,0,0,0\n0.5,0,1,0\n1,0,0,0\n"


def test_load_valid_grid():
    g = load_grid(GOOD_CSV)
    assert g.n == 2 and g.m == 2
    assert g.z[1, 1] == 1.0
    assert list(g.xs.values) == [0, 0.5, 1]


def test_load_body_orientation():
    # body rows follow y knots; z[i, j] pairs x_i with y_j
    csv = ",0,1\n0,10,20\n1,30,40\n"
    g = load_grid(csv)
    assert g.z[0, 0] == 10  # (x=0, y=0)
    assert g.z[1, 0] == 20  # (x=1, y=0)
    assert g.z[0, 1] == 30  # (x=0, y=1)
    assert g.z[1, 1] == 40


def test_load_rejects_non_increasing_knots():
    with pytest.raises(GridFormatError) as err:
        load_grid(",0,0.5,0.5\n0,0,0,0\n0.5,0,0,0\n1,0,0,0\n")
    assert "not strictly increasing at index 2" in str(err.value)


def test_load_rejects_dimension_mismatch():
    with pytest.raises(GridFormatError) as err:
        load_grid(",0,0.5,1\n0,0,0,0,9\n0.5,0,1,0\n1,0,0,0\n")
    assert "row 2" in str(err.value)


def test_load_rejects_non_numeric_cell():
    with pytest.raises(GridFormatError) as err:
        load_grid(",0,0.5,1\n0,0,0,0\n0.5,0,oops,0\n1,0,0,0\n")
    assert "row 3" in str(err.value) and "column 3" in str(err.value)


def test_make_grid_shape_mismatch():
    with pytest.raises(ValidationError):
        make_grid([0, 0.5, 1], [0, 0.5, 1], np.zeros((3, 4)))


# ---------------------------------------------------------------------------
# heights


def test_height_of_plane_is_zero():
    knots = np.linspace(0, 1, 4)
    z = knots[:, None] + 2.0 * knots[None, :]
    hr = height_report(make_grid(knots, knots, z))
    assert hr.height <= 1e-14
    assert hr.degenerate()


def test_height_center_bump(center_bump):
    hr = height_report(center_bump)
    assert hr.height == 1.0
    assert hr.best_axis == "column"
    assert hr.best_index == 1
    assert not hr.degenerate()


def exhaustive_heights(grid):
    """Brute-force oracle: loop every section and knot."""
    per_col, per_row = [], []
    xs, ys, z = grid.xs.values, grid.ys.values, grid.z
    for a in range(len(xs)):
        chord = lambda y: z[a, 0] + (z[a, -1] - z[a, 0]) * (y - ys[0]) / (ys[-1] - ys[0])
        per_col.append(max(abs(z[a, l] - chord(ys[l])) for l in range(len(ys))))
    for b in range(len(ys)):
        chord = lambda x: z[0, b] + (z[-1, b] - z[0, b]) * (x - xs[0]) / (xs[-1] - xs[0])
        per_row.append(max(abs(z[k, b] - chord(xs[k])) for k in range(len(xs))))
    return per_col, per_row


def test_height_matches_exhaustive_oracle():
    g = make_grid([0, 0.5, 1], [0, 0.5, 1],
                  [[0, 0, 0], [0, 0.5, 1], [0, 0, 0]])
    hr = height_report(g)
    per_col, per_row = exhaustive_heights(g)
    assert np.allclose(hr.per_column, per_col, atol=1e-15)
    assert np.allclose(hr.per_row, per_row, atol=1e-15)
    assert hr.height == max(max(per_col), max(per_row))
    assert hr.height >= 0.5


def test_height_oracle_on_random_grids():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(2, 6))
        g = make_grid(np.linspace(0, 1, n + 1), np.linspace(0, 2, m + 1),
                      rng.normal(size=(n + 1, m + 1)))
        hr = height_report(g)
        per_col, per_row = exhaustive_heights(g)
        assert np.allclose(hr.per_column, per_col, atol=1e-14)
        assert np.allclose(hr.per_row, per_row, atol=1e-14)


def test_height_invariant_under_planes():
    rng = np.random.default_rng(12)
    base = make_grid([0, 0.5, 1], [0, 0.5, 1], rng.normal(size=(3, 3)))
    hr0 = height_report(base)
    knots = base.xs.values
    for _ in range(10):
        a, b, c = rng.normal(size=3)
        z = base.z + a * knots[:, None] + b * knots[None, :] + c
        hr = height_report(make_grid(knots, knots, z))
        scale = np.abs(z).max() + 1
        assert np.allclose(hr.per_column, hr0.per_column, atol=1e-12 * scale)
        assert np.allclose(hr.per_row, hr0.per_row, atol=1e-12 * scale)


def test_height_scales_linearly():
    rng = np.random.default_rng(3)
    g = make_grid([0, 0.5, 1], [0, 0.5, 1], rng.normal(size=(3, 3)))
    hr = height_report(g)
    lam = 3.7
    hr2 = height_report(make_grid([0, 0.5, 1], [0, 0.5, 1], lam * g.z))
    assert np.allclose(hr2.per_column, lam * hr.per_column, rtol=1e-12)
    assert np.allclose(hr2.per_row, lam * hr.per_row, rtol=1e-12)


# ---------------------------------------------------------------------------
# uniformity and normalization


def test_is_uniform_cases():
    assert is_uniform(make_grid(np.linspace(0, 1, 5), np.linspace(0, 1, 5),
                                np.zeros((5, 5)))).uniform
    assert not is_uniform(make_grid([0, 0.3, 1], [0, 0.5, 1],
                                    np.zeros((3, 3)))).uniform
    # square spacing but n != m
    assert not is_uniform(make_grid([0, 0.5, 1], np.linspace(0, 1, 4),
                                    np.zeros((3, 4)))).uniform


def test_normalize_to_unit():
    g = normalize_to_unit(make_grid([2, 3, 4], [0, 0.5, 1], np.zeros((3, 3))))
    assert list(g.xs.values) == [0, 0.5, 1]
    assert g.source_window == ((2.0, 4.0), (0.0, 1.0))

    g2 = normalize_to_unit(make_grid([0, 1, 4], [0, 2, 8], np.zeros((3, 3))))
    assert list(g2.xs.values) == [0, 0.25, 1]
    assert list(g2.ys.values) == [0, 0.25, 1]


def test_normalize_is_idempotent():
    g = normalize_to_unit(make_grid([2, 3, 4], [5, 6, 7], np.arange(9.0).reshape(3, 3)))
    g2 = normalize_to_unit(g)
    assert np.array_equal(g.xs.values, g2.xs.values)
    assert np.array_equal(g.ys.values, g2.ys.values)
    assert np.array_equal(g.z, g2.z)
    assert g == g2  # source_window excluded from equality
