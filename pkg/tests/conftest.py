import numpy as np
import pytest

from fisurf import build_system, make_grid


@pytest.fixture
def center_bump():
    """3x3 unit grid, zero everywhere except the middle knot."""
    return make_grid([0, 0.5, 1], [0, 0.5, 1],
                     [[0, 0, 0], [0, 1, 0], [0, 0, 0]])


@pytest.fixture
def bump_system(center_bump):
    return build_system(center_bump, 0.5)


def plane_grid(n=2, a=1.0, b=2.0, c=0.0):
    """Uniform grid sampling the plane z = a*x + b*y + c."""
    knots = np.linspace(0.0, 1.0, n + 1)
    z = a * knots[:, None] + b * knots[None, :] + c
    return make_grid(knots, knots, z)


def random_uniform_grid(rng, n=None, z_range=1.0):
    n = int(n if n is not None else rng.integers(2, 5))
    knots = np.linspace(0.0, 1.0, n + 1)
    z = rng.uniform(-z_range, z_range, (n + 1, n + 1))
    return make_grid(knots, knots, z)


def random_admissible_s(rng):
    """A random vertical field certified to stay inside (0, 1)."""
    kind = rng.integers(0, 3)
    if kind == 0:
        return float(rng.uniform(0.1, 0.9))
    c0 = float(rng.uniform(0.2, 0.6))
    c1 = float(rng.uniform(0.0, min(0.35, 0.95 - c0)))
    if kind == 1:
        return f"{c0!r}+{c1!r}*x*y"
    c2 = float(rng.uniform(0.0, (0.95 - c0 - c1)))
    return f"{c0!r}+{c1!r}*x+{c2!r}*y"


def random_system(rng, n=None):
    grid = random_uniform_grid(rng, n)
    return build_system(grid, random_admissible_s(rng))
