"""Uniform grids on [0,1], trapezoid quadrature and the two function norms."""

from dataclasses import dataclass, field

import numpy as np


class GridMismatchError(ValueError):
    """Two grid functions do not live on the same grid."""


@dataclass(frozen=True)
class Grid:
    """Uniform points on [0,1] with quadrature weights.

    Immutable; safe to share between threads.  ``make_grid`` builds the
    standard trapezoid grid (weights sum to 1), ``index_grid`` the
    counting-measure variant used for finite-dimensional covariances.
    """

    n: int
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 points, got n={self.n}")
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    def same_as(self, other: "Grid") -> bool:
        return self.n == other.n and np.array_equal(self.weights, other.weights)


def make_grid(n: int) -> Grid:
    """Trapezoid grid: t_i = i/(n-1), weights (h/2, h, ..., h, h/2)."""
    if n < 2:
        raise ValueError(f"grid needs at least 2 points, got n={n}")
    h = 1.0 / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2.0
    return Grid(n=n, points=np.linspace(0.0, 1.0, n), weights=w)


def index_grid(n: int) -> Grid:
    """Unit-weight grid: the Euclidean inner product on R^n, for
    finite-dimensional covariance matrices."""
    if n < 2:
        raise ValueError(f"grid needs at least 2 points, got n={n}")
    return Grid(n=n, points=np.linspace(0.0, 1.0, n), weights=np.ones(n))


@dataclass(frozen=True)
class GridFunction:
    """Function values sampled at the grid points."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"values have shape {v.shape}, expected ({self.grid.n},)"
            )
        object.__setattr__(self, "values", v)
        v.setflags(write=False)


def grid_function(grid: Grid, f) -> GridFunction:
    """Sample a callable (or wrap an array) on the grid."""
    if callable(f):
        return GridFunction(grid, np.asarray(f(grid.points), dtype=float))
    return GridFunction(grid, np.asarray(f, dtype=float))


def _check_same_grid(f: GridFunction, g: GridFunction):
    if not f.grid.same_as(g.grid):
        raise GridMismatchError(
            f"grids differ: n={f.grid.n} vs n={g.grid.n}"
        )


def inner_l2(f: GridFunction, g: GridFunction) -> float:
    """Quadrature inner product sum_i w_i f_i g_i."""
    _check_same_grid(f, g)
    return float(np.dot(f.grid.weights, f.values * g.values))


def norm(f: GridFunction, which: str = "sup") -> float:
    """'sup' -> max_i |f_i|; 'l2' -> sqrt(<f, f>)."""
    if which == "sup":
        return float(np.max(np.abs(f.values)))
    if which == "l2":
        return float(np.sqrt(max(inner_l2(f, f), 0.0)))
    raise ValueError(f"unknown norm {which!r}, expected 'sup' or 'l2'")
