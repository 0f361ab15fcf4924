"""Monotone piecewise-cubic interpolation over calibration grids.

Curves use PCHIP (Fritsch-Carlson slope limiting), which reproduces grid
nodes exactly and never overshoots monotone data.  Queries outside a grid
clamp to the nearest endpoint.  Surfaces apply the 1-D rule per row along
the chi axis and then once along the n axis.
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import PchipInterpolator


class InterpolationError(ValueError):
    pass


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InterpolationError("grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise InterpolationError("grid must be strictly increasing")
    return grid


class MonotoneCurve:
    def __init__(self, grid, values):
        self.grid = _check_grid(grid)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise InterpolationError("values must match the grid length")
        self._pchip = (
            PchipInterpolator(self.grid, self.values) if self.grid.size > 1 else None
        )

    def __call__(self, x: float) -> float:
        x = min(max(float(x), self.grid[0]), self.grid[-1])
        if self._pchip is None:
            return float(self.values[0])
        return float(self._pchip(x))


class TensorSurface:
    """Rectangular (n, chi) coefficient surface, interpolated chi-first."""

    def __init__(self, grid_n, grid_chi, values):
        self.grid_n = _check_grid(grid_n)
        self.grid_chi = _check_grid(grid_chi)
        table = np.asarray(values, dtype=float)
        if table.shape != (self.grid_n.size, self.grid_chi.size):
            raise InterpolationError(
                f"surface shape {table.shape} does not match "
                f"({self.grid_n.size}, {self.grid_chi.size})"
            )
        self.values = table
        self._rows = [MonotoneCurve(self.grid_chi, row) for row in table]
        # chi values repeat heavily across queries (powers of two from the
        # selection policy), so the derived n-curve is cached per chi.
        self._columns: dict[float, MonotoneCurve] = {}

    def __call__(self, n: float, chi: float) -> float:
        chi = float(chi)
        curve = self._columns.get(chi)
        if curve is None:
            curve = MonotoneCurve(self.grid_n, [row(chi) for row in self._rows])
            self._columns[chi] = curve
        return curve(n)


def interpolate_1d(grid, values, x: float) -> float:
    return MonotoneCurve(grid, values)(x)


def interpolate_2d(grid_n, grid_chi, surface, n: float, chi: float) -> float:
    return TensorSurface(grid_n, grid_chi, surface)(n, chi)
