"""Dyadic model of the unit interval.

The ambient space is ``[0, 1)`` cut into ``2**L`` cells.  Two kinds of
non-negative functions live on it:

* :class:`StepFunction` -- one value per cell;
* :class:`PowerFunction` -- ``c * x**b`` evaluated analytically, so cubes
  touching the singularity at ``0`` are integrated exactly.

Both expose the same *block* interface: integrals, power means and
suprema over ``count`` consecutive blocks of ``size`` cells starting at
cell ``first``.  A dyadic level of any of the three grids is such a run of
blocks, which keeps every per-level computation a single reshape.

Grid ``g`` in ``{0, 1, 2}`` is the standard grid shifted by ``g/3`` with
alternating sign per level, rounded to the lattice; the rounding keeps the
grids nested.  Shifted cubes that leave ``[0, 1)`` are dropped rather than
wrapped.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

__all__ = [
    "StepFunction",
    "PowerFunction",
    "DyadicCube",
    "CoverFailure",
    "grid_offset",
    "grid_blocks",
    "cubes",
    "cube_count",
    "three_grid_cover",
    "average",
    "weighted_norm",
]

NGRIDS = 3


# --------------------------------------------------------------------------
# Functions
# --------------------------------------------------------------------------


class StepFunction:
    """Non-negative function constant on the cells of level ``L``."""

    def __init__(self, level: int, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size != 2**level:
            raise ValueError(f"expected {2**level} cell values, got shape {values.shape}")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("cell values must be finite and non-negative")
        self.level = int(level)
        self.values = values
        self._prefix: dict = {}

    def __repr__(self):
        return f"StepFunction(L={self.level}, range=[{self.values.min():.3g}, {self.values.max():.3g}])"

    @property
    def ncells(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return 2.0**-self.level

    @classmethod
    def constant(cls, level: int, c: float = 1.0) -> "StepFunction":
        return cls(level, np.full(2**level, float(c)))

    @classmethod
    def indicator(cls, level: int, lo: int, hi: int) -> "StepFunction":
        v = np.zeros(2**level)
        v[lo:hi] = 1.0
        return cls(level, v)

    def pow(self, t: float) -> "StepFunction":
        if t < 0 and np.any(self.values == 0):
            raise ZeroDivisionError("negative power of a function with zeros")
        with np.errstate(divide="ignore"):
            return StepFunction(self.level, self.values**t)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            _same_level(self, other)
            return StepFunction(self.level, self.values * other.values)
        return StepFunction(self.level, self.values * float(other))

    __rmul__ = __mul__

    def rows(self, first: int, size: int, count: int) -> np.ndarray:
        return self.values[first : first + size * count].reshape(count, size)

    def block_integrals(self, first: int, size: int, count: int) -> np.ndarray:
        return self.rows(first, size, count).sum(axis=1) * self.h

    def block_sups(self, first: int, size: int, count: int) -> np.ndarray:
        return self.rows(first, size, count).max(axis=1)

    def block_power_means(self, first: int, size: int, count: int, recip: float) -> np.ndarray:
        return row_power_means(self.rows(first, size, count), recip)

    def cell_integrals(self) -> np.ndarray:
        return self.values * self.h

    def total(self) -> float:
        return float(self.values.sum() * self.h)

    # Prefix sums serve averages over arbitrary lattice intervals.  They are
    # kept in extended precision because a difference of two long sums loses
    # the relative accuracy of short intervals.
    def _prefix_for(self, t: float) -> np.ndarray:
        if t not in self._prefix:
            v = self.values.astype(np.longdouble) ** np.longdouble(t)
            self._prefix[t] = np.concatenate([[np.longdouble(0)], np.cumsum(v)])
        return self._prefix[t]

    def interval_average(self, lo: int, hi: int, recip: float = 1.0) -> float:
        """Power mean over cells ``[lo, hi)``; ``recip = 0`` is the maximum."""
        if not 0 <= lo < hi <= self.ncells:
            raise ValueError(f"bad interval [{lo}, {hi})")
        if recip == 0:
            return float(self.values[lo:hi].max())
        t = 1.0 / recip
        pre = self._prefix_for(t)
        return float(((pre[hi] - pre[lo]) / (hi - lo)) ** np.longdouble(recip))


class PowerFunction:
    """``coeff * x**exponent`` on ``(0, 1)`` with exact cube integrals."""

    def __init__(self, level: int, exponent: float, coeff: float = 1.0):
        if coeff <= 0:
            raise ValueError("coefficient must be positive")
        self.level = int(level)
        self.exponent = float(exponent)
        self.coeff = float(coeff)

    def __repr__(self):
        return f"PowerFunction(L={self.level}, {self.coeff:g} * x**{self.exponent:g})"

    @property
    def ncells(self) -> int:
        return 2**self.level

    @property
    def h(self) -> float:
        return 2.0**-self.level

    def pow(self, t: float) -> "PowerFunction":
        return PowerFunction(self.level, self.exponent * t, self.coeff**t)

    def __mul__(self, other):
        if isinstance(other, PowerFunction):
            _same_level(self, other)
            return PowerFunction(self.level, self.exponent + other.exponent, self.coeff * other.coeff)
        return PowerFunction(self.level, self.exponent, self.coeff * float(other))

    __rmul__ = __mul__

    def _edges(self, first: int, size: int, count: int):
        i = np.arange(count, dtype=float)
        x0 = (first + i * size) * self.h
        return x0, x0 + size * self.h

    @staticmethod
    def _raw_integral(x0: np.ndarray, x1: np.ndarray, e: float) -> np.ndarray:
        """``int_{x0}^{x1} x^(e-1) dx`` in a cancellation-free form."""
        out = np.empty_like(x1)
        zero = x0 == 0
        if np.any(zero):
            if e <= 0:
                raise ValueError("power is not integrable at 0")
            out[zero] = x1[zero] ** e / e
        nz = ~zero
        if np.any(nz):
            lr = np.log(x0[nz] / x1[nz])
            if e == 0:
                out[nz] = -lr
            else:
                out[nz] = x1[nz] ** e * (-np.expm1(e * lr)) / e
        return out

    def block_integrals(self, first: int, size: int, count: int) -> np.ndarray:
        x0, x1 = self._edges(first, size, count)
        return self.coeff * self._raw_integral(x0, x1, self.exponent + 1.0)

    def block_sups(self, first: int, size: int, count: int) -> np.ndarray:
        x0, x1 = self._edges(first, size, count)
        if self.exponent >= 0:
            return self.coeff * x1**self.exponent
        with np.errstate(divide="ignore"):
            return self.coeff * x0**self.exponent

    def block_power_means(self, first: int, size: int, count: int, recip: float) -> np.ndarray:
        if recip == 0:
            return self.block_sups(first, size, count)
        x0, x1 = self._edges(first, size, count)
        t = 1.0 / recip
        mean = self._raw_integral(x0, x1, self.exponent * t + 1.0) / (x1 - x0)
        return self.coeff * mean**recip

    def cell_integrals(self) -> np.ndarray:
        return self.block_integrals(0, 1, self.ncells)

    def total(self) -> float:
        return float(self.block_integrals(0, self.ncells, 1)[0])

    def to_step(self) -> StepFunction:
        """Cell averages as a step function."""
        return StepFunction(self.level, self.block_power_means(0, 1, self.ncells, 1.0))


def _same_level(a, b):
    if a.level != b.level:
        raise ValueError(f"level mismatch: {a.level} vs {b.level}")


def row_power_means(rows: np.ndarray, recip: float, urows: np.ndarray | None = None) -> np.ndarray:
    """Power mean of each row, optionally weighted by ``urows``.

    Rows are normalised by their maximum first so large exponents do not
    overflow.  With ``urows`` of ones the result is bitwise identical to
    the unweighted path.
    """
    if recip == 0:
        if urows is None:
            return rows.max(axis=1)
        return np.where(urows > 0, rows, 0.0).max(axis=1)
    t = 1.0 / recip
    mx = rows.max(axis=1, keepdims=True)
    safe = np.where(mx > 0, mx, 1.0)
    scaled = (rows / safe) ** t
    if urows is None:
        mean = scaled.sum(axis=1) / rows.shape[1]
    else:
        mean = (scaled * urows).sum(axis=1) / urows.sum(axis=1)
    return np.where(mx[:, 0] > 0, mx[:, 0] * mean**recip, 0.0)


def weighted_norm(f, w, recip: float) -> float:
    """``||f w||_{L^p}`` on ``[0, 1)`` with ``1/p = recip``.

    ``f`` and ``w`` may be any mix of step and power functions at the same
    level; ``w = None`` means no weight.
    """
    if w is None:
        w = StepFunction.constant(f.level)
    _same_level(f, w)
    if recip == 0:
        if type(f) is type(w):
            return float(np.max((f * w).block_sups(0, 1, f.ncells)))
        # a step factor is constant on each cell
        return float(np.max(f.block_sups(0, 1, f.ncells) * w.block_sups(0, 1, f.ncells)))
    t = 1.0 / recip
    if type(f) is type(w):
        return ((f * w).pow(t).total()) ** recip
    if isinstance(f, StepFunction):
        return float(np.sum(f.values**t * w.pow(t).cell_integrals())) ** recip
    return float(np.sum(w.values**t * f.pow(t).cell_integrals())) ** recip


# --------------------------------------------------------------------------
# Grids and cubes
# --------------------------------------------------------------------------


def _third(j: int) -> int:
    # nearest integer to 2**j / 3
    return (2**j - (-1) ** j) // 3


def grid_offset(grid: int, k: int, L: int) -> int:
    """Cell offset of level-``k`` cubes in grid ``grid``."""
    if grid == 0:
        return 0
    if grid == 1:
        return (-1) ** k * _third(L - k)
    if grid == 2:
        return (-1) ** k * _third(L - k + 1)
    raise ValueError(f"grid must be 0, 1 or 2, got {grid}")


def grid_blocks(grid: int, k: int, L: int) -> tuple[int, int, int, int]:
    """``(first, size, count, index0)`` for level ``k`` of a grid.

    Cube ``index0 + i`` occupies cells ``[first + i*size, first + (i+1)*size)``.
    """
    size = 2 ** (L - k)
    o = grid_offset(grid, k, L)
    first = o % size
    count = (2**L - first) // size
    return first, size, count, (first - o) // size


@dataclass(frozen=True)
class DyadicCube:
    """Cube of side ``2**-level`` in ``grid`` at ambient resolution ``L``."""

    level: int
    index: int
    L: int
    grid: int = 0

    @property
    def size(self) -> int:
        return 2 ** (self.L - self.level)

    @property
    def start(self) -> int:
        return grid_offset(self.grid, self.level, self.L) + self.index * self.size

    @property
    def stop(self) -> int:
        return self.start + self.size

    @property
    def measure(self) -> float:
        return 2.0**-self.level

    def inside(self) -> bool:
        return 0 <= self.start and self.stop <= 2**self.L and 0 <= self.level <= self.L

    def contains_cell(self, c: int) -> bool:
        return self.start <= c < self.stop

    def contains(self, other: "DyadicCube") -> bool:
        return self.start <= other.start and other.stop <= self.stop

    def children(self) -> tuple["DyadicCube", "DyadicCube"]:
        if self.level >= self.L:
            raise ValueError("cells have no children")
        k = self.level + 1
        size = self.size // 2
        i = (self.start - grid_offset(self.grid, k, self.L)) // size
        return DyadicCube(k, i, self.L, self.grid), DyadicCube(k, i + 1, self.L, self.grid)

    def parent(self) -> "DyadicCube | None":
        if self.level == 0:
            return None
        k = self.level - 1
        size = self.size * 2
        i = (self.start - grid_offset(self.grid, k, self.L)) // size
        q = DyadicCube(k, i, self.L, self.grid)
        return q if q.inside() else None


def cubes(L: int, max_level: int | None = None, grid: int = 0) -> Iterator[DyadicCube]:
    """All cubes of ``grid`` inside ``[0, 1)`` with level at most ``max_level``."""
    top = L if max_level is None else max_level
    for k in range(top + 1):
        _, _, count, i0 = grid_blocks(grid, k, L)
        for i in range(count):
            yield DyadicCube(k, i0 + i, L, grid)


def cube_count(L: int, max_level: int | None = None, grid: int = 0) -> int:
    top = L if max_level is None else max_level
    return sum(grid_blocks(grid, k, L)[2] for k in range(top + 1))


class CoverFailure(ValueError):
    """No grid has an in-range cube containing the interval."""


def three_grid_cover(lo: int, hi: int, L: int) -> tuple[int, DyadicCube]:
    """Smallest cube over the three grids containing cells ``[lo, hi)``.

    Returns ``(grid, cube)``; the side ratio ``|Q| / |I|`` is at most 6.
    """
    if not 0 <= lo < hi <= 2**L:
        raise ValueError(f"bad interval [{lo}, {hi})")
    best = None
    for g in range(NGRIDS):
        for k in range(L, -1, -1):
            size = 2 ** (L - k)
            o = grid_offset(g, k, L)
            i = (lo - o) // size
            q = DyadicCube(k, i, L, g)
            if q.stop >= hi:
                if q.inside() and (best is None or q.size < best[1].size):
                    best = (g, q)
                break
    if best is None:
        raise CoverFailure(f"no in-range cube covers [{lo}, {hi})")
    if best[1].size > 6 * (hi - lo):
        raise CoverFailure(f"cover of [{lo}, {hi}) has ratio {best[1].size / (hi - lo)}")
    return best


def average(f, recip: float, cube: DyadicCube) -> float:
    """``<f>_{t,Q}`` with ``1/t = recip``; ``recip = 0`` is the essential sup."""
    if not cube.inside():
        raise ValueError("cube outside the ambient interval")
    return float(f.block_power_means(cube.start, cube.size, 1, recip)[0])
