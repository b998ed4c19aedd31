"""Uniform periodic grids on the unit torus and real-valued fields over them.

A grid carries a split of its axes into an ``x1`` block and an ``x2`` block
(each of dimension 0 or 1).  Axis 0 is ``x1`` when ``d1 == 1``; otherwise
the only axis belongs to ``x2``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

__all__ = [
    "GridError",
    "TorusGrid",
    "GridField",
    "make_grid",
    "sample",
    "constant",
    "sup_norm",
    "oscillation",
    "mean",
    "discrete_lipschitz",
    "field_to_csv",
    "field_from_csv",
]

BLOCKS = ("x1", "x2", "full")


class GridError(ValueError):
    """Invalid grid construction or mismatched grids."""


@dataclass(frozen=True)
class TorusGrid:
    d1: int
    d2: int
    n: int

    def __post_init__(self) -> None:
        if self.d1 not in (0, 1) or self.d2 not in (0, 1) or self.d1 + self.d2 not in (1, 2):
            raise GridError(f"dimension-out-of-range: d1={self.d1}, d2={self.d2}")
        if self.n < 8 or self.n & (self.n - 1):
            raise GridError(f"n-not-power-of-two: n={self.n} (need a power of two >= 8)")

    @property
    def d(self) -> int:
        return self.d1 + self.d2

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    def block_axes(self, block: str) -> tuple[int, ...]:
        """Array axes belonging to ``block`` (possibly empty)."""
        if block == "x1":
            return (0,) if self.d1 else ()
        if block == "x2":
            return (self.d1,) if self.d2 else ()
        if block == "full":
            return tuple(range(self.d))
        raise GridError(f"unknown block {block!r}; expected one of {BLOCKS}")

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Node coordinates ``i*h`` per axis, broadcast to the full grid shape."""
        x = np.arange(self.n) * self.h
        return tuple(np.meshgrid(*([x] * self.d), indexing="ij"))

    def axis_names(self) -> tuple[str, ...]:
        names = []
        if self.d1:
            names.append("x1")
        if self.d2:
            names.append("x2")
        return tuple(names)


def make_grid(d1: int, d2: int, n: int) -> TorusGrid:
    return TorusGrid(int(d1), int(d2), int(n))


class GridField:
    """Immutable real values on a :class:`TorusGrid`.

    ``values`` is stored with shape ``grid.shape``; its C-order flattening is
    the row-major node ordering used for serialization.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: TorusGrid, values) -> None:
        arr = np.array(values, dtype=float)
        if arr.size != grid.size:
            raise GridError(f"expected {grid.size} values, got {arr.size}")
        arr = arr.reshape(grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite field value")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GridField is immutable")

    def __repr__(self) -> str:
        return f"GridField(grid={self.grid!r}, min={self.values.min():.6g}, max={self.values.max():.6g})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridField):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.grid, self.values.tobytes()))

    def _coerce(self, other) -> np.ndarray | float:
        if isinstance(other, GridField):
            if other.grid != self.grid:
                raise GridError("grid mismatch")
            return other.values
        return other

    def __add__(self, other) -> GridField:
        return GridField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> GridField:
        return GridField(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other) -> GridField:
        return GridField(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other) -> GridField:
        return GridField(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> GridField:
        return GridField(self.grid, -self.values)

    def shift(self, offsets: Iterable[int]) -> GridField:
        """Index translation: ``out[i] = self[i + k]`` with wrapped indexing."""
        offsets = tuple(int(k) for k in offsets)
        return GridField(self.grid, np.roll(self.values, [-k for k in offsets], axis=tuple(range(self.grid.d))))

    def at(self, *index: int) -> float:
        return float(self.values[tuple(i % self.grid.n for i in index)])


def constant(grid: TorusGrid, c: float) -> GridField:
    return GridField(grid, np.full(grid.shape, float(c)))


def sample(func: Callable[..., np.ndarray | float], grid: TorusGrid) -> GridField:
    """Evaluate ``func`` at the nodes.

    ``func`` receives one coordinate array per axis (``x1`` first) and may
    return an array or a scalar.
    """
    coords = grid.coordinates()
    vals = np.broadcast_to(np.asarray(func(*coords), dtype=float), grid.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite sample value")
    return GridField(grid, vals)


def sup_norm(u: GridField) -> float:
    return float(np.max(np.abs(u.values)))


def oscillation(u: GridField) -> float:
    return float(np.max(u.values) - np.min(u.values))


def mean(u: GridField) -> float:
    return float(np.mean(u.values))


def discrete_lipschitz(u: GridField) -> float:
    """Largest wrapped forward difference quotient over all nodes and axes."""
    return _lipschitz(u.values, u.grid.h)


def _lipschitz(values: np.ndarray, h: float) -> float:
    best = 0.0
    for ax in range(values.ndim):
        diff = np.abs(np.roll(values, -1, axis=ax) - values)
        best = max(best, float(diff.max()))
    return best / h


def field_to_csv(u: GridField) -> str:
    """Serialize as ``i0[,i1],value`` rows in row-major order, 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"i{a}" for a in range(u.grid.d)] + ["value"])
    for idx in np.ndindex(*u.grid.shape):
        writer.writerow([*idx, format(float(u.values[idx]), ".17g")])
    return buf.getvalue()


def field_from_csv(text: str, grid: TorusGrid) -> GridField:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if header != [f"i{a}" for a in range(grid.d)] + ["value"]:
        raise GridError(f"unexpected CSV header {header}")
    vals = np.empty(grid.shape)
    seen = np.zeros(grid.shape, dtype=bool)
    for row in body:
        idx = tuple(int(c) for c in row[:-1])
        vals[idx] = float(row[-1])
        seen[idx] = True
    if not seen.all():
        raise GridError("CSV does not cover every node")
    return GridField(grid, vals)
