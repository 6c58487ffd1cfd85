"""Uniform Cartesian grids and node fields.

Layout: values are stored as a C-ordered ``(nx, ny, nz)`` array, so ``z`` is
the fastest-varying axis and the flat index of node ``(i, j, k)`` is
``(i * ny + j) * nz + k``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Grid:
    origin: tuple[float, float, float]
    h: float
    dims: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.origin) != 3 or len(self.dims) != 3:
            raise ValueError("origin and dims must have three components")
        if not (self.h > 0 and np.isfinite(self.h)):
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if min(self.dims) < 4:
            raise ValueError(f"every dimension needs at least 4 nodes, got {self.dims}")

    @classmethod
    def cube(cls, lo: float, hi: float, n_cells: int) -> "Grid":
        """Cube ``[lo, hi]^3`` split into ``n_cells`` cells per side."""
        h = (hi - lo) / n_cells
        return cls((lo, lo, lo), h, (n_cells + 1,) * 3)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.dims

    @property
    def size(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.origin) + self.h * (np.asarray(self.dims) - 1)

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.h * np.arange(self.dims[axis])

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays ``(X, Y, Z)``."""
        x, y, z = (self.axis_coords(a) for a in range(3))
        return x[:, None, None], y[None, :, None], z[None, None, :]

    def _check(self, i, j, k):
        for idx, n in zip((i, j, k), self.dims):
            if not 0 <= idx < n:
                raise IndexError(f"node {(i, j, k)} outside grid of dims {self.dims}")

    def node_position(self, i: int, j: int, k: int) -> np.ndarray:
        self._check(i, j, k)
        return np.asarray(self.origin) + self.h * np.array([i, j, k], dtype=float)

    def is_boundary(self, i: int, j: int, k: int) -> bool:
        self._check(i, j, k)
        return any(idx == 0 or idx == n - 1 for idx, n in zip((i, j, k), self.dims))

    def flat_index(self, i: int, j: int, k: int) -> int:
        self._check(i, j, k)
        _, ny, nz = self.dims
        return (i * ny + j) * nz + k

    def unflat_index(self, p: int) -> tuple[int, int, int]:
        if not 0 <= p < self.size:
            raise IndexError(f"flat index {p} outside grid of size {self.size}")
        return tuple(int(v) for v in np.unravel_index(p, self.dims))

    def boundary_mask(self) -> np.ndarray:
        mask = np.ones(self.dims, dtype=bool)
        mask[1:-1, 1:-1, 1:-1] = False
        return mask

    def same_as(self, other: "Grid", rtol: float = 1e-12) -> bool:
        return (
            self.dims == other.dims
            and np.isclose(self.h, other.h, rtol=rtol, atol=0)
            and np.allclose(self.origin, other.origin, rtol=rtol, atol=rtol * self.h)
        )


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size != self.grid.size:
            raise ValueError(
                f"field has {values.size} values, grid {self.grid.dims} needs {self.grid.size}"
            )
        self.values = values.reshape(self.grid.dims)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.dims))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        X, Y, Z = grid.mesh()
        return cls(grid, np.broadcast_to(fn(X, Y, Z), grid.dims).copy())

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def check_finite(self):
        if not self.is_finite():
            bad = int((~np.isfinite(self.values)).sum())
            raise FloatingPointError(f"field contains {bad} non-finite values")


# -- field dump -------------------------------------------------------------
#
#   # npe-field v1
#   # dims nx ny nz
#   # h <spacing>
#   # origin ox oy oz
#   value            (one per line, flat C order: z fastest)


def dump_field(fld: ScalarField, path: str | Path) -> None:
    g = fld.grid
    header = (
        "npe-field v1\n"
        f"dims {g.dims[0]} {g.dims[1]} {g.dims[2]}\n"
        f"h {g.h!r}\n"
        f"origin {g.origin[0]!r} {g.origin[1]!r} {g.origin[2]!r}"
    )
    np.savetxt(path, fld.flat, fmt="%.17g", header=header, comments="# ")


def load_field(path: str | Path) -> ScalarField:
    text = Path(path).read_text()
    meta = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        parts = line[1:].split()
        if parts:
            meta[parts[0]] = parts[1:]
    if "npe-field" not in meta:
        raise ValueError(f"{path}: missing npe-field header")
    grid = Grid(
        origin=tuple(float(v) for v in meta["origin"]),
        h=float(meta["h"][0]),
        dims=tuple(int(v) for v in meta["dims"]),
    )
    values = np.loadtxt(io.StringIO(text), comments="#")
    return ScalarField(grid, values)
