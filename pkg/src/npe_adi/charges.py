"""Solute charges: PQR input, physical constants, trilinear spreading, Coulomb data.

Potentials are in units of k_B T / e_c and lengths in Angstrom, so the
Coulomb prefactor e_c^2 / (4 pi eps_0 k_B T) is the vacuum Bjerrum length.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np
from scipy import constants as sc

from .grid3d import Grid, ScalarField

log = logging.getLogger(__name__)


class PQRParseError(ValueError):
    pass


class EmptySystemError(ValueError):
    pass


class PlacementError(ValueError):
    def __init__(self, index: int, position, msg: str = "outside the grid interior"):
        super().__init__(f"atom {index} at {tuple(np.round(position, 6))} is {msg}")
        self.index = index


class SingularBoundaryError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    position: tuple[float, float, float]
    charge: float
    radius: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if not np.isfinite(self.position).all():
            raise ValueError("atom position must be finite")
        if self.radius < 0:
            raise ValueError("atom radius must be non-negative")


@dataclass(frozen=True)
class ChargeSystem:
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise EmptySystemError("charge system has no atoms")

    @classmethod
    def single(cls, charge=1.0, radius=1.0, position=(0.0, 0.0, 0.0)) -> "ChargeSystem":
        return cls((Atom(position, charge, radius, "ION"),))

    def __len__(self):
        return len(self.atoms)

    @property
    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=float)

    @property
    def charges(self) -> np.ndarray:
        return np.array([a.charge for a in self.atoms], dtype=float)

    @property
    def radii(self) -> np.ndarray:
        return np.array([a.radius for a in self.atoms], dtype=float)

    def scaled(self, factor: float) -> "ChargeSystem":
        return ChargeSystem(tuple(Atom(a.position, a.charge * factor, a.radius, a.name) for a in self.atoms))


@dataclass(frozen=True)
class PhysicalConstants:
    temperature: float
    coulomb_prefactor: float  # e_c^2 / (4 pi eps_0 k_B T), Angstrom
    kBT_kcal: float  # k_B T in kcal/mol

    @property
    def four_pi_prefactor(self) -> float:
        return 4.0 * math.pi * self.coulomb_prefactor

    @classmethod
    def at(cls, temperature: float = 298.15) -> "PhysicalConstants":
        if not temperature > 0:
            raise ValueError("temperature must be positive")
        kT = sc.k * temperature
        bjerrum = sc.e**2 / (4.0 * math.pi * sc.epsilon_0 * kT) / sc.angstrom
        kT_kcal = kT * sc.N_A / (1000.0 * sc.calorie)
        out = cls(temperature, bjerrum, kT_kcal)
        log.debug("constants at %.2f K: Bjerrum %.6f A, kT %.6f kcal/mol", temperature, bjerrum, kT_kcal)
        return out

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "coulomb_prefactor": self.coulomb_prefactor,
            "four_pi_prefactor": self.four_pi_prefactor,
            "kBT_kcal": self.kBT_kcal,
        }


# -- PQR --------------------------------------------------------------------------


def parse_pqr(text: str | Iterable[str]) -> ChargeSystem:
    """Read ATOM/HETATM records; the last five fields are x y z charge radius."""
    lines = text.splitlines() if isinstance(text, str) else text
    atoms = []
    for lineno, line in enumerate(lines, 1):
        fields = line.split()
        if not fields or fields[0] not in ("ATOM", "HETATM"):
            continue
        if len(fields) < 6:
            raise PQRParseError(f"line {lineno}: too few fields for an atom record")
        try:
            x, y, z, q, r = (float(v) for v in fields[-5:])
        except ValueError:
            raise PQRParseError(f"line {lineno}: non-numeric coordinate, charge or radius") from None
        if not all(map(math.isfinite, (x, y, z, q, r))) or r < 0:
            raise PQRParseError(f"line {lineno}: invalid atom values")
        name = fields[2] if len(fields) > 7 else ""
        atoms.append(Atom((x, y, z), q, r, name))
    if not atoms:
        raise EmptySystemError("no ATOM/HETATM records found")
    return ChargeSystem(tuple(atoms))


def read_pqr(path: str | Path) -> ChargeSystem:
    with open(path) as fh:
        try:
            return parse_pqr(fh)
        except (PQRParseError, EmptySystemError) as exc:
            raise type(exc)(f"{path}: {exc}") from None


def write_pqr(system: ChargeSystem, path: str | Path) -> None:
    with open(path, "w") as fh:
        for n, a in enumerate(system.atoms, 1):
            x, y, z = a.position
            fh.write(f"ATOM  {n:5d} {a.name or 'X':>4s} MOL     1    "
                     f"{x:8.3f}{y:8.3f}{z:8.3f} {a.charge:7.4f} {a.radius:6.4f}\n")


# -- grids around solutes -------------------------------------------------------------


def auto_grid(system: ChargeSystem, h: float, padding: float = 6.0, offset: float = 0.5) -> Grid:
    """Cube-aligned box around the atoms (plus radii) with ``padding`` Angstrom clearance.

    Node coordinates are ``(n + offset) * h``. The default half-cell offset puts an
    atom at a lattice point such as the origin in the middle of a cell: a charge
    sitting exactly on a node has a vanishing central-difference gradient there,
    which pins the nodal permittivity at eps_s right at the charge.
    """
    if not 0.0 <= offset < 1.0:
        raise ValueError("offset must lie in [0, 1)")
    pos, rad = system.positions, system.radii
    shift = offset * h
    lo = np.floor(((pos - rad[:, None]).min(axis=0) - padding - shift) / h) * h + shift
    hi = np.ceil(((pos + rad[:, None]).max(axis=0) + padding - shift) / h) * h + shift
    dims = tuple(int(round(v)) + 1 for v in (hi - lo) / h)
    return Grid(tuple(lo), h, dims)


# -- trilinear spreading ----------------------------------------------------------------


def trilinear_stencil(grid: Grid, position, index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Corner indices ``(8, 3)`` and weights ``(8,)`` of the cell holding ``position``.

    The position must lie in the box spanned by interior nodes, so every corner
    that carries weight is an interior node.
    """
    rel = (np.asarray(position, dtype=float) - np.asarray(grid.origin)) / grid.h
    dims = np.asarray(grid.dims)
    if not ((rel >= 1.0 - 1e-12) & (rel <= dims - 2 + 1e-12)).all():
        raise PlacementError(index, position)
    base = np.minimum(np.floor(rel + 1e-12).astype(int), dims - 3)
    base = np.maximum(base, 1)
    frac = np.clip(rel - base, 0.0, 1.0)
    corners = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)])
    w = np.prod(np.where(corners == 1, frac, 1.0 - frac), axis=1)
    return base + corners, w


def charge_weights(system: ChargeSystem, grid: Grid) -> np.ndarray:
    """Sum over atoms of q_j times its trilinear weights, per node (no prefactor)."""
    acc = np.zeros(grid.dims)
    for n, atom in enumerate(system.atoms):
        idx, w = trilinear_stencil(grid, atom.position, n)
        np.add.at(acc, (idx[:, 0], idx[:, 1], idx[:, 2]), atom.charge * w)
    return acc


def distribute_charges(system: ChargeSystem, grid: Grid, constants: PhysicalConstants) -> ScalarField:
    """Source density Q = 4 pi l_B * (spread charge) / h^3."""
    return ScalarField(grid, charge_weights(system, grid) * (constants.four_pi_prefactor / grid.h**3))


def interpolate_at_atoms(fld: ScalarField, system: ChargeSystem) -> np.ndarray:
    """Trilinear interpolation of a node field at every atom centre."""
    out = np.empty(len(system))
    for n, atom in enumerate(system.atoms):
        idx, w = trilinear_stencil(fld.grid, atom.position, n)
        out[n] = float(np.dot(w, fld.values[idx[:, 0], idx[:, 1], idx[:, 2]]))
    return out


# -- Coulomb superposition ----------------------------------------------------------------


@numba.njit(cache=True)
def _coulomb_sum(points, pos, q, out):
    for n in range(points.shape[0]):
        acc = 0.0
        hit = -1
        for a in range(pos.shape[0]):
            dx = points[n, 0] - pos[a, 0]
            dy = points[n, 1] - pos[a, 1]
            dz = points[n, 2] - pos[a, 2]
            r = math.sqrt(dx * dx + dy * dy + dz * dz)
            if r == 0.0:
                hit = a
                continue
            acc += q[a] / r
        out[n] = acc
        if hit >= 0:
            out[n] = math.nan


def coulomb_potential(system: ChargeSystem, points: np.ndarray, eps: float, constants: PhysicalConstants) -> np.ndarray:
    """l_B * sum_i q_i / (eps |r - r_i|); NaN where a point coincides with an atom."""
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    out = np.empty(pts.shape[0])
    _coulomb_sum(pts, system.positions, system.charges, out)
    return out * (constants.coulomb_prefactor / eps)


def _boundary_points(grid: Grid) -> tuple[np.ndarray, tuple]:
    where = np.nonzero(grid.boundary_mask())
    coords = np.stack([grid.origin[a] + grid.h * where[a] for a in range(3)], axis=1)
    return coords, where


def dirichlet_boundary(system: ChargeSystem, grid: Grid, eps_s: float, constants: PhysicalConstants) -> ScalarField:
    """Field holding the Coulomb boundary data on boundary nodes and zero inside."""
    coords, where = _boundary_points(grid)
    vals = coulomb_potential(system, coords, eps_s, constants)
    if not np.isfinite(vals).all():
        raise SingularBoundaryError("an atom coincides with a boundary node")
    out = np.zeros(grid.dims)
    out[where] = vals
    return ScalarField(grid, out)


def coulomb_initial_guess(system: ChargeSystem, grid: Grid, eps: float, constants: PhysicalConstants) -> ScalarField:
    """Coulomb superposition on every node.

    Nodes that coincide with an atom take the mean of their six neighbours.
    """
    X, Y, Z = grid.mesh()
    pts = np.stack(np.broadcast_arrays(X, Y, Z), axis=-1).reshape(-1, 3)
    vals = coulomb_potential(system, pts, eps, constants).reshape(grid.dims)
    bad = np.argwhere(~np.isfinite(vals))
    for i, j, k in bad:
        if grid.is_boundary(i, j, k):
            raise SingularBoundaryError("an atom coincides with a boundary node")
        nb = [vals[i + 1, j, k], vals[i - 1, j, k], vals[i, j + 1, k],
              vals[i, j - 1, k], vals[i, j, k + 1], vals[i, j, k - 1]]
        nb = [v for v in nb if np.isfinite(v)]
        vals[i, j, k] = float(np.mean(nb)) if nb else 0.0
    return ScalarField(grid, vals)


def check_inside(system: ChargeSystem, grid: Grid) -> None:
    for n, atom in enumerate(system.atoms):
        trilinear_stencil(grid, atom.position, n)


