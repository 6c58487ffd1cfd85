"""Surface function, coarea area, volume, nonpolar and polar solvation energies."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .charges import ChargeSystem, PhysicalConstants, interpolate_at_atoms
from .dielectric import DielectricModel, nodal_grad_sq
from .grid3d import Grid, ScalarField

log = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    pass


def surface_function(phi: ScalarField, model: DielectricModel) -> ScalarField:
    """S = (eps_s - eps) / (eps_s - eps_m): ~1 inside the solute, ~0 in bulk solvent."""
    if model.eps_s == model.eps_m:
        return ScalarField.zeros(phi.grid)
    eps = model(nodal_grad_sq(phi.values, phi.grid.h))
    S = (model.eps_s - eps) / (model.eps_s - model.eps_m)
    return ScalarField(phi.grid, np.clip(S, 0.0, 1.0))


def surface_area(S: ScalarField) -> float:
    """Coarea form of the interface area: h^3 * sum |grad S|."""
    h = S.grid.h
    gx, gy, gz = np.gradient(S.values, h)
    return float(h**3 * np.sqrt(gx * gx + gy * gy + gz * gz).sum())


def solute_volume(S: ScalarField) -> float:
    return float(S.grid.h**3 * S.values.sum())


# -- nonpolar -----------------------------------------------------------------------

AttractionFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class NonpolarParams:
    gamma: float = 0.0065  # kcal / (mol A^2)
    pressure: float = 0.035  # kcal / (mol A^3)
    rho_s: float = 0.0334  # A^-3, bulk water
    att_potential: Optional[AttractionFn] = field(default=None, repr=False)

    def __post_init__(self):
        if min(self.gamma, self.pressure, self.rho_s) < 0:
            raise ValueError("nonpolar parameters must be non-negative")

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "pressure": self.pressure, "rho_s": self.rho_s,
                "dispersion": getattr(self.att_potential, "label", None if self.att_potential is None else "custom")}


def wca_attraction(system: ChargeSystem, well_depth: float = 0.1, solvent_radius: float = 1.4) -> AttractionFn:
    """Attractive half of a 12-6 potential per atom (Weeks-Chandler-Andersen split).

    Inside the minimum r_min = 2^(1/6) sigma the attraction is flat at -well_depth;
    beyond it the full Lennard-Jones form applies. sigma = atom radius + solvent radius.
    """
    pos = system.positions
    sigma = system.radii + solvent_radius

    def u_att(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        out = np.zeros(pts.shape[0])
        for p, s in zip(pos, sigma):
            r = np.sqrt(((pts - p) ** 2).sum(axis=1))
            rmin = 2.0 ** (1.0 / 6.0) * s
            with np.errstate(divide="ignore"):
                sr6 = (s / np.maximum(r, rmin)) ** 6
            out += np.where(r < rmin, -well_depth, 4.0 * well_depth * (sr6 * sr6 - sr6))
        return out

    u_att.label = f"wca(well_depth={well_depth}, solvent_radius={solvent_radius})"
    return u_att


def dispersion_energy(S: ScalarField, params: NonpolarParams) -> Optional[float]:
    if params.att_potential is None:
        return None
    g = S.grid
    X, Y, Z = g.mesh()
    pts = np.stack(np.broadcast_arrays(X, Y, Z), axis=-1).reshape(-1, 3)
    u = params.att_potential(pts).reshape(g.dims)
    return float(params.rho_s * g.h**3 * ((1.0 - S.values) * u).sum())


def nonpolar_energy(S: ScalarField, params: NonpolarParams, grid: Optional[Grid] = None) -> float:
    if grid is not None and not grid.same_as(S.grid):
        raise ConfigurationError("surface function lives on a different grid")
    disp = dispersion_energy(S, params) or 0.0
    return params.gamma * surface_area(S) + params.pressure * solute_volume(S) + disp


# -- polar ----------------------------------------------------------------------------


def polar_energy(phi: ScalarField, system: ChargeSystem, constants: PhysicalConstants) -> float:
    """1/2 sum q_i phi(r_i), in kcal/mol."""
    return 0.5 * float(np.dot(system.charges, interpolate_at_atoms(phi, system))) * constants.kBT_kcal


def electrostatic_solvation(phi: ScalarField, phi_vac: ScalarField, system: ChargeSystem,
                            constants: PhysicalConstants) -> float:
    if not phi.grid.same_as(phi_vac.grid):
        raise ConfigurationError("solvated and vacuum potentials must share one grid")
    diff = ScalarField(phi.grid, phi.values - phi_vac.values)
    return polar_energy(diff, system, constants)


@dataclass
class EnergyReport:
    G_p: float
    G_0: float
    dG_p: float
    area: float
    volume: float
    G_np: float
    dG_total: float
    dispersion_included: bool = False
    units: str = "kcal/mol, A^2, A^3"

    @classmethod
    def build(cls, phi, phi_vac, system, model, constants, params: Optional[NonpolarParams] = None) -> "EnergyReport":
        params = params or NonpolarParams()
        G_p = polar_energy(phi, system, constants)
        G_0 = polar_energy(phi_vac, system, constants)
        dG_p = electrostatic_solvation(phi, phi_vac, system, constants)
        S = surface_function(phi, model)
        area, vol = surface_area(S), solute_volume(S)
        G_np = nonpolar_energy(S, params)
        return cls(G_p, G_0, dG_p, area, vol, G_np, G_np + dG_p, params.att_potential is not None)

    def to_dict(self) -> dict:
        return asdict(self)


def rmse(predicted, reference) -> float:
    e = np.asarray(predicted, float) - np.asarray(reference, float)
    return float(math.sqrt(np.mean(e * e)))


def mean_abs_error(predicted, reference) -> float:
    return float(np.mean(np.abs(np.asarray(predicted, float) - np.asarray(reference, float))))
