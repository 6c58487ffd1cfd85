"""Solvation runs: grid set-up, vacuum reference, ADI or BVP solve, energy report.

Both solvers see the same grid, charge spreading, boundary data and starting
state, so their energies are directly comparable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .adi import SolverConfig, SteadyStateResult, solve_steady
from .bvp import BvpConfig, BvpResult, assemble_from_halves, piecewise_halves, solve_bvp, solve_linear
from .charges import (ChargeSystem, PhysicalConstants, auto_grid, check_inside, coulomb_initial_guess,
                      dirichlet_boundary, distribute_charges)
from .dielectric import DielectricModel, HalfNodeScheme
from .energy import EnergyReport, NonpolarParams, electrostatic_solvation, polar_energy
from .grid3d import Grid, ScalarField

log = logging.getLogger(__name__)

INITIAL_STATES = ("piecewise", "coulomb", "vacuum")


@dataclass
class SolvationConfig:
    """Physical and numerical set-up shared by the ADI and BVP solvers.

    ``grad_scale_bjerrum`` is the field-strength scale of the dielectric model in
    units of the Bjerrum length: with potentials in k_BT/e_c and lengths in
    Angstrom, |grad phi|^2 is divided by ``grad_scale_bjerrum * l_B`` (1/A^2).
    """

    h: float = 0.25
    padding: float = 6.0
    grid_offset: float = 0.5
    temperature: float = 298.15
    eps_m: float = 1.0
    eps_s: float = 80.0
    alpha: float = 40.0
    p: int = 1
    variant: str = "rational"
    grad_scale_bjerrum: float = 20.0
    scheme: str = "eps1"
    dt: float = 0.1
    t_final: float = 5.0
    energy_tol: float = 1.0
    monitor_every: int = 1
    stop_when_converged: bool = False
    init: str = "piecewise"
    linear_tol: float = 1e-10
    linear_max_iters: int = 20000
    bvp_tol: float = 0.01
    bvp_max_outer: int = 200
    nonpolar: dict = field(default_factory=lambda: {"gamma": 0.0065, "pressure": 0.035, "rho_s": 0.0334})

    def __post_init__(self):
        self.scheme = HalfNodeScheme.parse(self.scheme).value
        if self.init not in INITIAL_STATES:
            raise ValueError(f"init must be one of {INITIAL_STATES}")
        if not (self.h > 0 and self.padding >= 0 and self.temperature > 0):
            raise ValueError("h and temperature must be positive, padding non-negative")

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants.at(self.temperature)

    def model(self, constants: Optional[PhysicalConstants] = None) -> DielectricModel:
        c = constants or self.constants()
        return DielectricModel(self.variant, self.eps_m, self.eps_s, self.alpha, self.p,
                               self.grad_scale_bjerrum * c.coulomb_prefactor)

    def adi_config(self) -> SolverConfig:
        return SolverConfig(dt=self.dt, t_final=self.t_final, energy_tol=self.energy_tol, scheme=self.scheme,
                            monitor_every=self.monitor_every, stop_when_converged=self.stop_when_converged)

    def bvp_config(self) -> BvpConfig:
        return BvpConfig(energy_tol=self.bvp_tol, max_outer_iters=self.bvp_max_outer,
                         inner_solver_tol=self.linear_tol, inner_max_iters=self.linear_max_iters,
                         scheme=self.scheme)

    def nonpolar_params(self) -> NonpolarParams:
        return NonpolarParams(**self.nonpolar)

    def to_dict(self) -> dict:
        return asdict(self)


def config_hash(payload: dict) -> str:
    """Short SHA-256 of the canonical JSON form of ``payload``."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class Problem:
    """Discretized solvation problem; the vacuum reference is solved once."""

    system: ChargeSystem
    config: SolvationConfig
    constants: PhysicalConstants
    model: DielectricModel
    grid: Grid
    Q: ScalarField
    boundary: ScalarField
    phi_vac: ScalarField
    G_0: float
    setup_time: float = 0.0

    def energy(self, phi: ScalarField) -> float:
        return electrostatic_solvation(phi, self.phi_vac, self.system, self.constants)

    def report(self, phi: ScalarField) -> EnergyReport:
        return EnergyReport.build(phi, self.phi_vac, self.system, self.model, self.constants,
                                  self.config.nonpolar_params())


def linear_potential(grid: Grid, Q: ScalarField, boundary: ScalarField, eps_halves, tol: float,
                     max_iters: int) -> ScalarField:
    A, b = assemble_from_halves(grid, eps_halves, Q, boundary.values)
    x, n = solve_linear(A, b, boundary.values.ravel(), grid, tol, max_iters)
    log.debug("linear solve: %d iterations", n)
    return ScalarField(grid, x.reshape(grid.dims))


def _uniform_halves(grid: Grid, eps: float):
    return [np.full(tuple(d - (a == i) for i, d in enumerate(grid.dims)), eps) for a in range(3)]


def build_problem(system: ChargeSystem, config: SolvationConfig) -> Problem:
    """Grid, source, solvent boundary data, and the vacuum potential (eps = 1 everywhere).

    The vacuum run is linear, so it is solved directly with the same 7-point
    operator and charge spreading rather than by pseudo-time stepping.
    """
    t0 = time.perf_counter()
    c = config.constants()
    grid = auto_grid(system, config.h, config.padding, config.grid_offset)
    check_inside(system, grid)
    Q = distribute_charges(system, grid, c)
    vac_bd = dirichlet_boundary(system, grid, 1.0, c)
    phi_vac = linear_potential(grid, Q, vac_bd, _uniform_halves(grid, 1.0), config.linear_tol,
                               config.linear_max_iters)
    boundary = dirichlet_boundary(system, grid, config.eps_s, c)
    G_0 = polar_energy(phi_vac, system, c)
    return Problem(system, config, c, config.model(c), grid, Q, boundary, phi_vac, G_0,
                   time.perf_counter() - t0)


def initial_state(problem: Problem, kind: Optional[str] = None) -> ScalarField:
    """Starting potential carrying the solvent Dirichlet data.

    * piecewise: linear solve with eps_m inside the atomic radii and eps_s outside
      (the first iterate of the BVP solver);
    * coulomb:   Coulomb superposition with eps_s at every node;
    * vacuum:    the vacuum potential.
    """
    kind = kind or problem.config.init
    g = problem.grid
    if kind == "piecewise":
        if problem.model.is_linear:
            halves = _uniform_halves(g, problem.model.eps_s)
        else:
            halves = piecewise_halves(problem.system, g, problem.model)
        phi = linear_potential(g, problem.Q, problem.boundary, halves, problem.config.linear_tol,
                               problem.config.linear_max_iters)
    elif kind == "coulomb":
        phi = coulomb_initial_guess(problem.system, g, problem.config.eps_s, problem.constants)
    elif kind == "vacuum":
        phi = problem.phi_vac.copy()
    else:
        raise ValueError(f"unknown initial state {kind!r}")
    mask = g.boundary_mask()
    phi.values[mask] = problem.boundary.values[mask]
    return phi


@dataclass
class SolvationRun:
    solver: str
    report: EnergyReport
    phi: ScalarField
    trace: list
    converged: bool
    iterations: int
    wall_time: float

    def summary(self) -> dict:
        out = {"solver": self.solver, "converged": self.converged, "iterations": self.iterations,
               "wall_time": self.wall_time}
        out.update(self.report.to_dict())
        return out


def run_adi(problem: Problem, on_monitor: Optional[Callable[[dict], None]] = None) -> SolvationRun:
    t0 = time.perf_counter()
    phi0 = initial_state(problem)
    res: SteadyStateResult = solve_steady(phi0, problem.Q, problem.model, problem.config.adi_config(),
                                          problem.energy, on_monitor)
    wall = time.perf_counter() - t0
    return SolvationRun("adi", problem.report(res.phi), res.phi, res.trace, res.converged, res.steps_taken, wall)


def run_bvp(problem: Problem, on_iteration: Optional[Callable[[dict], None]] = None) -> SolvationRun:
    t0 = time.perf_counter()
    res: BvpResult = solve_bvp(problem.system, problem.Q, problem.boundary, problem.model,
                               problem.config.bvp_config(), problem.energy, on_iteration=on_iteration)
    wall = time.perf_counter() - t0
    return SolvationRun("bvp", problem.report(res.phi), res.phi, res.energy_trace, res.converged,
                        res.iterations, wall)


def finite_report(run: SolvationRun) -> bool:
    return all(math.isfinite(v) for v in (run.report.dG_p, run.report.area, run.report.volume))
