"""Baseline boundary-value solver: alternate a frozen-eps linear solve and an eps update.

Each outer iteration assembles the 7-point system with the permittivity taken
from the previous potential, solves it with BiCGSTAB, and stops once two
successive electrostatic solvation energies agree to ``energy_tol``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .charges import ChargeSystem
from .dielectric import DielectricModel, HalfNodeScheme, half_node_epsilons
from .grid3d import Grid, ScalarField

log = logging.getLogger(__name__)


class InnerSolverError(RuntimeError):
    def __init__(self, outer: int, residual: float, iters: int):
        super().__init__(f"inner solve of outer iteration {outer} stalled after {iters} iterations "
                         f"(relative residual {residual:.3e})")
        self.residual = residual


@dataclass
class BvpConfig:
    energy_tol: float = 0.01
    max_outer_iters: int = 100
    inner_solver_tol: float = 1e-10
    inner_max_iters: int = 20000
    scheme: HalfNodeScheme = HalfNodeScheme.EPS_II

    def __post_init__(self):
        self.scheme = HalfNodeScheme.parse(self.scheme)
        if min(self.energy_tol, self.max_outer_iters, self.inner_solver_tol, self.inner_max_iters) <= 0:
            raise ValueError("BVP settings must be positive")

    def to_dict(self) -> dict:
        return {"energy_tol": self.energy_tol, "max_outer_iters": self.max_outer_iters,
                "inner_solver_tol": self.inner_solver_tol, "inner_max_iters": self.inner_max_iters,
                "scheme": self.scheme.value}


@dataclass
class BvpResult:
    phi: ScalarField
    iterations: int
    energy_trace: list
    converged: bool
    wall_time: float
    inner_iterations: list = field(default_factory=list)


def _node_ids(dims):
    return np.arange(int(np.prod(dims))).reshape(dims)


def assemble_from_halves(grid: Grid, eps_halves, Q: ScalarField, boundary: np.ndarray):
    """Sparse matrix and rhs over all nodes.

    Interior row p: sum_nb eps_half (phi_nb - phi_p) = -Q_p h^2. Boundary rows
    are identity rows carrying the Dirichlet value.
    """
    ids = _node_ids(grid.dims)
    h2 = grid.h**2
    inner = (slice(1, -1),) * 3
    centre = ids[inner].ravel()
    rows, cols, vals = [], [], []
    diag = np.zeros(centre.shape)
    for axis in range(3):
        e = eps_halves[axis]
        lo = [slice(1, -1)] * 3
        hi = [slice(1, -1)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        e_int = np.moveaxis(e[tuple(slice(1, -1) if a != axis else slice(None) for a in range(3))], axis, 0)
        e_minus = np.moveaxis(e_int[:-1], 0, axis).ravel()
        e_plus = np.moveaxis(e_int[1:], 0, axis).ravel()
        for shift, w in ((-1, e_minus), (1, e_plus)):
            nb = [slice(1, -1)] * 3
            nb[axis] = slice(1 + shift, grid.dims[axis] - 1 + shift)
            rows.append(centre)
            cols.append(ids[tuple(nb)].ravel())
            vals.append(w)
            diag -= w
    rows.append(centre)
    cols.append(centre)
    vals.append(diag)
    bnodes = ids[grid.boundary_mask()]
    rows.append(bnodes)
    cols.append(bnodes)
    vals.append(np.ones(bnodes.shape))
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(grid.size, grid.size))
    b = np.zeros(grid.size)
    b[centre] = -Q.values[inner].ravel() * h2
    b[bnodes] = boundary[grid.boundary_mask()]
    return A, b


def assemble_bvp(phi_current: ScalarField, Q: ScalarField, model: DielectricModel, scheme="eps2"):
    """7-point system with eps frozen at ``phi_current``; its boundary values are the Dirichlet data."""
    eps = half_node_epsilons(phi_current.values, phi_current.grid.h, model, scheme)
    return assemble_from_halves(phi_current.grid, eps, Q, phi_current.values)


def piecewise_halves(system: ChargeSystem, grid: Grid, model: DielectricModel):
    """eps_m on nodes inside any atomic radius, eps_s elsewhere, averaged to half nodes."""
    X, Y, Z = grid.mesh()
    inside = np.zeros(grid.dims, dtype=bool)
    for (x, y, z), r in zip(system.positions, system.radii):
        inside |= (X - x) ** 2 + (Y - y) ** 2 + (Z - z) ** 2 <= r * r
    nodal = np.where(inside, model.eps_m, model.eps_s)
    out = []
    for axis in range(3):
        a = [slice(None)] * 3
        b = [slice(None)] * 3
        a[axis] = slice(None, -1)
        b[axis] = slice(1, None)
        out.append(0.5 * (nodal[tuple(a)] + nodal[tuple(b)]))
    return out


def solve_linear(A, b, x0, grid: Grid, tol: float, maxiter: int, outer: int = 0):
    """BiCGSTAB on the interior block (boundary rows eliminated), Jacobi preconditioned.

    Returns the full solution vector and the iteration count. ``tol`` bounds the
    relative residual ||b - A x|| / ||b|| of the full system.
    """
    interior = ~grid.boundary_mask().ravel()
    bidx = np.nonzero(~interior)[0]
    iidx = np.nonzero(interior)[0]
    A = A.tocsr()
    x = x0.copy()
    x[bidx] = b[bidx]
    A_ii = A[iidx][:, iidx]
    rhs = b[iidx] - A[iidx][:, bidx] @ x[bidx]
    d = A_ii.diagonal()
    M = spla.LinearOperator(A_ii.shape, matvec=lambda v: v / d)
    count = [0]

    def cb(_):
        count[0] += 1

    bnorm = float(np.linalg.norm(b)) or 1.0
    # absolute target in terms of the interior residual
    atol = tol * bnorm
    sol, info = spla.bicgstab(A_ii, rhs, x0=x[iidx], rtol=0.0, atol=atol, maxiter=maxiter, M=M, callback=cb)
    x[iidx] = sol
    res = float(np.linalg.norm(b - A @ x)) / bnorm
    if info != 0 or not math.isfinite(res) or res > tol * 10:
        raise InnerSolverError(outer, res, count[0])
    return x, count[0]


def solve_bvp(system: ChargeSystem, Q: ScalarField, boundary: ScalarField, model: DielectricModel,
              config: BvpConfig, energy: Callable[[ScalarField], float],
              phi_init: Optional[ScalarField] = None,
              on_iteration: Optional[Callable[[dict], None]] = None) -> BvpResult:
    """Alternating eps / phi iteration from a piecewise dielectric start.

    ``energy`` maps a potential to the monitored solvation energy (kcal/mol).
    """
    t0 = time.perf_counter()
    grid = Q.grid
    x = (phi_init.values if phi_init is not None else boundary.values).ravel().copy()
    halves = piecewise_halves(system, grid, model)
    trace, inner_counts = [], []
    prev = None
    converged = False
    phi = None
    it = 0
    for it in range(1, config.max_outer_iters + 1):
        A, b = assemble_from_halves(grid, halves, Q, boundary.values)
        x, n_inner = solve_linear(A, b, x, grid, config.inner_solver_tol, config.inner_max_iters, it)
        inner_counts.append(n_inner)
        phi = ScalarField(grid, x.reshape(grid.dims).copy())
        cur = energy(phi)
        delta = math.inf if prev is None else abs(cur - prev)
        row = {"iteration": it, "energy": cur, "delta": delta, "inner_iterations": n_inner}
        trace.append(row)
        if on_iteration:
            on_iteration(row)
        log.debug("bvp outer %d energy %.6f delta %.3e (%d inner)", it, cur, delta, n_inner)
        if model.is_linear:
            converged = True
            break
        if delta < config.energy_tol:
            converged = True
            break
        prev = cur
        halves = half_node_epsilons(phi.values, grid.h, model, config.scheme)
    return BvpResult(phi, it, trace, converged, time.perf_counter() - t0, inner_counts)
