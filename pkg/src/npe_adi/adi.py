"""Douglas-Rachford ADI integration of phi_t = div(eps(|grad phi|^2) grad phi) + Q."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .dielectric import (
    DielectricModel,
    HalfNodeScheme,
    StencilError,
    half_node_eps_I,
    half_node_eps_II,
    half_node_epsilons,
)
from .grid3d import ScalarField
from .tridiag import SingularSystemError, solve_tridiagonal_batch

log = logging.getLogger(__name__)


class BlowUpError(FloatingPointError):
    def __init__(self, step: int, max_abs: float):
        super().__init__(f"ADI iterate blew up at step {step} (max |phi| = {max_abs:.3e})")
        self.step = step
        self.max_abs = max_abs


@dataclass
class SolverConfig:
    dt: float = 0.1
    t_final: Optional[float] = 5.0
    max_steps: Optional[int] = None
    energy_tol: float = 1.0
    scheme: HalfNodeScheme = HalfNodeScheme.EPS_I
    monitor_every: int = 1
    # stop as soon as the monitor drops below energy_tol; otherwise run to t_final
    stop_when_converged: bool = True

    def __post_init__(self):
        self.scheme = HalfNodeScheme.parse(self.scheme)
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if (self.t_final is None) == (self.max_steps is None):
            raise ValueError("exactly one of t_final / max_steps must be given")
        if not self.energy_tol > 0:
            raise ValueError("energy_tol must be positive")
        if self.monitor_every < 1:
            raise ValueError("monitor_every must be >= 1")

    @property
    def n_steps(self) -> int:
        if self.max_steps is not None:
            return int(self.max_steps)
        return int(math.ceil(self.t_final / self.dt - 1e-9))

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_final": self.t_final,
            "max_steps": self.max_steps,
            "energy_tol": self.energy_tol,
            "scheme": self.scheme.value,
            "monitor_every": self.monitor_every,
            "stop_when_converged": self.stop_when_converged,
        }


@dataclass
class SteadyStateResult:
    phi: ScalarField
    steps_taken: int
    final_energy_delta: float
    converged: bool
    wall_time: float
    pseudo_time: float = 0.0
    trace: list = field(default_factory=list, repr=False)


# -- stencil operators -----------------------------------------------------------


def _front(a: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(a, axis, 0)


def flux_divergence(values: np.ndarray, eps_half: np.ndarray, h: float, axis: int) -> np.ndarray:
    """delta_axis^2 phi on the interior nodes, shape ``(nx-2, ny-2, nz-2)``."""
    v = _front(values, axis)[:, 1:-1, 1:-1]
    e = _front(eps_half, axis)[:, 1:-1, 1:-1]
    flux = e * (v[1:] - v[:-1])
    return np.moveaxis((flux[1:] - flux[:-1]) / (h * h), 0, axis)


def apply_delta_sq(phi: ScalarField, model: DielectricModel, scheme, axis: int, i: int, j: int, k: int) -> float:
    """Single-node delta_axis^2 phi using the reference half-node stencils."""
    if phi.grid.is_boundary(i, j, k):
        raise StencilError(f"node {(i, j, k)} is on the boundary")
    scheme = HalfNodeScheme.parse(scheme)
    half = half_node_eps_I if scheme is HalfNodeScheme.EPS_I else half_node_eps_II
    idx = [i, j, k]
    lo = list(idx)
    lo[axis] -= 1
    hi = list(idx)
    hi[axis] += 1
    e_plus = half(phi, model, axis, *idx)
    e_minus = half(phi, model, axis, *lo)
    v = phi.values
    c = v[tuple(idx)]
    return (e_plus * (v[tuple(hi)] - c) + e_minus * (v[tuple(lo)] - c)) / phi.grid.h**2


def _implicit_sweep(rhs: np.ndarray, stage: np.ndarray, eps_half: np.ndarray, h: float, dt: float, axis: int):
    """Solve (1 - dt delta_axis^2) x = rhs on every interior line, writing into ``stage``.

    ``stage`` carries the Dirichlet values on its boundary.
    """
    r = dt / (h * h)
    if axis == 2:
        bad = _kernels.sweep_last(rhs, eps_half, stage, r, np.empty(stage.shape[2]))
    else:
        order = (0, 1, 2) if axis == 0 else (1, 0, 2)
        s = stage.transpose(order)
        bad = _kernels.sweep_first(rhs.transpose(order), eps_half.transpose(order), s, r, np.empty(s.shape))
    if bad >= 0:
        raise SingularSystemError(f"zero pivot in axis-{axis} sweep at row {bad}")


def _implicit_sweep_reference(rhs, stage, eps_half, h, dt, axis):
    """Same as :func:`_implicit_sweep` through the generic batched Thomas solver."""
    r = dt / (h * h)
    e = _front(eps_half, axis)[:, 1:-1, 1:-1]
    wm, wp = e[:-1], e[1:]
    s = _front(stage, axis)
    d = _front(rhs, axis).copy()
    d[0] += r * wm[0] * s[0, 1:-1, 1:-1]
    d[-1] += r * wp[-1] * s[-1, 1:-1, 1:-1]
    s[1:-1, 1:-1, 1:-1] = solve_tridiagonal_batch(-r * wm, 1.0 + r * (wm + wp), -r * wp, d)


def stage_epsilons(values: np.ndarray, h: float, model: DielectricModel, scheme) -> list[np.ndarray]:
    """Half-node permittivities frozen at the current iterate (compiled path)."""
    return _kernels.half_node_epsilons(values, h, model, HalfNodeScheme.parse(scheme) is HalfNodeScheme.EPS_II)


def douglas_rachford(values, q_int, eps_halves, h, dt, boundary=None):
    """One Douglas-Rachford step on raw arrays; returns the new full array.

    ``q_int`` is the source on interior nodes (or a scalar). ``boundary``, if
    given, is a full array whose boundary entries are the Dirichlet data for the
    new time level and all intermediate stages; otherwise ``values`` supplies it.
    """
    inner = (slice(1, -1),) * 3
    ishape = tuple(n - 2 for n in values.shape)
    dx2, dy2, dz2 = np.empty(ishape), np.empty(ishape), np.empty(ishape)
    _kernels.flux_divergences(values, *eps_halves, h, dx2, dy2, dz2)
    bsrc = values if boundary is None else boundary

    star = bsrc.copy()
    dy2 *= dt
    dz2 *= dt
    rhs = values[inner] + dy2 + dz2 + dt * q_int
    _implicit_sweep(rhs, star, eps_halves[0], h, dt, 0)
    star2 = bsrc.copy()
    np.subtract(star[inner], dy2, out=rhs)
    _implicit_sweep(rhs, star2, eps_halves[1], h, dt, 1)
    new = bsrc.copy()
    np.subtract(star2[inner], dz2, out=rhs)
    _implicit_sweep(rhs, new, eps_halves[2], h, dt, 2)
    return new


def adi_step(phi_n: ScalarField, Q: ScalarField, model: DielectricModel, config: SolverConfig,
             boundary: Optional[np.ndarray] = None, dt: Optional[float] = None, step: int = 0) -> ScalarField:
    if not phi_n.grid.same_as(Q.grid):
        raise ValueError("phi and Q live on different grids")
    h = phi_n.grid.h
    eps = stage_epsilons(phi_n.values, h, model, config.scheme)
    new = douglas_rachford(phi_n.values, Q.values[1:-1, 1:-1, 1:-1], eps, h, config.dt if dt is None else dt,
                           boundary)
    if not np.isfinite(new).all():
        finite = np.abs(new[np.isfinite(new)])
        raise BlowUpError(step, float(finite.max()) if finite.size else math.inf)
    return ScalarField(phi_n.grid, new)


def solve_steady(phi_0: ScalarField, Q: ScalarField, model: DielectricModel, config: SolverConfig,
                 energy_probe: Optional[Callable[[ScalarField], float]] = None,
                 on_monitor: Optional[Callable[[dict], None]] = None) -> SteadyStateResult:
    """Step to steady state.

    With an ``energy_probe`` the monitor is the change of the probed energy
    between checks; without one it is the max-norm change of the field.
    """
    t0 = time.perf_counter()
    phi = phi_0.copy()
    trace = []
    last = energy_probe(phi) if energy_probe else phi.values.copy()
    trace.append({"step": 0, "t": 0.0, "energy": last if energy_probe else None,
                  "delta": None, "max_abs_phi": float(np.abs(phi.values).max())})
    delta = math.inf
    converged = False
    steps = 0
    for steps in range(1, config.n_steps + 1):
        phi = adi_step(phi, Q, model, config, step=steps)
        if steps % config.monitor_every and steps != config.n_steps:
            continue
        if energy_probe:
            cur = energy_probe(phi)
            delta = abs(cur - last)
        else:
            cur = phi.values.copy()
            delta = float(np.abs(cur - last).max())
        last = cur
        row = {"step": steps, "t": steps * config.dt, "energy": cur if energy_probe else None,
               "delta": delta, "max_abs_phi": float(np.abs(phi.values).max())}
        trace.append(row)
        if on_monitor:
            on_monitor(row)
        log.debug("step %d t=%.4g delta=%.3e", steps, steps * config.dt, delta)
        if delta < config.energy_tol:
            converged = True
            if config.stop_when_converged:
                break
        else:
            converged = False
    return SteadyStateResult(phi, steps, float(delta), converged, time.perf_counter() - t0,
                             steps * config.dt, trace)
