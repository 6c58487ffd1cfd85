"""Field-dependent dielectric functions and their half-node discretizations."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grid3d import ScalarField


class StencilError(IndexError):
    """A finite-difference stencil would read outside the grid."""


class Variant(str, enum.Enum):
    RATIONAL = "rational"
    EXPONENTIAL = "exponential"
    SIMPLIFIED = "simplified"


class HalfNodeScheme(str, enum.Enum):
    # permittivity evaluated directly at the half node from half-node gradients
    EPS_I = "eps1"
    # arithmetic mean of the two nodal permittivities (central differences)
    EPS_II = "eps2"

    @classmethod
    def parse(cls, value) -> "HalfNodeScheme":
        if isinstance(value, cls):
            return value
        aliases = {"eps1": cls.EPS_I, "epsi": cls.EPS_I, "i": cls.EPS_I, "1": cls.EPS_I,
                   "eps2": cls.EPS_II, "epsii": cls.EPS_II, "ii": cls.EPS_II, "2": cls.EPS_II}
        try:
            return aliases[str(value).lower().replace("_", "")]
        except KeyError:
            raise ValueError(f"unknown half-node scheme {value!r}") from None


@dataclass(frozen=True)
class DielectricModel:
    """eps(g), g = |grad phi|^2, falling from ``eps_s`` at g=0 towards ``eps_m``.

    * rational:    eps_m + (eps_s - eps_m) / (1 + alpha * g / grad_scale)**p
    * exponential: eps_m + (eps_s - eps_m) * exp(-g / grad_scale)
    * simplified:  eps_m + (eps_s - eps_m) / (1 + alpha * g)

    A model with ``eps_m == eps_s`` is accepted and is simply constant; it is
    how the linear and vacuum reference problems are expressed.
    """

    variant: Variant = Variant.RATIONAL
    eps_m: float = 1.0
    eps_s: float = 80.0
    alpha: float = 1.0
    p: int = 1
    grad_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not 0 < self.eps_m <= self.eps_s:
            raise ValueError(f"need 0 < eps_m <= eps_s, got {self.eps_m}, {self.eps_s}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not self.grad_scale > 0:
            raise ValueError("grad_scale must be positive")
        if self.variant is Variant.RATIONAL and self.p not in (1, 2):
            raise ValueError("rational model exponent p must be 1 or 2")

    @classmethod
    def rational(cls, eps_m=1.0, eps_s=80.0, alpha=1.0, p=1, grad_scale=1.0):
        return cls(Variant.RATIONAL, eps_m, eps_s, alpha, p, grad_scale)

    @classmethod
    def exponential(cls, eps_m=1.0, eps_s=80.0, grad_scale=1.0):
        return cls(Variant.EXPONENTIAL, eps_m, eps_s, 0.0, 1, grad_scale)

    @classmethod
    def simplified(cls, eps_m=1.0, eps_s=80.0, alpha=0.1):
        return cls(Variant.SIMPLIFIED, eps_m, eps_s, alpha, 1, 1.0)

    @classmethod
    def constant(cls, eps: float):
        return cls(Variant.RATIONAL, eps, eps, 0.0, 1, 1.0)

    @property
    def is_linear(self) -> bool:
        return self.eps_m == self.eps_s or (self.variant is not Variant.EXPONENTIAL and self.alpha == 0)

    def __call__(self, grad_sq):
        """Vectorized evaluation without argument checks (hot path)."""
        g = np.asarray(grad_sq, dtype=float)
        jump = self.eps_s - self.eps_m
        if self.variant is Variant.RATIONAL:
            return self.eps_m + jump / (1.0 + self.alpha * g / self.grad_scale) ** self.p
        if self.variant is Variant.EXPONENTIAL:
            return self.eps_m + jump * np.exp(-g / self.grad_scale)
        return self.eps_m + jump / (1.0 + self.alpha * g)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "eps_m": self.eps_m,
            "eps_s": self.eps_s,
            "alpha": self.alpha,
            "p": self.p,
            "grad_scale": self.grad_scale,
        }


def eval_epsilon(model: DielectricModel, grad_sq):
    g = np.asarray(grad_sq, dtype=float)
    if not np.isfinite(g).all() or (g < 0).any():
        raise ValueError("squared gradient must be finite and non-negative")
    out = model(g)
    return float(out) if out.ndim == 0 else out


# -- whole-field evaluation ---------------------------------------------------


def nodal_gradient(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Central differences inside, second-order one-sided on the boundary."""
    return tuple(np.gradient(values, h, axis=a, edge_order=2) for a in range(3))


def nodal_grad_sq(values: np.ndarray, h: float) -> np.ndarray:
    gx, gy, gz = nodal_gradient(values, h)
    return gx * gx + gy * gy + gz * gz


def nodal_epsilon(values: np.ndarray, h: float, model: DielectricModel) -> np.ndarray:
    return model(nodal_grad_sq(values, h))


def _mid(a: np.ndarray, axis: int) -> np.ndarray:
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return 0.5 * (a[tuple(lo)] + a[tuple(hi)])


def half_node_epsilons(values: np.ndarray, h: float, model: DielectricModel, scheme) -> list[np.ndarray]:
    """Permittivity on the half nodes of all three axes.

    Entry ``axis`` has the grid shape with one fewer node along ``axis``;
    element ``[i, j, k]`` of the x array belongs to ``(i + 1/2, j, k)``.

    For rows whose transverse neighbours are all inside the grid the eps_I
    transverse derivative is the four-point average of central differences;
    rows on the transverse boundary fall back to one-sided differences and are
    never read by interior stencils.
    """
    scheme = HalfNodeScheme.parse(scheme)
    if model.is_linear:
        return [np.full(_half_shape(values.shape, a), model.eps_s) for a in range(3)]
    grads = nodal_gradient(values, h)
    if scheme is HalfNodeScheme.EPS_II:
        eps = model(grads[0] ** 2 + grads[1] ** 2 + grads[2] ** 2)
        return [_mid(eps, a) for a in range(3)]
    out = []
    for axis in range(3):
        g = (np.diff(values, axis=axis) / h) ** 2
        for other in range(3):
            if other != axis:
                g = g + _mid(grads[other], axis) ** 2
        out.append(model(g))
    return out


def _half_shape(shape, axis):
    s = list(shape)
    s[axis] -= 1
    return tuple(s)


# -- single half-node evaluation (reference stencils) ---------------------------


def _shift(idx, axis, d):
    out = list(idx)
    out[axis] += d
    return tuple(out)


def _require(phi: ScalarField, idx):
    for v, n in zip(idx, phi.grid.dims):
        if not 0 <= v < n:
            raise StencilError(f"stencil node {idx} outside grid {phi.grid.dims}")


def half_node_eps_I(phi: ScalarField, model: DielectricModel, axis: int, i: int, j: int, k: int) -> float:
    """eps at the half node between (i,j,k) and its +1 neighbour along ``axis``."""
    v, h = phi.values, phi.grid.h
    p0 = (i, j, k)
    p1 = _shift(p0, axis, 1)
    _require(phi, p1)
    _require(phi, p0)
    g = ((v[p1] - v[p0]) / h) ** 2
    for other in range(3):
        if other == axis:
            continue
        pts = [_shift(p0, other, 1), _shift(p0, other, -1), _shift(p1, other, 1), _shift(p1, other, -1)]
        for q in pts:
            _require(phi, q)
        d = (v[pts[0]] - v[pts[1]]) / (4 * h) + (v[pts[2]] - v[pts[3]]) / (4 * h)
        g += d * d
    return float(model(g))


def _central_grad_sq(phi: ScalarField, idx) -> float:
    v, h = phi.values, phi.grid.h
    g = 0.0
    for axis in range(3):
        a, b = _shift(idx, axis, 1), _shift(idx, axis, -1)
        _require(phi, a)
        _require(phi, b)
        g += ((v[a] - v[b]) / (2 * h)) ** 2
    return g


def half_node_eps_II(phi: ScalarField, model: DielectricModel, axis: int, i: int, j: int, k: int) -> float:
    p0 = (i, j, k)
    p1 = _shift(p0, axis, 1)
    return 0.5 * float(model(_central_grad_sq(phi, p0)) + model(_central_grad_sq(phi, p1)))
