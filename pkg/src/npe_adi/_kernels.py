"""Compiled stencil kernels for the ADI stepper.

Each kernel has a plain-numpy counterpart (``dielectric.half_node_epsilons``,
``adi.flux_divergence``, ``adi._implicit_sweep_reference``) that the tests
compare against.
"""

import numba
import numpy as np

RATIONAL, EXPONENTIAL, SIMPLIFIED = 0, 1, 2
_VARIANT_CODES = {"rational": RATIONAL, "exponential": EXPONENTIAL, "simplified": SIMPLIFIED}


def model_params(model):
    return (_VARIANT_CODES[model.variant.value], float(model.eps_m), float(model.eps_s),
            float(model.alpha), int(model.p), float(model.grad_scale))


@numba.njit(inline="always")
def _eps(g, variant, eps_m, eps_s, alpha, p, scale):
    if variant == RATIONAL:
        den = 1.0 + alpha * g / scale
        if p == 2:
            den = den * den
        return eps_m + (eps_s - eps_m) / den
    if variant == EXPONENTIAL:
        return eps_m + (eps_s - eps_m) * np.exp(-g / scale)
    return eps_m + (eps_s - eps_m) / (1.0 + alpha * g)


@numba.njit(cache=True)
def _d_axis0(v, h, out):
    n, m1, m2 = v.shape
    c = 0.5 / h
    for j in range(m1):
        for k in range(m2):
            out[0, j, k] = c * (-3.0 * v[0, j, k] + 4.0 * v[1, j, k] - v[2, j, k])
            out[n - 1, j, k] = c * (3.0 * v[n - 1, j, k] - 4.0 * v[n - 2, j, k] + v[n - 3, j, k])
    for i in range(1, n - 1):
        for j in range(m1):
            for k in range(m2):
                out[i, j, k] = c * (v[i + 1, j, k] - v[i - 1, j, k])


@numba.njit(cache=True)
def _d_axis2(v, h, out):
    m1, m2, n = v.shape
    c = 0.5 / h
    for i in range(m1):
        for j in range(m2):
            out[i, j, 0] = c * (-3.0 * v[i, j, 0] + 4.0 * v[i, j, 1] - v[i, j, 2])
            out[i, j, n - 1] = c * (3.0 * v[i, j, n - 1] - 4.0 * v[i, j, n - 2] + v[i, j, n - 3])
            for k in range(1, n - 1):
                out[i, j, k] = c * (v[i, j, k + 1] - v[i, j, k - 1])


def nodal_gradient(v, h):
    """Same result as ``np.gradient(v, h, axis=a, edge_order=2)`` for a = 0, 1, 2."""
    gx, gy, gz = np.empty_like(v), np.empty_like(v), np.empty_like(v)
    _d_axis0(v, h, gx)
    _d_axis0(v.transpose(1, 0, 2), h, gy.transpose(1, 0, 2))
    _d_axis2(v, h, gz)
    return [gx, gy, gz]


@numba.njit(cache=True)
def _eps_halves(v, gx, gy, gz, h, scheme_ii, variant, eps_m, eps_s, alpha, p, scale, ex, ey, ez):
    nx, ny, nz = v.shape
    if scheme_ii:
        nod = np.empty_like(v)
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    g = gx[i, j, k] ** 2 + gy[i, j, k] ** 2 + gz[i, j, k] ** 2
                    nod[i, j, k] = _eps(g, variant, eps_m, eps_s, alpha, p, scale)
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    if i < nx - 1:
                        ex[i, j, k] = 0.5 * (nod[i, j, k] + nod[i + 1, j, k])
                    if j < ny - 1:
                        ey[i, j, k] = 0.5 * (nod[i, j, k] + nod[i, j + 1, k])
                    if k < nz - 1:
                        ez[i, j, k] = 0.5 * (nod[i, j, k] + nod[i, j, k + 1])
        return
    inv_h = 1.0 / h
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if i < nx - 1:
                    a = (v[i + 1, j, k] - v[i, j, k]) * inv_h
                    b = 0.5 * (gy[i, j, k] + gy[i + 1, j, k])
                    c = 0.5 * (gz[i, j, k] + gz[i + 1, j, k])
                    ex[i, j, k] = _eps(a * a + b * b + c * c, variant, eps_m, eps_s, alpha, p, scale)
                if j < ny - 1:
                    a = (v[i, j + 1, k] - v[i, j, k]) * inv_h
                    b = 0.5 * (gx[i, j, k] + gx[i, j + 1, k])
                    c = 0.5 * (gz[i, j, k] + gz[i, j + 1, k])
                    ey[i, j, k] = _eps(a * a + b * b + c * c, variant, eps_m, eps_s, alpha, p, scale)
                if k < nz - 1:
                    a = (v[i, j, k + 1] - v[i, j, k]) * inv_h
                    b = 0.5 * (gx[i, j, k] + gx[i, j, k + 1])
                    c = 0.5 * (gy[i, j, k] + gy[i, j, k + 1])
                    ez[i, j, k] = _eps(a * a + b * b + c * c, variant, eps_m, eps_s, alpha, p, scale)


def half_node_epsilons(v, h, model, scheme_ii: bool):
    nx, ny, nz = v.shape
    ex = np.empty((nx - 1, ny, nz))
    ey = np.empty((nx, ny - 1, nz))
    ez = np.empty((nx, ny, nz - 1))
    if model.is_linear:
        for e in (ex, ey, ez):
            e.fill(model.eps_s)
        return [ex, ey, ez]
    gx, gy, gz = nodal_gradient(v, h)
    _eps_halves(v, gx, gy, gz, h, scheme_ii, *model_params(model), ex, ey, ez)
    return [ex, ey, ez]


@numba.njit(cache=True)
def flux_divergences(v, ex, ey, ez, h, dx2, dy2, dz2):
    nx, ny, nz = v.shape
    r = 1.0 / (h * h)
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            for k in range(1, nz - 1):
                c = v[i, j, k]
                dx2[i - 1, j - 1, k - 1] = r * (ex[i, j, k] * (v[i + 1, j, k] - c) + ex[i - 1, j, k] * (v[i - 1, j, k] - c))
                dy2[i - 1, j - 1, k - 1] = r * (ey[i, j, k] * (v[i, j + 1, k] - c) + ey[i, j - 1, k] * (v[i, j - 1, k] - c))
                dz2[i - 1, j - 1, k - 1] = r * (ez[i, j, k] * (v[i, j, k + 1] - c) + ez[i, j, k - 1] * (v[i, j, k - 1] - c))


@numba.njit(cache=True)
def sweep_first(d, e, s, r, cp):
    """Thomas solves along axis 0 of the (possibly transposed) views.

    d: rhs on interior nodes (n-2, m1-2, m2-2); e: half-node eps (n-1, m1, m2);
    s: full stage array (n, m1, m2) holding Dirichlet values on its boundary,
    interior overwritten with the solution; cp: scratch like s.
    """
    n, m1, m2 = s.shape
    for i in range(1, n - 1):
        for j in range(1, m1 - 1):
            for k in range(1, m2 - 1):
                wm = e[i - 1, j, k]
                wp = e[i, j, k]
                a = -r * wm
                rhs = d[i - 1, j - 1, k - 1]
                if i == 1:
                    rhs += r * wm * s[0, j, k]
                    piv = 1.0 + r * (wm + wp)
                else:
                    piv = 1.0 + r * (wm + wp) - a * cp[i - 1, j, k]
                    rhs -= a * s[i - 1, j, k]
                if i == n - 2:
                    rhs += r * wp * s[n - 1, j, k]
                if piv == 0.0:
                    return i
                cp[i, j, k] = -r * wp / piv
                s[i, j, k] = rhs / piv
    for i in range(n - 3, 0, -1):
        for j in range(1, m1 - 1):
            for k in range(1, m2 - 1):
                s[i, j, k] -= cp[i, j, k] * s[i + 1, j, k]
    return -1


@numba.njit(cache=True)
def sweep_last(d, e, s, r, cp):
    """Thomas solves along the contiguous last axis, one line at a time."""
    m1, m2, n = s.shape
    for i in range(1, m1 - 1):
        for j in range(1, m2 - 1):
            for k in range(1, n - 1):
                wm = e[i, j, k - 1]
                wp = e[i, j, k]
                a = -r * wm
                rhs = d[i - 1, j - 1, k - 1]
                if k == 1:
                    rhs += r * wm * s[i, j, 0]
                    piv = 1.0 + r * (wm + wp)
                else:
                    piv = 1.0 + r * (wm + wp) - a * cp[k - 1]
                    rhs -= a * s[i, j, k - 1]
                if k == n - 2:
                    rhs += r * wp * s[i, j, n - 1]
                if piv == 0.0:
                    return k
                cp[k] = -r * wp / piv
                s[i, j, k] = rhs / piv
            for k in range(n - 3, 0, -1):
                s[i, j, k] -= cp[k] * s[i, j, k + 1]
    return -1
