"""Thomas algorithm for single and batched tridiagonal systems."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np


class SingularSystemError(ArithmeticError):
    """Zero pivot met during elimination."""


@dataclass
class TridiagonalSystem:
    lower: np.ndarray  # length n-1, A[i+1, i]
    diag: np.ndarray  # length n
    upper: np.ndarray  # length n-1, A[i, i+1]
    rhs: np.ndarray  # length n

    def __post_init__(self):
        self.lower, self.diag, self.upper, self.rhs = (
            np.ascontiguousarray(a, dtype=float) for a in (self.lower, self.diag, self.upper, self.rhs)
        )
        n = self.diag.shape[0]
        if n < 1:
            raise ValueError("empty system")
        if self.lower.shape != (n - 1,) or self.upper.shape != (n - 1,) or self.rhs.shape != (n,):
            raise ValueError("inconsistent tridiagonal coefficient lengths")

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[1:] += self.lower * x[:-1]
        y[:-1] += self.upper * x[1:]
        return y


@numba.njit(cache=True)
def _thomas(a, b, c, d):
    n = b.shape[0]
    cp = np.empty(n)
    x = np.empty(n)
    piv = b[0]
    if piv == 0.0:
        return x, 0
    cp[0] = c[0] / piv if n > 1 else 0.0
    x[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i - 1] * cp[i - 1]
        if piv == 0.0:
            return x, i
        if i < n - 1:
            cp[i] = c[i] / piv
        x[i] = (d[i] - a[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x, -1


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    upper = sys.upper if sys.upper.size else np.zeros(1)
    x, bad = _thomas(sys.lower, sys.diag, upper, sys.rhs)
    if bad >= 0:
        raise SingularSystemError(f"zero pivot at row {bad}")
    return x


@numba.njit(cache=True)
def _thomas_batch(a, b, c, d, work):
    # lines run along axis 0; columns are independent systems
    n, m = b.shape
    for col in range(m):
        piv = b[0, col]
        if piv == 0.0:
            return 0
        work[0, col] = c[0, col] / piv
        d[0, col] = d[0, col] / piv
    for i in range(1, n):
        for col in range(m):
            piv = b[i, col] - a[i, col] * work[i - 1, col]
            if piv == 0.0:
                return i
            work[i, col] = c[i, col] / piv
            d[i, col] = (d[i, col] - a[i, col] * d[i - 1, col]) / piv
    for i in range(n - 2, -1, -1):
        for col in range(m):
            d[i, col] -= work[i, col] * d[i + 1, col]
    return -1


def solve_tridiagonal_batch(lower, diag, upper, rhs) -> np.ndarray:
    """Solve many systems at once; every array is ``(n, m)``, one column per system.

    ``lower[0]`` and ``upper[-1]`` are ignored. The solution is returned as a new
    array; inputs are left untouched.
    """
    b = np.ascontiguousarray(diag, dtype=float)
    n = b.shape[0]
    m = int(np.prod(b.shape[1:])) if b.ndim > 1 else 1
    shape = b.shape
    b = b.reshape(n, m)
    a = np.ascontiguousarray(lower, dtype=float).reshape(n, m)
    c = np.ascontiguousarray(upper, dtype=float).reshape(n, m)
    d = np.array(rhs, dtype=float, order="C").reshape(n, m)
    work = np.empty((n, m))
    bad = _thomas_batch(a, b, c, d, work)
    if bad >= 0:
        raise SingularSystemError(f"zero pivot at row {bad}")
    return d.reshape(shape)
