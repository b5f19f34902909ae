"""Compiled sweeps for exponential-kernel convolution of piecewise-linear data.

For one mode with eigenvalue ``alpha`` and a cell of width ``h`` put
``z = h/|alpha|``, ``E = exp(-z)`` and ``phi = (1 - E)/z``.  Integrating the
kernel ``|alpha|^-1 exp(-s/|alpha|)`` against the linear interpolant of the
cell values gives weight ``1 - phi`` on the near endpoint and ``phi - E`` on
the far one, so each sweep is exact for piecewise-linear forcing.
"""

import math

import numpy as np
from numba import njit

# below this z the closed forms lose digits to cancellation; use the series
_Z_SERIES = 1e-3


@njit(cache=True)
def _weights(z):
    if z < _Z_SERIES:
        z2 = z * z
        far = z / 2.0 - z2 / 3.0 + z2 * z / 8.0 - z2 * z2 / 30.0
        near = z / 2.0 - z2 / 6.0 + z2 * z / 24.0 - z2 * z2 / 120.0
        return math.exp(-z), far, near
    e = math.exp(-z)
    phi = -math.expm1(-z) / z
    return e, phi - e, 1.0 - phi


@njit(cache=True)
def forward_sweep(times, alphas, f):
    """Stable modes: ``y(t) = int_{t0}^t alpha^-1 exp(-(t-s)/alpha) f(s) ds``."""
    m_pts, n = f.shape
    y = np.zeros((m_pts, n))
    for j in range(n):
        a = alphas[j]
        acc = 0.0
        for m in range(m_pts - 1):
            e, far, near = _weights((times[m + 1] - times[m]) / a)
            acc = e * acc + far * f[m, j] + near * f[m + 1, j]
            y[m + 1, j] = acc
    return y


@njit(cache=True)
def backward_sweep(times, alphas, f):
    """Unstable modes: ``y(t) = int_t^{T} |alpha|^-1 exp(-(s-t)/|alpha|) f(s) ds``."""
    m_pts, n = f.shape
    y = np.zeros((m_pts, n))
    for j in range(n):
        b = -alphas[j]
        acc = 0.0
        for m in range(m_pts - 2, -1, -1):
            e, far, near = _weights((times[m + 1] - times[m]) / b)
            acc = e * acc + near * f[m, j] + far * f[m + 1, j]
            y[m, j] = acc
    return y
