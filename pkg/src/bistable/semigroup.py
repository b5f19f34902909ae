"""Bi-stable semigroups ``T_s(t)``, ``T_u(t)`` and their smoothing compositions.

``T_s(t)`` multiplies stable coordinates by ``exp(-t/alpha)`` for ``t >= 0``;
``T_u(t)`` does the same on unstable coordinates for ``t <= 0``.  Composing with
``|A|**-r`` gains ``|t|**-r`` and nothing better.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from .errors import DomainError, ModelError, ParameterError
from .spectral import SpectrumSpec, _check

Direction = Literal["stable", "unstable"]

# exp(-745) underflows to zero; such coordinates are below every tolerance in use
_EXP_FLOOR = -745.0


def _log_factor(spec: SpectrumSpec, t: float, r: float, direction: Direction) -> np.ndarray:
    """log of the per-mode multiplier ``|alpha|**-r exp(-t/alpha)``; ``-inf`` off-subspace."""
    a = spec.alphas
    if direction == "stable":
        if t < 0:
            raise ParameterError("stable semigroup needs t >= 0")
        on = a > 0
    elif direction == "unstable":
        if t > 0:
            raise ParameterError("unstable semigroup needs t <= 0")
        on = a < 0
    else:
        raise ParameterError(f"unknown direction {direction!r}")
    if r > 0 and t == 0:
        raise DomainError("|A|^-r T(0) is unbounded for r > 0")
    out = np.full(spec.n, -np.inf)
    aa = a[on]
    out[on] = -t / aa - r * np.log(np.abs(aa))
    return out


def multiplier(spec: SpectrumSpec, t: float, r: float = 0.0,
               direction: Direction = "stable") -> np.ndarray:
    """Diagonal of ``|A|**-r T(t)`` as a vector."""
    if r < 0:
        raise ParameterError("smoothing order r must be >= 0")
    lf = _log_factor(spec, float(t), float(r), direction)
    out = np.zeros(spec.n)
    keep = lf > _EXP_FLOOR
    out[keep] = np.exp(lf[keep])
    return out


def apply_semigroup(spec: SpectrumSpec, t: float, h, direction: Direction = "stable") -> np.ndarray:
    h = _check(spec, h)
    return multiplier(spec, t, 0.0, direction) * h


def apply_smoothing(spec: SpectrumSpec, t: float, h, r: float,
                    direction: Direction = "stable") -> np.ndarray:
    """Apply ``|A|**-r T_s(t)`` (or ``T_u``) with ``r > 0``."""
    if not r > 0:
        raise ParameterError("apply_smoothing needs r > 0")
    h = _check(spec, h)
    return multiplier(spec, t, r, direction) * h


def smoothing_constant(r: float) -> float:
    """``sup_{z>0} z**-r exp(-1/z) = r**r exp(-r)``, the constant in ``|A|^-r T_s(t)| <= C t^-r``."""
    if r < 0:
        raise ParameterError("r must be >= 0")
    if r == 0:
        return 1.0
    return math.exp(r * math.log(r) - r)


def homogeneous_solution(spec: SpectrumSpec, times, h_s=None, h_u=None,
                         t0: float = 0.0, t1: float = 0.0, r: float = 0.0) -> np.ndarray:
    """Rows ``|A|^-r (T_s(t-t0) h_s + T_u(t-t1) h_u)`` for every ``t`` in ``times``."""
    times = np.asarray(times, dtype=float)
    a = spec.alphas
    out = np.zeros((times.size, spec.n))
    for vec, origin, on in ((h_s, t0, a > 0), (h_u, t1, a < 0)):
        if vec is None:
            continue
        vec = _check(spec, vec)
        s = times[:, None] - origin
        aa = a[on][None, :]
        if np.any(s * np.sign(aa) < 0):
            raise ParameterError("time outside the semigroup's half-line")
        lf = -s / aa - r * np.log(np.abs(aa))
        with np.errstate(under="ignore"):
            m = np.where(lf > _EXP_FLOOR, np.exp(np.maximum(lf, _EXP_FLOOR)), 0.0)
        out[:, on] += m * vec[on]
    return out


def sup_smoothing_norm(spec: SpectrumSpec, t: float, r: float,
                       direction: Direction = "stable") -> float:
    """Operator norm of ``|A|^-r T(t)``: the largest diagonal entry."""
    on = spec.mask(direction)
    if not np.any(on):
        raise ModelError(f"empty {direction} spectrum")
    return float(np.max(multiplier(spec, t, r, direction)))


def sharp_bound_scan(spec: SpectrumSpec, r: float, t_grid) -> list[dict]:
    """Tabulate ``sup_|h|=1 ||A|^-r T_s(t) h|`` against ``C(r) t**-r``.

    Returns one row per ``t`` with keys ``t, sup_norm, predicted, ratio``;
    ``ratio`` is ``sup_norm / predicted`` and stays in ``(0, 1]`` for dense ladders.
    """
    if not np.any(spec.alphas > 0):
        raise ModelError("empty stable spectrum")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise ParameterError("t_grid must be positive")
    c = smoothing_constant(r)
    rows = []
    for t in t_grid:
        s = sup_smoothing_norm(spec, t, r) if r > 0 else float(np.max(multiplier(spec, t)))
        pred = c * t ** (-r)
        rows.append({"t": float(t), "sup_norm": s, "predicted": pred, "ratio": s / pred})
    return rows


def loglog_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
