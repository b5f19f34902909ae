"""Time-sampled H-valued functions with a piecewise-linear interpretation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class Trajectory:
    """Samples ``values[m]`` of a function at strictly increasing ``times[m]``.

    Between grid points the function is the linear interpolant; outside
    ``[times[0], times[-1]]`` it is zero unless a caller says otherwise.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float).ravel()
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != t.size:
            raise DimensionError("values must have one row per time")
        if t.size < 2:
            raise ParameterError("trajectory needs at least two grid points")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("time grid must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        h = self.steps
        return bool(np.all(np.abs(h - h[0]) <= rtol * h[0]))

    def __call__(self, t) -> np.ndarray:
        """Linear interpolation; zero outside the grid span."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, self.n))
        for j in range(self.n):
            out[:, j] = np.interp(t, self.times, self.values[:, j], left=0.0, right=0.0)
        return out

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def sup_norm(self) -> float:
        return float(np.max(self.norms()))

    def l2_norm(self, ta: float | None = None, tb: float | None = None) -> float:
        return float(np.sqrt(self.l2_sq(ta, tb)))

    def l2_sq(self, ta: float | None = None, tb: float | None = None) -> float:
        x = self if ta is None and tb is None else self.restrict(ta, tb)
        return float(segment_sq_integrals(x.times, x.values).sum())

    def tail_sq(self) -> np.ndarray:
        """``int_{t_m}^{T} |x|^2`` for every grid point (exact for the interpolant)."""
        seg = segment_sq_integrals(self.times, self.values)
        return np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])

    def restrict(self, ta: float | None = None, tb: float | None = None) -> "Trajectory":
        """Exact restriction of the interpolant to ``[ta, tb]`` (endpoints inserted)."""
        ta = self.times[0] if ta is None else max(float(ta), self.times[0])
        tb = self.times[-1] if tb is None else min(float(tb), self.times[-1])
        if not tb > ta:
            raise ParameterError("empty restriction interval")
        inner = self.times[(self.times > ta) & (self.times < tb)]
        t = np.concatenate([[ta], inner, [tb]])
        return Trajectory(t, self.interp(t))

    def interp(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, self.n))
        for j in range(self.n):
            out[:, j] = np.interp(t, self.times, self.values[:, j])
        return out

    def refine(self, factor: int = 2) -> "Trajectory":
        """Same interpolant on a grid with ``factor`` sub-intervals per segment."""
        t = refine_grid(self.times, factor)
        return Trajectory(t, self.interp(t))

    def map(self, fn) -> "Trajectory":
        return Trajectory(self.times, np.asarray(fn(self.values)))

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        return Trajectory(self.times, self.values - other.values)

    def __add__(self, other: "Trajectory") -> "Trajectory":
        return Trajectory(self.times, self.values + other.values)


def segment_sq_integrals(times, values) -> np.ndarray:
    """Exact ``int |x|^2`` over each segment of the piecewise-linear interpolant."""
    a = values[:-1]
    b = values[1:]
    h = np.diff(times)
    return h / 3.0 * np.sum(a * a + a * b + b * b, axis=1)


def refine_grid(times, factor: int) -> np.ndarray:
    if factor < 1:
        raise ParameterError("refinement factor must be >= 1")
    times = np.asarray(times, dtype=float)
    frac = np.arange(factor) / factor
    fine = (times[:-1, None] + np.diff(times)[:, None] * frac[None, :]).ravel()
    return np.concatenate([fine, times[-1:]])


def uniform_grid(t0: float, t1: float, m: int) -> np.ndarray:
    return np.linspace(t0, t1, m + 1)


def geometric_grid(T: float, theta: float = 0.9, t_min: float = 1e-6, h_max: float = 0.01,
                   head: int = 4) -> np.ndarray:
    """Grid on ``[0, T]`` with geometric refinement toward ``t = 0``.

    Points ``T * theta**k`` are used where their spacing is below ``h_max``;
    beyond that the grid is uniform with spacing ``h_max``.  The interval
    ``[0, t_min]`` gets ``head`` uniform cells.
    """
    if not 0 < theta < 1:
        raise ParameterError("grid theta must lie in (0, 1)")
    if not 0 < t_min < T:
        raise ParameterError("need 0 < t_min < T")
    t_switch = min(h_max / (1.0 - theta), T)
    k = np.arange(int(np.ceil(np.log(t_min / t_switch) / np.log(theta))) + 1)
    geo = t_switch * theta ** k
    geo = geo[geo >= t_min]
    if t_switch < T:
        n_uni = int(np.ceil((T - t_switch) / h_max))
        uni = np.linspace(t_switch, T, n_uni + 1)
    else:
        uni = np.array([T])
    head_pts = np.linspace(0.0, geo.min(), head + 1)[:-1]
    return np.unique(np.concatenate([head_pts, geo, uni]))


def local_spacing(times, t) -> np.ndarray:
    """Width of the grid cell containing each ``t``."""
    times = np.asarray(times)
    idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2)
    return times[idx + 1] - times[idx]


def to_csv(traj: Trajectory, header_comments=()) -> str:
    buf = io.StringIO()
    for line in header_comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"coeff_{j}" for j in range(traj.n)])
    for t, row in zip(traj.times, traj.values):
        w.writerow([format(t, ".17g")] + [format(v, ".17g") for v in row])
    return buf.getvalue()


def from_csv(text: str) -> Trajectory:
    rows = [r for r in csv.reader(line for line in text.splitlines()
                                 if line.strip() and not line.startswith("#"))]
    if not rows or rows[0][0] != "t":
        raise ParameterError("trajectory CSV needs a header starting with 't'")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return Trajectory(data[:, 0], data[:, 1:])
