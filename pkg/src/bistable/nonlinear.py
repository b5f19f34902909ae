"""Decaying solutions of ``(d/dt)(A x) = -x + G(x)`` by Picard iteration.

The iteration map is ``x -> |A|^{-1/2} T_s(t) g0 + V[G(x)]`` where ``V`` is the
variation-of-constants solution operator on ``[0, T]`` (zero unstable data at
``T``, center part ``Pi_c G(x)``).  ``V`` has norm at most one on ``L^2``, so
the map contracts with factor ``lip(G)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import CertificationError, DivergenceError, ParameterError
from .linear import solve_voc
from .semigroup import homogeneous_solution
from .spectral import SpectrumSpec, _check
from .trajectory import Trajectory

GAMMA_DEFAULT = 0.25
GAMMA_MAX = 0.9


@dataclass(frozen=True)
class NonlinearMap:
    """A map ``G`` with ``G(0) = 0`` and a certified global Lipschitz bound.

    ``eval`` acts on arrays whose last axis is the state dimension.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    lip_bound: float
    deriv_bounds: tuple = ()
    zero_at_zero: bool = True

    def __call__(self, x):
        return self.eval(x)

    def sampled_lipschitz(self, n: int, samples: int = 200, scale: float = 1.0,
                          seed: int = 0) -> float:
        """Largest difference quotient over random pairs (a lower bound on ``lip``)."""
        rng = np.random.default_rng(seed)
        u = rng.normal(size=(samples, n)) * scale
        v = u + rng.normal(size=(samples, n)) * scale * rng.uniform(1e-3, 1, (samples, 1))
        num = np.linalg.norm(self.eval(u) - self.eval(v), axis=1)
        den = np.linalg.norm(u - v, axis=1)
        return float(np.max(num / den))


def zero_map() -> NonlinearMap:
    return NonlinearMap(lambda x: np.zeros_like(x), 0.0, (0.0,))


def linear_map(c: float) -> NonlinearMap:
    """``G(x) = c x``."""
    return NonlinearMap(lambda x: c * np.asarray(x), abs(c), (abs(c), 0.0))


def matrix_map(m) -> NonlinearMap:
    m = np.asarray(m, dtype=float)
    return NonlinearMap(lambda x: np.asarray(x) @ m.T, float(np.linalg.norm(m, 2)))


# --- smooth radial cutoff -------------------------------------------------

def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _dbump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


def cutoff_profile(s):
    """C-infinity step: 1 on ``[0, 1]``, 0 on ``[2, inf)``."""
    a = _bump(2.0 - np.asarray(s, dtype=float))
    b = _bump(np.asarray(s, dtype=float) - 1.0)
    return a / (a + b)


def cutoff_profile_deriv(s):
    s = np.asarray(s, dtype=float)
    a, b = _bump(2.0 - s), _bump(s - 1.0)
    da, db = -_dbump(2.0 - s), _dbump(s - 1.0)
    return (da * b - a * db) / (a + b) ** 2


def cutoff_factor() -> float:
    """``sup_s s psi(s) * sup_s (psi(s) + s|psi'(s)|)`` on a fine grid, rounded up."""
    s = np.linspace(0.0, 2.0, 200001)
    psi = cutoff_profile(s)
    dpsi = cutoff_profile_deriv(s)
    radial = np.max(s * psi)
    deriv = np.max(psi + s * np.abs(dpsi))
    # grid maxima of smooth functions; pad by 1% to keep the bound certified
    return float(radial * deriv * 1.01)


@lru_cache(maxsize=1)
def _cached_cutoff_factor() -> float:
    return cutoff_factor()


def tensor_norm_bound(tensor) -> float:
    """Upper bound ``sqrt(sum_i ||B_i||_2^2)`` for ``sup |B(u, v)|`` over unit ``u, v``."""
    tensor = np.asarray(tensor, dtype=float)
    return float(np.sqrt(sum(np.linalg.norm(tensor[i], 2) ** 2 for i in range(tensor.shape[0]))))


@dataclass(frozen=True)
class BilinearMap:
    """Symmetric bilinear form ``B(u, v)_i = sum_jk T[i, j, k] u_j v_k``."""

    tensor: np.ndarray
    saturation_radius: float = 1.0
    norm_bound: float = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=float)
        n = t.shape[0]
        if t.shape != (n, n, n):
            raise ParameterError("bilinear tensor must be (n, n, n)")
        object.__setattr__(self, "tensor", t)
        if self.norm_bound is None:
            object.__setattr__(self, "norm_bound", tensor_norm_bound(t))
        if not self.saturation_radius > 0:
            raise ParameterError("saturation radius must be positive")

    @property
    def n(self) -> int:
        return self.tensor.shape[0]

    def apply(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        n = self.n
        uv = (u[..., :, None] * v[..., None, :]).reshape(u.shape[:-1] + (n * n,))
        return uv @ self.tensor.reshape(n, n * n).T

    def lip_certificate(self) -> float:
        return 2.0 * self.norm_bound * self.saturation_radius * _cached_cutoff_factor()

    def as_nonlinear(self) -> NonlinearMap:
        """``x -> B(chi(x) x, chi(x) x)`` with ``chi = psi(|x|/rho)``."""
        rho = self.saturation_radius

        def g(x):
            x = np.asarray(x, dtype=float)
            r = np.linalg.norm(x, axis=-1, keepdims=True)
            u = cutoff_profile(r / rho) * x
            return self.apply(u, u)

        return NonlinearMap(g, self.lip_certificate(), (self.lip_certificate(),))


def random_symmetric_tensor(n: int, rng: np.random.Generator) -> np.ndarray:
    t = rng.normal(size=(n, n, n))
    return 0.5 * (t + t.transpose(0, 2, 1))


# --- Picard solver ---------------------------------------------------------

@dataclass
class PicardResult:
    trajectory: Trajectory
    iterations: int
    distances: list
    gamma_eff: float
    residual: float

    def report(self) -> dict:
        return {"iterations": self.iterations, "gamma_eff": self.gamma_eff,
                "residual": self.residual, "final_distance": self.distances[-1] if self.distances else 0.0}


def _stable_data(spec: SpectrumSpec, g0) -> np.ndarray:
    g0 = np.asarray(_check(spec, g0), dtype=float)
    if np.any(g0[spec.alphas <= 0] != 0):
        raise ParameterError("g0 must be supported on stable coordinates")
    return g0


def picard_solve(spec: SpectrumSpec, G: NonlinearMap, g0, times, tol: float = 1e-10,
                 gamma_max: float = GAMMA_DEFAULT, max_iter: int = 200,
                 x_init: np.ndarray | None = None) -> PicardResult:
    """Fixed point of ``x -> |A|^{-1/2} T_s(t) g0 + V[G(x)]`` on the grid ``times``.

    Stops when the ``L^2(0, T)`` distance between successive iterates is at
    most ``tol``.

    Raises
    ------
    CertificationError
        ``G.lip_bound`` exceeds ``gamma_max`` or ``gamma_max`` is not below one.
    DivergenceError
        No convergence within ``max_iter`` iterations.
    """
    if not 0 < gamma_max < 1 or gamma_max > GAMMA_MAX:
        raise CertificationError(f"gamma_max={gamma_max} outside (0, {GAMMA_MAX}]")
    if G.lip_bound > gamma_max:
        raise CertificationError(
            f"Lipschitz bound {G.lip_bound:.6g} exceeds gamma={gamma_max:.6g}")
    if not G.zero_at_zero:
        raise CertificationError("G(0) must vanish")
    g0 = _stable_data(spec, g0)
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        raise ParameterError("time grid must start at t = 0")
    lin = homogeneous_solution(spec, times, g0, None, 0.0, 0.0, r=0.5)
    x = lin.copy() if x_init is None else np.array(x_init, dtype=float)
    dists = []
    for it in range(1, max_iter + 1):
        forcing = Trajectory(times, G(x))
        x_new = lin + solve_voc(spec, forcing).values
        d = Trajectory(times, x_new - x).l2_norm()
        dists.append(d)
        x = x_new
        if d <= tol:
            traj = Trajectory(times, x)
            return PicardResult(traj, it, dists, _rate(dists), residual(spec, G, traj))
    raise DivergenceError(
        f"Picard iteration did not reach tol={tol:g} in {max_iter} iterations "
        f"(contraction estimate {_rate(dists):.3g})", max_iter, _rate(dists))


def _rate(dists) -> float:
    d = np.asarray(dists, dtype=float)
    if d.size < 3:
        return 0.0
    d = d[1:]
    ok = (d[:-1] > 0) & (d[1:] > 0)
    if not np.any(ok):
        return 0.0
    return float(np.max(d[1:][ok] / d[:-1][ok]))


def center_solve(spec: SpectrumSpec, G: NonlinearMap, x_sc, tol: float = 1e-14,
                 max_iter: int = 500) -> np.ndarray:
    """Center coordinates ``c`` with ``c = Pi_c G(x_sc + c)`` by scalar Picard iteration."""
    if not G.lip_bound < 1:
        raise CertificationError("center_solve needs lip_bound < 1")
    x_sc = np.asarray(_check(spec, x_sc), dtype=float)
    center = spec.alphas == 0
    x_sc = np.where(center, 0.0, x_sc)
    c = np.zeros(spec.n)
    if not np.any(center):
        return c
    for _ in range(max_iter):
        c_new = np.where(center, G(x_sc + c), 0.0)
        if np.linalg.norm(c_new - c) <= tol * max(1.0, np.linalg.norm(c_new)):
            return c_new
        c = c_new
    raise DivergenceError("center fixed point did not converge", max_iter)


def fd_derivative(times, values) -> np.ndarray:
    """Second-order derivative estimate at interior nodes of a nonuniform grid."""
    t = np.asarray(times)
    h0 = (t[1:-1] - t[:-2])[:, None]
    h1 = (t[2:] - t[1:-1])[:, None]
    v0, v1, v2 = values[:-2], values[1:-1], values[2:]
    return (-h1 / (h0 * (h0 + h1)) * v0 + (h1 - h0) / (h0 * h1) * v1
            + h0 / (h1 * (h0 + h1)) * v2)


def residual(spec: SpectrumSpec, G: NonlinearMap, x: Trajectory) -> float:
    """Relative ``L^2`` residual of ``(Ax)' + x - G(x)`` at interior grid nodes."""
    if x.times.size < 3:
        raise ParameterError("residual needs at least three grid points")
    ax = x.values * spec.alphas[None, :]
    r = fd_derivative(x.times, ax) + x.values[1:-1] - G(x.values[1:-1])
    t = x.times
    w = 0.5 * (t[2:] - t[:-2])
    num = float(np.sqrt(np.sum(w * np.sum(r * r, axis=1))))
    den = x.l2_norm()
    return num / den if den > 0 else num


def h1_tail(x: Trajectory) -> np.ndarray:
    """``||x||_{H^1(t_m, T)}`` of the piecewise-linear interpolant for every grid point."""
    dt = x.steps
    slope_sq = np.sum(np.diff(x.values, axis=0) ** 2, axis=1) / dt
    d_tail = np.concatenate([np.cumsum(slope_sq[::-1])[::-1], [0.0]])
    return np.sqrt(x.tail_sq() + d_tail)
