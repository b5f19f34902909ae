"""Solvers for the linear problem ``(d/dt)(A x) + x = f``.

Three routes are provided:

* :func:`solve_voc` - variation of constants with closed-form exponential
  quadrature per grid cell (production path, any grid);
* :func:`solve_fourier` - the Fourier multiplier ``(i omega A + 1)^-1`` on a
  zero-padded uniform grid (cross-validation only);
* :func:`solve_bvp` - the two-point problem on ``[t0, t1]`` with data on
  ``|A|^{1/2} x`` at the ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from . import _kernels
from .errors import ParameterError
from .semigroup import homogeneous_solution
from .spectral import SpectrumSpec, _check, abs_power, abs_power_inv
from .trajectory import Trajectory, refine_grid

TOL_BC = 1e-8


def resolvent_apply(spec: SpectrumSpec, omega: float, v) -> np.ndarray:
    """``(i omega A + 1)^-1 v`` (complex result)."""
    v = _check(spec, v)
    return v / (1.0 + 1j * omega * spec.alphas)


def resolvent_norms(spec: SpectrumSpec, omegas) -> tuple[np.ndarray, np.ndarray]:
    """Operator norms of ``(i w A + 1)^-1`` and ``i w A (i w A + 1)^-1`` for each ``w``.

    Both operators are diagonal, so each norm is the largest modulus over modes.
    """
    w = np.asarray(omegas, dtype=float)[:, None]
    wa = w * spec.alphas[None, :]
    first = 1.0 / np.abs(1.0 + 1j * wa)
    second = np.abs(1j * wa / (1.0 + 1j * wa))
    return first.max(axis=1), second.max(axis=1)


@dataclass(frozen=True)
class FourierSolution:
    trajectory: Trajectory
    padding: int
    periodization_error: float


def solve_fourier(spec: SpectrumSpec, f: Trajectory, pad_factor: int = 4,
                  decay_lengths: float = 40.0) -> FourierSolution:
    """Apply the multiplier ``(i omega A + 1)^-1`` to zero-padded samples of ``f``.

    The padded window is at least ``pad_factor`` times the data window and at
    least ``decay_lengths * max|alpha|`` longer than it, so wrapped-around
    tails are below ``exp(-decay_lengths)``.  The returned trajectory lives on
    the full padded grid.
    """
    _check(spec, f.values.T)
    if not f.is_uniform():
        raise ParameterError("solve_fourier needs a uniform grid")
    if pad_factor < 4:
        raise ParameterError("pad_factor must be >= 4")
    h = float(f.steps[0])
    m = f.times.size
    extra = int(np.ceil(decay_lengths * spec.norm_bound / h))
    total = sfft.next_fast_len(max(pad_factor * m, m + extra), real=True)
    pre = (total - m) // 2
    data = np.zeros((total, spec.n))
    data[pre:pre + m] = f.values
    omega = 2.0 * np.pi * sfft.rfftfreq(total, d=h)
    mult = 1.0 / (1.0 + 1j * omega[:, None] * spec.alphas[None, :])
    x = sfft.irfft(sfft.rfft(data, axis=0) * mult, n=total, axis=0)
    times = f.times[0] + h * (np.arange(total) - pre)
    pad_len = h * (total - m)
    err = float(np.exp(-pad_len / spec.norm_bound))
    return FourierSolution(Trajectory(times, x), total - m, err)


def solve_voc(spec: SpectrumSpec, f: Trajectory, cutoff: float | None = None) -> Trajectory:
    """Variation-of-constants solution for ``f`` extended by zero off its grid.

    Stable coordinates integrate the past, unstable coordinates the future,
    center coordinates copy ``f``.  With ``cutoff = a`` the modes with
    ``0 < |alpha| < a`` are dropped.
    """
    _check(spec, f.values.T)
    if cutoff is not None and not cutoff > 0:
        raise ParameterError("spectral cutoff must be positive")
    a = spec.alphas
    keep = np.ones(spec.n, dtype=bool) if cutoff is None else (np.abs(a) >= cutoff) | (a == 0)
    y = np.zeros_like(f.values)
    fv = np.ascontiguousarray(f.values)
    times = np.ascontiguousarray(f.times)
    st = np.flatnonzero((a > 0) & keep)
    un = np.flatnonzero((a < 0) & keep)
    if st.size:
        y[:, st] = _kernels.forward_sweep(times, a[st], np.ascontiguousarray(fv[:, st]))
    if un.size:
        y[:, un] = _kernels.backward_sweep(times, a[un], np.ascontiguousarray(fv[:, un]))
    ce = a == 0
    y[:, ce] = fv[:, ce]
    return Trajectory(f.times, y)


@dataclass(frozen=True)
class BoundaryData:
    """Data for ``|A|^{1/2} Pi_s x(t0) = g0`` and ``|A|^{1/2} Pi_u x(t1) = g1``.

    ``from_mild`` builds the weak data ``g = |A|^{1/2} Pi h`` from mild data and
    keeps ``h0``/``h1`` so the mild formula can be evaluated directly.
    """

    g0: np.ndarray
    g1: np.ndarray
    form: str = "weak"
    h0: np.ndarray | None = field(default=None)
    h1: np.ndarray | None = field(default=None)

    def validate(self, spec: SpectrumSpec, tol: float = 0.0) -> None:
        g0 = _check(spec, self.g0)
        g1 = _check(spec, self.g1)
        if np.any(np.abs(g0[spec.alphas <= 0]) > tol):
            raise ParameterError("g0 must be supported on stable coordinates")
        if np.any(np.abs(g1[spec.alphas >= 0]) > tol):
            raise ParameterError("g1 must be supported on unstable coordinates")

    @classmethod
    def zero(cls, spec: SpectrumSpec) -> "BoundaryData":
        return cls(np.zeros(spec.n), np.zeros(spec.n))

    @classmethod
    def from_mild(cls, spec: SpectrumSpec, h0, h1) -> "BoundaryData":
        h0 = np.where(spec.alphas > 0, _check(spec, h0), 0.0)
        h1 = np.where(spec.alphas < 0, _check(spec, h1), 0.0)
        return cls(abs_power(spec, h0, 0.5), abs_power(spec, h1, 0.5), "mild", h0, h1)


def solve_bvp(spec: SpectrumSpec, f: Trajectory, bd: BoundaryData) -> Trajectory:
    """Solution on ``f``'s grid ``[t0, t1]`` of the two-point problem.

    ``x = y + |A|^{-1/2} T_s(t - t0) g0 + |A|^{-1/2} T_u(t - t1) g1`` with ``y``
    the variation-of-constants solution for ``f`` extended by zero.
    """
    bd.validate(spec)
    y = solve_voc(spec, f)
    t0, t1 = f.times[0], f.times[-1]
    z = homogeneous_solution(spec, f.times, bd.g0, bd.g1, t0, t1, r=0.5)
    return Trajectory(f.times, y.values + z)


def solve_bvp_mild(spec: SpectrumSpec, f: Trajectory, bd: BoundaryData) -> Trajectory:
    """Mild formula ``x = y + T_s(t - t0) h0 + T_u(t - t1) h1``."""
    if bd.h0 is None or bd.h1 is None:
        raise ParameterError("mild formula needs h0/h1")
    y = solve_voc(spec, f)
    z = homogeneous_solution(spec, f.times, bd.h0, bd.h1, f.times[0], f.times[-1])
    return Trajectory(f.times, y.values + z)


def boundary_values(spec: SpectrumSpec, x: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """``|A|^{1/2} Pi_s x(t0)`` and ``|A|^{1/2} Pi_u x(t1)``."""
    a = spec.alphas
    r = np.sqrt(np.abs(a))
    return (np.where(a > 0, r * x.values[0], 0.0),
            np.where(a < 0, r * x.values[-1], 0.0))


def integrated_residual(spec: SpectrumSpec, x: Trajectory, f: Trajectory) -> np.ndarray:
    """Per-cell residual of ``(Ax)' + x - f`` in difference/average form.

    ``x`` must live on a 2x refinement of ``f``'s grid.  On each coarse cell
    ``[t_m, t_{m+1}]`` the residual is ``Delta(Ax)/h + avg(x) - avg(f)`` with
    averages by Simpson's rule on the cell midpoint; ``f`` is linear on the
    cell, so only ``x`` carries quadrature error.
    """
    if x.times.size != 2 * f.times.size - 1 or not np.allclose(x.times[::2], f.times):
        raise ParameterError("x must be sampled on the 2x refined grid of f")
    h = np.diff(f.times)[:, None]
    ax = x.values * spec.alphas[None, :]
    xa, xm, xb = x.values[:-2:2], x.values[1::2], x.values[2::2]
    avg_x = (xa + 4.0 * xm + xb) / 6.0
    avg_f = 0.5 * (f.values[:-1] + f.values[1:])
    return (ax[2::2] - ax[:-2:2]) / h + avg_x - avg_f


def residual_l2(spec: SpectrumSpec, x: Trajectory, f: Trajectory) -> float:
    r = integrated_residual(spec, x, f)
    return float(np.sqrt(np.sum(np.diff(f.times) * np.sum(r * r, axis=1))))


def bvp_check(spec: SpectrumSpec, f: Trajectory, bd: BoundaryData) -> dict:
    """Solve, then measure residual on the 2x grid, boundary attainment and Fourier agreement."""
    x = solve_bvp(spec, f, bd)
    fine = Trajectory(refine_grid(f.times, 2), f.interp(refine_grid(f.times, 2)))
    xf = solve_bvp(spec, fine, bd)
    res = residual_l2(spec, xf, f)
    b0, b1 = boundary_values(spec, x)
    bc = max(float(np.linalg.norm(b0 - bd.g0)), float(np.linalg.norm(b1 - bd.g1)))
    report = {"residual": res, "boundary_error": bc}
    if f.is_uniform():
        fs = solve_fourier(spec, f)
        y = solve_voc(spec, Trajectory(fs.trajectory.times, f(fs.trajectory.times)))
        report["cross_l2"] = (fs.trajectory - y).l2_norm()
        report["periodization_error"] = fs.periodization_error
    return {"solution": x, **report}


def mild_defect(spec: SpectrumSpec, g) -> float:
    """``| |A|^{-1/2} g |``; bounded under refinement iff ``g`` is mild-compatible."""
    g = _check(spec, g)
    return float(np.linalg.norm(abs_power_inv(spec, g, 0.5)))


def mild_defect_sweep(make_case, sizes, growth_tol: float = 1e-2) -> dict:
    """Defects across a refinement sweep.

    ``make_case(n)`` returns ``(spec, g)`` at resolution ``n``.  The data are
    flagged non-mild when the last refinement still grows the defect by more
    than ``growth_tol`` relative.
    """
    defects = []
    for n in sizes:
        spec, g = make_case(n)
        defects.append(mild_defect(spec, g))
    defects = np.array(defects)
    growth = float(defects[-1] / defects[-2] - 1.0) if defects.size > 1 else 0.0
    return {"sizes": list(sizes), "defects": defects.tolist(), "last_growth": growth,
            "mild": bool(growth <= growth_tol)}



def random_instance(seed: int, n: int = 32, m: int = 4000, t0: float = 0.0, t1: float = 1.0,
                    n_center: int = 2) -> tuple[SpectrumSpec, Trajectory, BoundaryData]:
    """Seeded test problem: mixed-sign spectrum in ``[0.05, 1]``, smooth windowed forcing."""
    rng = np.random.default_rng(seed)
    n_pos = (n - n_center) // 2
    mags = rng.uniform(0.05, 1.0, size=n - n_center)
    signs = np.concatenate([np.ones(n_pos), -np.ones(n - n_center - n_pos)])
    spec = SpectrumSpec.from_values(np.concatenate([mags * signs, np.zeros(n_center)]))
    times = np.linspace(t0, t1, m + 1)
    s = (times - t0) / (t1 - t0)
    window = np.sin(np.pi * s) ** 4
    freqs = rng.integers(1, 4, size=n)
    phases = rng.uniform(0, 2 * np.pi, size=n)
    amps = rng.normal(size=n)
    f = window[:, None] * amps * np.sin(2 * np.pi * freqs * s[:, None] + phases)
    g0 = np.where(spec.alphas > 0, rng.normal(size=n), 0.0)
    g1 = np.where(spec.alphas < 0, rng.normal(size=n), 0.0)
    return spec, Trajectory(times, f), BoundaryData(g0, g1)
