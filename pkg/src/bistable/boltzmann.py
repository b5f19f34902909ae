"""Discrete-velocity toy model: ``A = diag(xi_1 / <xi>)`` with a random quadratic collision term."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, DivergenceError, ParameterError
from .estimates import decay_fit, l2_tail_series, quadratic_form_series
from .nonlinear import (GAMMA_DEFAULT, BilinearMap, NonlinearMap, h1_tail, picard_solve,
                        random_symmetric_tensor, tensor_norm_bound, _cached_cutoff_factor)
from .spectral import SpectrumSpec
from .trajectory import geometric_grid


def velocity_grid(K: int, radius: float = 3.0, perp: float = 0.0) -> np.ndarray:
    """``K`` nodes ``(xi_1, xi_perp)`` with ``xi_1`` uniform on ``[-radius, radius]``.

    Odd ``K`` puts a node at ``xi_1 = 0`` (a center mode).
    """
    if K < 4:
        raise ParameterError("need K >= 4 velocity nodes")
    xi1 = np.linspace(-radius, radius, K)
    return np.column_stack([xi1, np.full(K, float(perp))])


def velocity_alphas(xis) -> np.ndarray:
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    return xis[:, 0] / np.sqrt(1.0 + np.sum(xis ** 2, axis=1))


@dataclass(frozen=True)
class VelocityModel:
    xis: np.ndarray
    collision: BilinearMap
    amplitude: float
    spec: SpectrumSpec
    G: NonlinearMap

    def __iter__(self):
        yield self.spec
        yield self.G

    @property
    def K(self) -> int:
        return self.xis.shape[0]


def max_amplitude(rho: float = 1.0, gamma: float = GAMMA_DEFAULT) -> float:
    """Largest amplitude of a unit-norm tensor certified at ``gamma``."""
    return gamma / (2.0 * rho * _cached_cutoff_factor())


def build_model(K: int, seed: int, amplitude: float, radius: float = 3.0, rho: float = 1.0,
                conserve: bool = False, gamma: float = GAMMA_DEFAULT, xis=None) -> VelocityModel:
    """Seeded model with collision tensor scaled to ``||B|| = amplitude``.

    ``conserve`` removes the component of ``B``'s range along the constant
    vector (a single mass-like collision invariant).
    """
    xis = velocity_grid(K, radius) if xis is None else np.atleast_2d(np.asarray(xis, float))
    if xis.shape[0] != K:
        raise ParameterError("xis must have K rows")
    if amplitude < 0:
        raise ParameterError("amplitude must be nonnegative")
    alphas = velocity_alphas(xis)
    order = np.argsort(alphas, kind="stable")
    xis, alphas = xis[order], alphas[order]
    rng = np.random.default_rng(seed)
    t = random_symmetric_tensor(K, rng)
    if conserve:
        u = np.ones(K) / math.sqrt(K)
        t = np.einsum("ia,ajk->ijk", np.eye(K) - np.outer(u, u), t)
    t = t[np.ix_(order, order, order)]
    t = t * (amplitude / tensor_norm_bound(t)) if amplitude > 0 else np.zeros_like(t)
    B = BilinearMap(t, saturation_radius=rho)
    if B.lip_certificate() > gamma:
        raise CertificationError(
            f"amplitude {amplitude:g} gives Lipschitz certificate {B.lip_certificate():.6g} "
            f"> {gamma:g}; use amplitude <= {max_amplitude(rho, gamma):.6g}")
    return VelocityModel(xis, B, float(amplitude), SpectrumSpec(alphas), B.as_nonlinear())


def stable_direction(spec: SpectrumSpec, seed: int) -> np.ndarray:
    """Random ``g0`` with ``||x(0)|| = || |A|^{-1/2} g0 || = 1``."""
    rng = np.random.default_rng(seed)
    h = np.where(spec.alphas > 0, rng.normal(size=spec.n), 0.0)
    h /= np.linalg.norm(h)
    return np.sqrt(np.clip(spec.alphas, 0, None)) * h


def _first_below(times, values, threshold) -> float:
    idx = np.flatnonzero(values < threshold)
    return float(times[idx[0]]) if idx.size else math.inf


def tail_experiment(model: VelocityModel, g0_family, T: float = 20.0, theta: float = 0.9,
                    t_min: float = 1e-4, h_max: float = 0.01, tol: float = 1e-10,
                    threshold: float = 1e-3, max_iter: int = 200,
                    slope_slack: float = 0.15, rate_min: float = 0.4) -> list[dict]:
    """Solve each member of ``g0_family`` and measure its tail.

    ``t_star`` is the first grid time with ``||x||_{H^1(t, T)} < threshold``.
    A diverging member is reported and the sweep continues.
    """
    spec, G = model
    times = geometric_grid(T, theta, t_min, h_max)
    out = []
    for i, g0 in enumerate(g0_family):
        g0 = np.asarray(g0, dtype=float)
        rep = {"member": i, "g0_norm": float(np.linalg.norm(g0))}
        try:
            res = picard_solve(spec, G, g0, times, tol=tol, max_iter=max_iter)
        except DivergenceError as exc:
            rep.update(converged=False, error=str(exc), rate_estimate=exc.rate)
            out.append(rep)
            continue
        x = res.trajectory
        h1 = h1_tail(x)
        rep.update(converged=True, **res.report(), sup_norm=x.sup_norm(),
                   h1_norm=float(h1[0]), t_star=_first_below(x.times, h1, threshold))
        if x.sup_norm() == 0.0:
            rep.update(t_star=0.0, quadform_pass=True, tails_pass=True, decay_pass=True,
                       slope_k1=0.0, rate=math.inf, h1_rate=math.inf, passed=True)
            out.append(rep)
            continue
        q = quadratic_form_series(spec, x)
        tails = l2_tail_series(x)
        reports = decay_fit(x, 1)
        rate, slope = reports[0].large_t_rate, reports[1].small_t_slope
        keep = (x.times >= 1.0) & (x.times <= T / 2) & (h1 > 1e-250)
        h1_rate = -float(np.polyfit(x.times[keep], np.log(h1[keep]), 1)[0])
        decay_ok = bool(rate >= rate_min and h1_rate > 0 and slope >= -1 - slope_slack)
        rep.update(quadform_pass=q.passed, quadform_margin=q.margin, tails_pass=tails.passed,
                   tails_margin=tails.margin, rate=rate, h1_rate=h1_rate, slope_k1=slope,
                   decay_pass=decay_ok, passed=bool(q.passed and tails.passed and decay_ok))
        out.append(rep)
    return out


def t_star_monotone(reports) -> bool:
    """``t_star`` nonincreasing as ``||g0||`` decreases across converged members."""
    rows = sorted((r for r in reports if r.get("converged")), key=lambda r: -r["g0_norm"])
    ts = [r["t_star"] for r in rows]
    return all(b <= a for a, b in zip(ts, ts[1:]))
