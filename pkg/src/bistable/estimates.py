"""Runtime checks of the smoothing and decay estimates on computed trajectories.

Every check returns a :class:`Check` carrying the measured left- and
right-hand sides, the worst margin and a pass flag.  Non-finite numbers never
pass.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ParameterError, PreconditionError
from .semigroup import homogeneous_solution
from .spectral import SpectrumSpec
from .trajectory import Trajectory, local_spacing, segment_sq_integrals

HAAR_CONSTANT = (2.0 / (2.0 ** 0.25 - 1.0)) ** 2


@dataclass
class Check:
    name: str
    passed: bool
    margin: float
    params: dict = field(default_factory=dict)
    table: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def verdict(self) -> dict:
        return {"check": self.name, "pass": bool(self.passed), "margin": _clean(self.margin),
                "params": self.params, **{k: _clean(v) for k, v in self.details.items()}}


def _clean(v):
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_clean(u) for u in v]
    return v


def _finite(*arrays) -> bool:
    return all(np.all(np.isfinite(np.asarray(a, dtype=float))) for a in arrays)


# --- difference and averaging operators ------------------------------------

def _cumulative(x: Trajectory) -> np.ndarray:
    seg = 0.5 * x.steps[:, None] * (x.values[:-1] + x.values[1:])
    return np.vstack([np.zeros((1, x.n)), np.cumsum(seg, axis=0)])


def _antiderivative(x: Trajectory, t) -> np.ndarray:
    """``int_{t0}^t x`` of the interpolant at arbitrary points inside the span."""
    t = np.asarray(t, dtype=float)
    cum = _cumulative(x)
    idx = np.clip(np.searchsorted(x.times, t, side="right") - 1, 0, x.times.size - 2)
    s = (t - x.times[idx])[:, None]
    h = (x.times[idx + 1] - x.times[idx])[:, None]
    a = x.values[idx]
    b = x.values[idx + 1]
    return cum[idx] + a * s + 0.5 * (b - a) / h * s * s


def diffquot_ops(x: Trajectory, tau: float) -> tuple[Trajectory, Trajectory, Trajectory]:
    """``Delta_tau x``, ``S_tau x`` and ``Delta_tau x / tau`` on grid points with ``t + tau`` in span."""
    if not tau > 0:
        raise ParameterError("tau must be positive")
    if tau < float(np.max(x.steps)) * (1 - 1e-12):
        raise ParameterError("tau is smaller than the grid spacing")
    t = x.times[x.times + tau <= x.times[-1] * (1 + 1e-15)]
    if t.size < 2:
        raise ParameterError("tau too large for the trajectory span")
    shifted = np.minimum(t + tau, x.times[-1])
    delta = x.interp(shifted) - x.interp(t)
    avg = (_antiderivative(x, shifted) - _antiderivative(x, t)) / tau
    return Trajectory(t, delta), Trajectory(t, avg), Trajectory(t, delta / tau)


# --- quadratic form and L2 tails -------------------------------------------

def _normalization(spec: SpectrumSpec, x: Trajectory, slack: float = 1e-9) -> None:
    if spec.norm_bound > 1 + slack:
        raise PreconditionError(f"rescale first: |A| = {spec.norm_bound:.6g} > 1")
    if x.sup_norm() > 1 + slack:
        raise PreconditionError(f"rescale first: sup|x| = {x.sup_norm():.6g} > 1")


def quadratic_form_series(spec: SpectrumSpec, x: Trajectory, tol: float = 1e-3,
                          mono_factor: float = 10.0) -> Check:
    """``<Ax, x>(t_m)``: nonincreasing, nonnegative and below ``exp(-t) <Ax, x>(0)``."""
    _normalization(spec, x)
    q = np.sum(spec.alphas[None, :] * x.values ** 2, axis=1)
    h = x.steps
    nrm = x.norms()
    tol_mono = mono_factor * h ** 2 * np.maximum(nrm[:-1], nrm[1:]) ** 2
    inc = np.diff(q)
    mono_margin = float(np.min(tol_mono - inc)) if inc.size else 0.0
    bound = np.exp(-(x.times - x.times[0])) * q[0] * (1 + tol)
    exp_margin = float(np.min(bound + 1e-300 - q))
    neg_margin = float(np.min(q) + tol * max(q[0], 1e-300))
    ok = _finite(q) and mono_margin >= 0 and exp_margin >= 0 and neg_margin >= 0
    table = [{"t": float(t), "quadform": float(v)} for t, v in zip(x.times, q)]
    return Check("quadform", bool(ok), min(mono_margin, exp_margin, neg_margin),
                 {"tol": tol, "mono_factor": mono_factor}, table,
                 {"monotonicity_margin": mono_margin, "exp_bound_margin": exp_margin,
                  "nonnegativity_margin": neg_margin,
                  "violations": int(np.sum(inc > tol_mono))})


def l2_tail_series(x: Trajectory, tol: float = 1e-3) -> Check:
    """``int_t^T |x|^2 <= exp(-t)`` at every grid ``t`` (normalized units)."""
    tail = x.tail_sq()
    bound = np.exp(-(x.times - x.times[0])) * (1 + tol)
    margin = float(np.min(bound - tail))
    mono = bool(np.all(np.diff(tail) <= 0))
    ok = _finite(tail) and margin >= 0 and mono
    table = [{"t": float(t), "tail": float(v), "bound": float(b)}
             for t, v, b in zip(x.times, tail, bound)]
    return Check("tails", ok, margin, {"tol": tol}, table,
                 {"max_ratio": float(np.max(tail / bound)), "nonincreasing": mono})


# --- differential inequalities ---------------------------------------------

def _trap_cum(times, f) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (f[:-1] + f[1:]))])


def techlem_check(times, F, g, f, t_pairs, tol: float = 1e-9) -> Check:
    """Scalar form: ``F' <= -F^2 g + f`` implies ``F(t) <= int f + (int g)^-1``."""
    times = np.asarray(times, dtype=float)
    F, g, f = (np.asarray(v, dtype=float) for v in (F, g, f))
    dF = np.diff(F) / np.diff(times)
    ode = -F ** 2 * g + f
    rhs_ode = 0.5 * (ode[:-1] + ode[1:])
    step = np.diff(times)
    # trapezoid vs difference quotient mismatch is O(h * |jump of the right side|)
    slack = 10 * step * np.abs(np.diff(ode)) + tol
    pre = dF - rhs_ode - slack
    if np.any(pre > 0):
        return Check("techlem", False, float(-np.max(pre)), {"tol": tol}, [],
                     {"precondition": False})
    cf, cg = _trap_cum(times, f), _trap_cum(times, g)
    rows, margins = [], []
    for tp, t in t_pairs:
        i, j = _index(times, tp), _index(times, t)
        lhs = F[j]
        rhs = cf[j] - cf[i] + 1.0 / (cg[j] - cg[i])
        rows.append({"t_prime": float(tp), "t": float(t), "lhs": float(lhs), "rhs": float(rhs)})
        margins.append(rhs - lhs)
    margin = float(np.min(margins))
    return Check("techlem", _finite(margins) and margin >= -tol, margin, {"tol": tol}, rows,
                 {"precondition": True})


def _index(times, t) -> int:
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > 1e-9 * max(1.0, abs(t)):
        raise ParameterError(f"time {t} is not a grid point")
    return i


def techcor_check(h: Trajectory, y: Trajectory, f, t_pairs, tol: float = 1e-6) -> Check:
    """Integral conclusion of ``(d/dt)<h, y> <= -|y|^2 + f``.

    On a finite horizon ``T`` the right-hand side carries the extra term
    ``max(0, -<h, y>(T))`` that vanishes on the half-line.
    """
    times = h.times
    if not np.array_equal(times, y.times):
        raise ParameterError("h and y must share a grid")
    f = np.asarray(f, dtype=float)
    hy = np.sum(h.values * y.values, axis=1)
    ysq = np.sum(y.values ** 2, axis=1)
    step = np.diff(times)
    d_hy = np.diff(hy) / step
    avg_rhs = 0.5 * ((-ysq + f)[:-1] + (-ysq + f)[1:])
    slack = 10 * step ** 2 * np.maximum(ysq[:-1], ysq[1:]) + tol * np.max(ysq)
    pre = d_hy - avg_rhs - slack
    if np.any(pre > 0):
        return Check("techcor", False, float(-np.max(pre)), {"tol": tol}, [],
                     {"precondition": False, "precondition_violations": int(np.sum(pre > 0))})
    y_tail = y.tail_sq()
    h_seg = np.concatenate([[0.0], np.cumsum(segment_sq_integrals(times, h.values))])
    f_cum = _trap_cum(times, f)
    end_term = max(0.0, -float(hy[-1]))
    rows, margins = [], []
    for tp, t in t_pairs:
        i, j = _index(times, tp), _index(times, t)
        if not j > i:
            raise ParameterError("need t > t' in every pair")
        hint = (h_seg[j] - h_seg[i]) / (times[j] - times[i]) ** 2
        rhs_tail = f_cum[-1] - f_cum[i] + hint + end_term
        rhs_point = f_cum[j] - f_cum[i] + hint
        scale = tol * max(1.0, rhs_tail)
        m1 = rhs_tail - y_tail[j] + scale
        m2 = rhs_point - hy[j] + scale
        rows.append({"t_prime": float(tp), "t": float(t), "tail": float(y_tail[j]),
                     "tail_bound": float(rhs_tail), "pairing": float(hy[j]),
                     "pairing_bound": float(rhs_point)})
        margins.append(min(m1, m2))
    margin = float(np.min(margins))
    return Check("techcor", _finite(margins) and margin >= 0, margin, {"tol": tol}, rows,
                 {"precondition": True})


# --- decay and smoothing rates ---------------------------------------------

@dataclass
class DecayReport:
    k: int
    small_t_slope: float
    large_t_rate: float
    constants: dict
    fit_residuals: dict
    samples: dict


Evaluator = Callable[[np.ndarray], np.ndarray]


def _stencil_step(t, k: int):
    return np.minimum(t, 1.0) / (2.0 * k)


def derivative_norms(x, times, k: int, grid_budget: float = 0.5) -> np.ndarray:
    """``|x^{(k)}(t)|`` by centered k-th divided differences with step ``min(t,1)/(2k)``.

    ``x`` is a :class:`Trajectory` (linear interpolation, grid spacing inside
    each stencil must not exceed ``grid_budget`` times the step) or a callable
    returning exact samples.
    """
    times = np.asarray(times, dtype=float)
    if k == 0:
        vals = x.interp(times) if isinstance(x, Trajectory) else x(times)
        return np.linalg.norm(vals, axis=1)
    delta = _stencil_step(times, k)
    offsets = np.arange(k + 1) - k / 2.0
    pts = times[:, None] + offsets[None, :] * delta[:, None]
    if isinstance(x, Trajectory):
        if pts.min() < x.times[0] or pts.max() > x.times[-1]:
            raise ParameterError("stencil leaves the trajectory span")
        spacing = local_spacing(x.times, pts.ravel()).reshape(pts.shape).max(axis=1)
        if np.any(spacing > grid_budget * delta):
            raise ParameterError(
                f"insufficient grid for k={k}: spacing {spacing.max():.3g} exceeds "
                f"{grid_budget} x stencil step")
        vals = x.interp(pts.ravel())
    else:
        vals = np.asarray(x(pts.ravel()))
    vals = vals.reshape(pts.shape + (-1,))
    coeff = np.array([(-1) ** (k - i) * math.comb(k, i) for i in range(k + 1)], dtype=float)
    d = np.einsum("i,mij->mj", coeff, vals) / delta[:, None] ** k
    return np.linalg.norm(d, axis=1)


def dyadic_points(lo: float, hi: float) -> np.ndarray:
    p_lo = int(math.ceil(math.log2(lo) - 1e-12))
    p_hi = int(math.floor(math.log2(hi) + 1e-12))
    return 2.0 ** np.arange(p_lo, p_hi + 1)


def _fit(xs, ys):
    coef, res, *_ = np.polyfit(xs, ys, 1, full=True)
    rms = float(np.sqrt(res[0] / xs.size)) if res.size else 0.0
    return float(coef[0]), float(coef[1]), rms


def decay_fit(x, k_max: int, t_small=(2.0 ** -12, 2.0 ** -4), t_large=None,
              n_large: int = 40, floor: float = 1e-250) -> list[DecayReport]:
    """Log-log slope near ``t = 0`` and exponential rate for large ``t`` of ``|x^{(k)}|``.

    Small-``t`` slopes use dyadic samples with the first and last dropped from
    the least-squares fit.  The large-``t`` rate is ``-d log|x^{(k)}| / dt``
    fitted on ``t_large`` (default ``[1, T/2]`` for trajectories), skipping
    values below ``floor``.
    """
    if k_max < 0:
        raise ParameterError("k_max must be >= 0")
    ts = dyadic_points(*t_small)
    if ts.size < 8:
        raise ParameterError("need at least 8 dyadic sample points")
    if t_large is None and isinstance(x, Trajectory):
        t_large = (1.0, 0.5 * x.times[-1])
    reports = []
    for k in range(k_max + 1):
        small = derivative_norms(x, ts, k)
        if np.any(small <= 0) or not _finite(small):
            slope, c_small, rms_small = float("nan"), float("nan"), float("nan")
        else:
            slope, icpt, rms_small = _fit(np.log(ts[1:-1]), np.log(small[1:-1]))
            c_small = math.exp(icpt)
        rate, c_large, rms_large = float("nan"), float("nan"), float("nan")
        large_t = np.array([])
        large = np.array([])
        if t_large is not None and t_large[1] > t_large[0]:
            large_t = np.linspace(t_large[0], t_large[1], n_large)
            large = derivative_norms(x, large_t, k)
            ok = np.isfinite(large) & (large > floor)
            if ok.sum() >= 3:
                neg_rate, icpt, rms_large = _fit(large_t[ok], np.log(large[ok]))
                rate, c_large = -neg_rate, math.exp(icpt)
        reports.append(DecayReport(
            k, slope, rate, {"small_t": c_small, "large_t": c_large},
            {"small_t_rms": rms_small, "large_t_rms": rms_large},
            {"small_t": ts.tolist(), "small_vals": small.tolist(),
             "large_t": large_t.tolist(), "large_vals": large.tolist()}))
    return reports


def scale_invariant_data(spec: SpectrumSpec) -> np.ndarray:
    """Unit stable data ``h_j ~ alpha_j^{1/2}``: equal weight per dyadic band of a ladder."""
    h = np.where(spec.alphas > 0, np.sqrt(np.clip(spec.alphas, 0, None)), 0.0)
    return h / np.linalg.norm(h)


def linear_flow(spec: SpectrumSpec, h) -> Evaluator:
    """Exact evaluator ``t -> T_s(t) h`` of the linear diagonal flow ``(Ax)' = -x``."""
    return lambda t: homogeneous_solution(spec, np.asarray(t, dtype=float), h)


def sharpness_probe(spec: SpectrumSpec, k: int, indices=None) -> Check:
    """``|x^{(k)}(a_n)| a_n^k`` for data ``e_n`` over the positive ladder ``a_n``.

    Both candidate constants are reported: ``exp(-1)`` (value at ``t = a_n``)
    and ``(k/e)^k`` (the supremum over ``t``, reached at ``t = k a_n``).
    """
    if k < 0:
        raise ParameterError("k must be >= 0")
    pos = np.flatnonzero(spec.alphas > 0)
    if pos.size == 0:
        raise ParameterError("spectrum has no stable ladder")
    pos = pos[::-1]  # largest eigenvalue first, so n counts toward zero
    if indices is not None:
        pos = pos[np.asarray(indices)]
    rows = []
    for n, j in enumerate(pos):
        a = spec.alphas[j]
        # exact derivative of T_s(t) e_n is (-1/a)^k exp(-t/a) e_n
        exact = a ** (-k) * math.exp(-a / a)
        ratio = exact * a ** k
        one = SpectrumSpec(np.array([a]))
        fd = float(derivative_norms(linear_flow(one, np.ones(1)), np.array([a]), k)[0]) if k else exact
        sup_t = max(k, 1e-300) * a if k else a
        sup_ratio = a ** (-k) * math.exp(-sup_t / a) * sup_t ** k
        rows.append({"n": int(n), "a_n": float(a), "value": float(exact), "ratio": float(ratio),
                     "fd_value": fd, "sup_ratio": float(sup_ratio)})
    ratios = np.array([r["ratio"] for r in rows])
    lower = float(ratios.min())
    spread = float(ratios.max() / ratios.min() - 1.0)
    return Check("sharpness", bool(lower > 0 and _finite(ratios)), lower, {"k": k}, rows,
                 {"lower_ratio": lower, "spread": spread,
                  "candidate_exp_minus_one": math.exp(-1.0),
                  "candidate_k_over_e_pow_k": (k / math.e) ** k if k else 1.0})


# --- Haar L4 bound ---------------------------------------------------------

_G2 = np.array([-1.0, 1.0]) / math.sqrt(3.0)
_G3 = np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_W3 = np.array([5.0, 8.0, 5.0]) / 9.0


def _l4_integral(x: Trajectory) -> float:
    h = x.steps
    mid = 0.5 * (x.times[:-1] + x.times[1:])
    total = 0.0
    for node, w in zip(_G3, _W3):
        v = x.interp(mid + 0.5 * h * node)
        total += float(np.sum(w * 0.5 * h * np.sum(v * v, axis=1) ** 2))
    return total


def shift_energy(x: Trajectory, tau: float) -> float:
    """``int_{t0}^inf |x(s + tau) - x(s)|^2 ds`` with ``x`` zero beyond its grid.

    The integrand is piecewise quadratic between the breakpoints
    ``t_m`` and ``t_m - tau``; two-point Gauss rules on each piece are exact.
    """
    t0, t1 = x.times[0], x.times[-1]
    br = np.concatenate([x.times, x.times - tau])
    br = np.unique(br[(br >= t0) & (br <= t1)])
    a, b = br[:-1], br[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    total = 0.0
    for node in _G2:
        s = mid + half * node
        d = x(s + tau) - x(s)
        total += float(np.sum(half * np.sum(d * d, axis=1)))
    return total


def default_tau_grid(x: Trajectory) -> np.ndarray:
    hi = x.span / 4.0
    lo = max(float(np.min(x.steps)), hi * 2.0 ** -40)
    return hi * 2.0 ** -np.arange(int(math.floor(math.log2(hi / lo))) + 1)


@dataclass
class HaarBound:
    lhs: float
    rhs: float
    C1: float
    C2: float
    tau_star: float
    refined: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return _finite([self.lhs, self.rhs]) and self.lhs <= self.rhs


def haar_l4_bound(x: Trajectory, tau_grid=None, refine: bool = True) -> HaarBound:
    """``int |x|^4 <= K C1 C2`` with ``K = (2/(2^{1/4}-1))^2``.

    ``C2`` is a maximum over ``tau_grid`` and so a lower bound on the true
    supremum; a violation is only reported if it survives one refinement of
    the tau grid (half-octave points plus an extra octave below).
    """
    taus = default_tau_grid(x) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    lhs = _l4_integral(x)
    c1 = x.l2_sq()
    if lhs == 0.0:
        return HaarBound(0.0, 0.0, c1, 0.0, float("nan"), False)

    def c2_of(grid):
        vals = np.array([shift_energy(x, tau) / tau for tau in grid])
        i = int(np.argmax(vals))
        return float(vals[i]), float(grid[i])

    c2, tau_star = c2_of(taus)
    refined = False
    if lhs > HAAR_CONSTANT * c1 * c2 and refine:
        extra = np.concatenate([taus * 2.0 ** -0.5, [taus.min() / 2.0]])
        c2b, tb = c2_of(extra)
        if c2b > c2:
            c2, tau_star = c2b, tb
        refined = True
    return HaarBound(lhs, HAAR_CONSTANT * c1 * c2, c1, c2, tau_star, refined)


# --- Bochner counterexample ------------------------------------------------

def _phi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


_PHI_SQ = integrate.quad(lambda t: float(_phi(t)) ** 2, -1, 1, epsabs=1e-14, epsrel=1e-13)[0]


def phi(t):
    """Fixed smooth bump with unit ``L^2`` norm."""
    return _phi(t) / math.sqrt(_PHI_SQ)


def phi_norm_sq() -> float:
    return integrate.quad(lambda t: float(phi(t)) ** 2, -1, 1, epsabs=1e-14, epsrel=1e-13)[0]


def f_norm_sq(r: float) -> float:
    """``|phi|^2 int_0^1 alpha^-1 (|log alpha| + 1)^-r d alpha`` by quadrature in ``u = -log alpha``."""
    val, _ = integrate.quad(lambda u: (u + 1.0) ** (-r), 0.0, np.inf, epsabs=1e-13, epsrel=1e-12)
    return phi_norm_sq() * val


def bochner_integrand_norm(sigma: float, r: float) -> float:
    """``|A^-1 T_s(sigma) f(. - sigma)|_{L^2(R, H)}`` for the counterexample data.

    Integrates in ``w = log(alpha / sigma)``; the mass sits at ``w ~ 0``,
    i.e. ``alpha ~ sigma``, which is where the interval is split.
    """
    ls = math.log(sigma)

    def integrand(w):
        return math.exp(-2.0 * w - 2.0 * math.exp(-w)) * (abs(w + ls) + 1.0) ** (-r)

    upper = -ls
    parts = [(-8.0, 0.0), (0.0, upper)] if upper > 0 else [(-8.0, upper)]
    total = 0.0
    for lo, hi in parts:
        total += integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)[0]
    return math.sqrt(phi_norm_sq() * total) / sigma


def bochner_counterexample(r: float, sigma_grid=None, epsilon_grid=None,
                           band: float = 3.0, nodes: int = 12) -> Check:
    """Finite ``|f|`` but non-integrable ``sigma -> g(sigma)`` near zero.

    ``epsilon_grid`` must be decreasing dyadic cut points; partial integrals
    ``int_eps^1 g`` are accumulated band by band with Gauss-Legendre in
    ``log sigma``.
    """
    if not 1 < r <= 2:
        warnings.warn(f"r={r} is outside (1, 2]; the counterexample is not claimed there",
                      stacklevel=2)
    if r <= 1:
        raise ParameterError("r <= 1 makes |f| infinite")
    sig = 2.0 ** -np.arange(24, 3, -1) if sigma_grid is None else np.asarray(sigma_grid, float)
    eps = 2.0 ** -np.arange(0, 41) if epsilon_grid is None else np.asarray(epsilon_grid, float)
    fn = f_norm_sq(r)
    closed = 1.0 / (r - 1.0)
    g = np.array([bochner_integrand_norm(s, r) for s in sig])
    scaled = g * sig * (np.abs(np.log(sig)) + 1.0) ** (r / 2.0)
    band_ratio = float(scaled.max() / scaled.min())
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    incs = []
    for hi, lo in zip(eps[:-1], eps[1:]):
        a, b = math.log(lo), math.log(hi)
        s = 0.5 * (a + b) + 0.5 * (b - a) * xs
        vals = np.array([bochner_integrand_norm(math.exp(v), r) * math.exp(v) for v in s])
        incs.append(0.5 * (b - a) * float(np.dot(ws, vals)))
    incs = np.array(incs)
    partial = np.cumsum(incs)
    inc_ratio = incs[1:] / incs[:-1]
    norm_err = abs(fn - closed) / closed
    ok_norm = norm_err <= 1e-4
    ok_band = band_ratio <= band
    ok_growth = bool(inc_ratio[-1] >= 0.5 and np.all(np.diff(partial) > 0))
    table = [{"sigma": float(s), "g": float(v), "scaled": float(c)}
             for s, v, c in zip(sig, g, scaled)]
    table += [{"epsilon": float(e), "partial_integral": float(p)} for e, p in zip(eps[1:], partial)]
    passed = _finite(g, partial) and ok_norm and ok_band and ok_growth
    return Check("bochner", passed, min(1e-4 - norm_err, band - band_ratio, inc_ratio[-1] - 0.5),
                 {"r": r, "band": band},
                 table, {"f_norm_sq": fn, "closed_form": closed, "norm_rel_err": norm_err,
                         "band_ratio": band_ratio, "last_increment_ratio": float(inc_ratio[-1]),
                         "increment_ratios": inc_ratio.tolist(), "partial_last": float(partial[-1])})
