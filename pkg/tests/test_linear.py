import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bistable.errors import DomainError, ParameterError
from bistable.linear import (BoundaryData, boundary_values, bvp_check, mild_defect,
                             mild_defect_sweep, random_instance, resolvent_apply, resolvent_norms,
                             solve_bvp, solve_bvp_mild, solve_fourier, solve_voc)
from bistable.spectral import SpectrumSpec, explicit, harmonic
from bistable.trajectory import Trajectory, geometric_grid, uniform_grid


def bump(t, a, b):
    s = np.clip((t - a) / (b - a), 0, 1)
    return np.sin(np.pi * s) ** 4


def test_resolvent_scalar():
    r = resolvent_apply(explicit([1.0]), 1.0, np.array([1.0]))
    assert abs(r[0]) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    v = np.array([1.0, -2.0])
    assert np.array_equal(resolvent_apply(explicit([0.3, 1.0]), 0.0, v), v)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=20), st.floats(-1e6, 1e6))
def test_resolvent_bounds(alphas, omega):
    spec = SpectrumSpec.from_values(alphas) if np.any(alphas) else explicit([1.0])
    first, second = resolvent_norms(spec, np.array([omega]))
    exact = np.max(1 / np.sqrt(1 + omega ** 2 * spec.alphas ** 2))
    assert first[0] == pytest.approx(exact, rel=1e-14)
    assert first[0] <= 1 + 1e-12 and second[0] <= 2 + 1e-12


def test_fourier_zero_and_center():
    spec = explicit([0.0, 0.5])
    t = uniform_grid(0, 4, 400)
    f = np.zeros((t.size, 2))
    f[:, 0] = bump(t, 1, 3)
    sol = solve_fourier(spec, Trajectory(t, f)).trajectory
    assert np.allclose(sol.interp(t)[:, 0], f[:, 0], atol=1e-12)
    zero = solve_fourier(spec, Trajectory(t, np.zeros((t.size, 2)))).trajectory
    assert np.all(zero.values == 0)


def test_fourier_matches_convolution():
    spec = explicit([1.0])
    t = uniform_grid(0, 10, 4000)
    f = bump(t, 1, 4)[:, None]
    sol = solve_fourier(spec, Trajectory(t, f))
    x = sol.trajectory.interp(t)[:, 0]
    # closed-form convolution by fine trapezoid quadrature
    tf = np.linspace(0, 10, 200001)
    ff = bump(tf, 1, 4)
    ref = np.array([np.trapezoid(np.exp(-(s - tf[tf <= s])) * ff[tf <= s], tf[tf <= s])
                    if s > 0 else 0.0 for s in t[::100]])
    assert np.max(np.abs(x[::100] - ref)) < 1e-5
    assert sol.periodization_error < 1e-12
    with pytest.raises(ParameterError):
        solve_fourier(spec, Trajectory(geometric_grid(1.0), np.zeros((geometric_grid(1.0).size, 1))))


def test_causality():
    spec = explicit([-0.7, -0.2, 0.3, 0.9])
    t = uniform_grid(0, 6, 3000)
    f = bump(t, 2, 4)[:, None] * np.array([1.0, -1.0, 0.5, 2.0])
    x = solve_voc(spec, Trajectory(t, f))
    tol = 1e-10 * Trajectory(t, f).l2_norm()
    assert np.max(np.abs(x.values[t <= 2][:, 2:])) <= tol
    assert np.max(np.abs(x.values[t >= 4][:, :2])) <= tol
    xf = solve_fourier(spec, Trajectory(t, f)).trajectory
    before = xf.times <= 2
    assert np.max(np.abs(xf.values[before][:, 2:])) <= 1e-6


def test_voc_cutoff():
    spec = harmonic(40)
    t = uniform_grid(0, 3, 3000)
    f = Trajectory(t, bump(t, 0.5, 2.5)[:, None] * np.ones(40))
    with pytest.raises(ParameterError):
        solve_voc(spec, f, 0.0)
    x = solve_voc(spec, f, 0.1)
    assert np.all(x.values[:, spec.alphas < 0.1] == 0)
    outs = [solve_voc(spec, f, a) for a in 2.0 ** -np.arange(0, 9)]
    gaps = [(b - a).l2_norm() for a, b in zip(outs, outs[1:])]
    assert gaps[-1] == 0.0  # below min alpha the cutoff no longer acts
    assert sum(gaps) < 10 and gaps[-2] < gaps[0]


def test_voc_vs_fourier_random(rng):
    spec = SpectrumSpec.from_values(np.concatenate([rng.uniform(0.1, 1, 5), -rng.uniform(0.1, 1, 5)]))
    t = uniform_grid(0, 4, 8000)
    f = Trajectory(t, bump(t, 0.5, 3.5)[:, None] * rng.normal(size=10))
    fs = solve_fourier(spec, f).trajectory
    y = solve_voc(spec, Trajectory(fs.times, f(fs.times)))
    assert (fs - y).l2_norm() <= 1e-5 * max(1.0, f.l2_norm())


def test_bvp_single_mode():
    spec = explicit([0.4])
    t = uniform_grid(1.0, 3.0, 200)
    bd = BoundaryData(np.array([math.sqrt(0.4) * 2.0]), np.zeros(1))
    x = solve_bvp(spec, Trajectory(t, np.zeros((t.size, 1))), bd)
    assert np.allclose(x.values[:, 0], 2.0 * np.exp(-(t - 1.0) / 0.4), rtol=1e-14)
    zero = solve_bvp(spec, Trajectory(t, np.zeros((t.size, 1))), BoundaryData.zero(spec))
    assert not np.any(zero.values)


def test_bvp_support_violation():
    spec = explicit([-1.0, 1.0])
    t = uniform_grid(0, 1, 10)
    with pytest.raises(ParameterError):
        solve_bvp(spec, Trajectory(t, np.zeros((11, 2))), BoundaryData(np.ones(2), np.zeros(2)))


def test_bvp_random_instance():
    spec, f, bd = random_instance(1)
    rep = bvp_check(spec, f, bd)
    assert rep["residual"] <= 1e-6
    assert rep["boundary_error"] <= 1e-8
    assert rep["cross_l2"] <= 1e-5


def test_superposition_and_mild(rng):
    spec, f, bd = random_instance(2, n=12, m=1000)
    full = solve_bvp(spec, f, bd)
    zero_f = Trajectory(f.times, np.zeros_like(f.values))
    parts = solve_bvp(spec, f, BoundaryData.zero(spec)) + solve_bvp(spec, zero_f, bd)
    assert np.allclose(full.values, parts.values, rtol=1e-14, atol=1e-14)
    h0, h1 = rng.normal(size=spec.n), rng.normal(size=spec.n)
    mild = BoundaryData.from_mild(spec, h0, h1)
    a = solve_bvp(spec, f, mild)
    b = solve_bvp_mild(spec, f, mild)
    assert np.allclose(a.values, b.values, rtol=1e-13, atol=1e-13)
    g0, g1 = boundary_values(spec, a)
    assert np.allclose(g0, mild.g0, atol=1e-12)


def test_mild_defect():
    spec = explicit([0.25, 1.0])
    assert mild_defect(spec, np.array([1.0, 0.0])) == pytest.approx(2.0)
    h = np.array([3.0, 4.0])
    assert mild_defect(spec, np.sqrt(spec.alphas) * h) == pytest.approx(5.0)
    with pytest.raises(DomainError):
        mild_defect(explicit([0.0, 1.0]), np.array([1.0, 0.0]))


def test_mild_sweep_classifies():
    def bad(n):
        s = harmonic(n)
        return s, np.sqrt(s.alphas)  # g_j = j^-1/2 in sorted order
    def good(n):
        s = harmonic(n)
        return s, np.sqrt(s.alphas) * s.alphas  # h_j = 1/j
    r_bad = mild_defect_sweep(bad, [16, 64, 256, 1024])
    assert r_bad["defects"] == pytest.approx(np.sqrt([16, 64, 256, 1024]))
    assert not r_bad["mild"]
    assert mild_defect_sweep(good, [1024, 4096, 16384, 65536])["mild"]
