import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bistable.errors import CertificationError, DivergenceError, ParameterError
from bistable.estimates import quadratic_form_series
from bistable.nonlinear import (BilinearMap, NonlinearMap, center_solve, cutoff_factor,
                                cutoff_profile, linear_map, picard_solve, random_symmetric_tensor,
                                residual, tensor_norm_bound, zero_map)
from bistable.spectral import explicit, harmonic
from bistable.trajectory import Trajectory, geometric_grid, uniform_grid


def small_bilinear(n, seed, lip=0.25):
    rng = np.random.default_rng(seed)
    t = random_symmetric_tensor(n, rng)
    amp = lip / (2 * cutoff_factor())
    return BilinearMap(t * amp / tensor_norm_bound(t))


def test_zero_forcing_single_mode():
    spec = explicit([0.5])
    t = geometric_grid(10.0, 0.9, 1e-4, 0.01)
    res = picard_solve(spec, zero_map(), np.array([0.3]), t)
    exact = 0.3 / math.sqrt(0.5) * np.exp(-t / 0.5)
    assert np.allclose(res.trajectory.values[:, 0], exact, rtol=1e-14, atol=0)
    assert res.iterations == 1


def test_zero_data_gives_zero():
    spec = harmonic(6)
    t = geometric_grid(5.0)
    G = small_bilinear(6, 0).as_nonlinear()
    res = picard_solve(spec, G, np.zeros(6), t)
    assert not np.any(res.trajectory.values)


def test_linear_forcing_closed_form():
    spec = explicit([0.5, 1.0])
    t = geometric_grid(20.0, 0.9, 1e-5, 1e-3)
    g0 = np.array([0.2, 0.3])
    res = picard_solve(spec, linear_map(1 / 8), g0, t, tol=1e-12)
    x0 = g0 / np.sqrt(spec.alphas)
    exact = x0 * np.exp(-(7 / 8) * t[:, None] / spec.alphas)
    err = Trajectory(t, res.trajectory.values - exact).l2_norm()
    assert err <= 1e-6 * Trajectory(t, exact).l2_norm()
    assert res.residual <= 1e-6


def test_certification_errors():
    spec = explicit([1.0])
    t = geometric_grid(2.0)
    with pytest.raises(CertificationError):
        picard_solve(spec, linear_map(0.3), np.array([0.1]), t)
    picard_solve(spec, linear_map(0.3), np.array([0.1]), t, gamma_max=0.5)
    with pytest.raises(CertificationError):
        picard_solve(spec, linear_map(0.3), np.array([0.1]), t, gamma_max=0.95)
    with pytest.raises(ParameterError):
        picard_solve(explicit([-1.0, 1.0]), zero_map(), np.array([1.0, 0.0]), t)
    with pytest.raises(ParameterError):
        picard_solve(spec, zero_map(), np.array([0.1]), t + 1.0)


def test_divergence_reports_rate():
    spec = explicit([0.5, 1.0])
    t = geometric_grid(10.0)
    with pytest.raises(DivergenceError) as info:
        picard_solve(spec, linear_map(0.24), np.array([0.5, 0.5]), t, tol=1e-15, max_iter=4)
    assert info.value.iterations == 4
    assert 0 < info.value.rate < 0.25


def test_contraction_and_uniqueness():
    spec = harmonic(10)
    t = geometric_grid(20.0, 0.9, 1e-4, 0.01)
    G = small_bilinear(10, 4).as_nonlinear()
    g0 = np.sqrt(spec.alphas) * np.linspace(0.4, 0.1, 10) / 2
    a = picard_solve(spec, G, g0, t, tol=1e-12)
    d = np.asarray(a.distances)
    assert np.all(d[2:] / d[1:-1] <= a.gamma_eff + 1e-15) and a.gamma_eff < 0.25
    rng = np.random.default_rng(0)
    b = picard_solve(spec, G, g0, t, tol=1e-12, x_init=rng.normal(size=(t.size, 10)))
    assert (a.trajectory - b.trajectory).l2_norm() <= 2e-12
    assert quadratic_form_series(spec, a.trajectory).passed


def test_center_solve():
    spec = explicit([0.0, 0.5, 1.0])
    x_sc = np.array([0.0, 0.2, -0.1])
    assert not np.any(center_solve(spec, zero_map(), x_sc))
    assert not np.any(center_solve(explicit([0.5, 1.0]), linear_map(0.1), np.ones(2)))
    c = center_solve(spec, linear_map(1 / 8), x_sc)
    assert not np.any(c)  # Pi_c G(x_sc) = 0 here
    e0 = np.array([1.0, 0.0, 0.0])

    def coupled(x):
        x = np.asarray(x)
        return x / 8 + 0.05 * x[..., 1:2] * e0

    g = NonlinearMap(coupled, lip_bound=0.2)
    c = center_solve(spec, g, x_sc)
    # c = c/8 + 0.05 x_1, so c = (8/7) 0.05 x_1
    assert c[0] == pytest.approx(8 / 7 * 0.05 * 0.2, rel=1e-12)
    bound = 0.2 * np.linalg.norm(x_sc + c) / 0.8
    assert np.linalg.norm(c) <= bound


def test_residual_second_order():
    spec = explicit([0.7])
    errs = []
    for m in (100, 200, 400):
        t = uniform_grid(0, 3, m)
        x = Trajectory(t, np.exp(-t / 0.7)[:, None])
        errs.append(residual(spec, zero_map(), x))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.1)
    z = Trajectory(uniform_grid(0, 1, 5), np.zeros((6, 1)))
    assert residual(spec, zero_map(), z) == 0.0
    with pytest.raises(ParameterError):
        residual(spec, zero_map(), Trajectory(np.array([0.0, 1.0]), np.zeros((2, 1))))


def test_cutoff_profile():
    s = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    p = cutoff_profile(s)
    assert np.array_equal(p[[0, 1, 2]], [1, 1, 1]) and np.array_equal(p[[4, 5]], [0, 0])
    assert 0 < p[3] < 1
    assert 4.0 < cutoff_factor() < 4.3


@given(st.integers(2, 12), st.integers(0, 2 ** 31))
def test_bilinear_invariants(n, seed):
    B = small_bilinear(n, seed)
    rng = np.random.default_rng(seed)
    u, v, w = rng.normal(size=(3, n))
    a, b = rng.normal(size=2)
    assert np.allclose(B.apply(a * u + b * w, v), a * B.apply(u, v) + b * B.apply(w, v), atol=1e-13)
    assert np.allclose(B.apply(u, v), B.apply(v, u), atol=1e-14)
    assert np.linalg.norm(B.apply(u, v)) <= B.norm_bound * np.linalg.norm(u) * np.linalg.norm(v) * (1 + 1e-12)
    G = B.as_nonlinear()
    assert G.lip_bound == pytest.approx(0.25)
    assert G.sampled_lipschitz(n, samples=100, scale=2.5, seed=seed) <= G.lip_bound
    assert not np.any(G(np.zeros(n)))
