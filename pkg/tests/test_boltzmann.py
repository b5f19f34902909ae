import math

import numpy as np
import pytest

from bistable.boltzmann import (build_model, max_amplitude, stable_direction, t_star_monotone,
                                tail_experiment, velocity_alphas, velocity_grid)
from bistable.errors import CertificationError, ParameterError
from bistable.nonlinear import cutoff_factor, tensor_norm_bound


def test_symmetric_grid_symmetric_spectrum():
    m = build_model(16, 1, 0.01)
    assert np.allclose(m.spec.alphas, -m.spec.alphas[::-1], atol=1e-15)
    assert not np.any(m.spec.alphas == 0)
    assert np.all(np.abs(m.spec.alphas) < 1)


def test_center_mode_for_zero_velocity():
    m = build_model(5, 0, 0.01)
    assert np.sum(m.spec.alphas == 0) == 1
    assert velocity_alphas([[0.0, 2.0]])[0] == 0.0


def test_alpha_formula():
    a = velocity_alphas([[1.0, 1.0], [-2.0, 0.0]])
    assert a == pytest.approx([1 / math.sqrt(3), -2 / math.sqrt(5)])


def test_refinement_drives_alpha_to_zero():
    mins = [np.min(np.abs(velocity_alphas(velocity_grid(k)))) for k in (8, 32, 128, 512)]
    assert np.all(np.diff(mins) < 0) and mins[-1] < 0.01


def test_certificate_recomputed():
    m = build_model(16, 42, 0.8 * max_amplitude())
    t = m.collision.tensor
    assert 2 * tensor_norm_bound(t) * 1.0 * cutoff_factor() == pytest.approx(m.G.lip_bound, rel=1e-12)
    assert m.G.lip_bound <= 0.25
    rng = np.random.default_rng(3)
    u, v = rng.normal(size=(2, 16))
    assert np.allclose(m.collision.apply(u, v), m.collision.apply(v, u), atol=1e-15)


def test_amplitude_too_large():
    with pytest.raises(CertificationError):
        build_model(16, 0, 1.1 * max_amplitude())
    with pytest.raises(ParameterError):
        velocity_grid(3)


def test_seed_reproducible():
    a = build_model(16, 9, 0.02)
    b = build_model(16, 9, 0.02)
    assert np.array_equal(a.collision.tensor, b.collision.tensor)


def test_conserve_flag():
    m = build_model(12, 2, 0.02, conserve=True)
    rng = np.random.default_rng(0)
    u, v = rng.normal(size=(2, 12))
    assert abs(np.sum(m.collision.apply(u, v))) < 1e-14


def test_zero_data_member():
    m = build_model(8, 0, 0.02)
    rep = tail_experiment(m, [np.zeros(8)], T=10.0)[0]
    assert rep["converged"] and rep["t_star"] == 0.0 and rep["sup_norm"] == 0.0


def test_linear_tail_rate():
    m = build_model(8, 0, 0.0)
    j = int(np.argmax(m.spec.alphas))
    g0 = np.zeros(8)
    g0[j] = 0.5 * math.sqrt(m.spec.alphas[j])
    rep = tail_experiment(m, [g0], T=20.0)[0]
    assert rep["rate"] == pytest.approx(1 / m.spec.alphas[j], rel=1e-6)
    assert rep["passed"]


def test_divergence_reported_and_sweep_continues():
    m = build_model(8, 0, max_amplitude())
    d = stable_direction(m.spec, 0)
    reps = tail_experiment(m, [0.9 * d, 0.1 * d], T=10.0, tol=1e-16, max_iter=2)
    assert [r["converged"] for r in reps] == [False, False]
    assert "contraction estimate" in reps[0]["error"]


def test_sweep_t_star_monotone():
    m = build_model(16, 7, 0.999 * max_amplitude())
    d = stable_direction(m.spec, 7)
    reps = tail_experiment(m, [s * d for s in (0.9, 0.3, 0.1)], T=20.0)
    assert all(r["passed"] for r in reps)
    assert t_star_monotone(reps)
    assert [r["t_star"] for r in reps] == sorted([r["t_star"] for r in reps], reverse=True)
