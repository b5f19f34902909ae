import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bistable.errors import DomainError, ModelError, ParameterError
from bistable.semigroup import (apply_semigroup, apply_smoothing, homogeneous_solution,
                                loglog_slope, sharp_bound_scan, smoothing_constant,
                                sup_smoothing_norm)
from bistable.spectral import SpectrumSpec, abs_power_inv, explicit, geometric, harmonic, project


def test_scalar_examples():
    assert apply_semigroup(explicit([1.0]), 1.0, [1.0])[0] == pytest.approx(0.367879441171, abs=1e-12)
    assert apply_semigroup(explicit([-1.0]), -1.0, [1.0], "unstable")[0] == pytest.approx(math.exp(-1))
    assert apply_smoothing(explicit([2.0]), 1.0, [1.0], 1.0)[0] == pytest.approx(0.5 * math.exp(-0.5))


def test_t_zero_is_projection():
    s = explicit([-1.0, 0.0, 0.5, 1.0])
    h = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(apply_semigroup(s, 0.0, h), project(s, h, "stable"))
    assert np.array_equal(apply_semigroup(s, 0.0, h, "unstable"), project(s, h, "unstable"))


def test_sign_errors():
    s = explicit([-1.0, 1.0])
    with pytest.raises(ParameterError):
        apply_semigroup(s, -1.0, np.ones(2))
    with pytest.raises(ParameterError):
        apply_semigroup(s, 1.0, np.ones(2), "unstable")
    with pytest.raises(DomainError):
        apply_smoothing(s, 0.0, np.ones(2), 0.5)


def test_single_mode_at_t_equal_alpha():
    for k in (1, 2, 3):
        t = 0.01
        val = apply_smoothing(explicit([t]), t, [1.0], k)[0]
        assert val == pytest.approx(t ** -k * math.exp(-1), rel=1e-12)


def test_harmonic_ladder_norm():
    s = harmonic(64)
    for n in (1, 5, 17, 64):
        a = 1.0 / n
        e = np.where(np.isclose(s.alphas, a), 1.0, 0.0)
        out = apply_smoothing(s, a, e, 1.0)
        assert np.linalg.norm(out) == pytest.approx(n * math.exp(-1), rel=1e-12)


def test_smoothing_constant():
    assert smoothing_constant(1.0) == pytest.approx(math.exp(-1))
    z = np.linspace(1e-3, 50, 200001)
    for r in (0.5, 1.0, 2.0, 3.0):
        assert smoothing_constant(r) == pytest.approx(np.max(z ** -r * np.exp(-1 / z)), rel=1e-6)


def test_underflow_clamped():
    out = apply_semigroup(explicit([1e-3, 1.0]), 1.0, np.ones(2))
    assert out[0] == 0.0 and out[1] == pytest.approx(math.exp(-1))


def test_sharp_scan_single_mode():
    rows = sharp_bound_scan(explicit([1.0]), 1.0, [0.1, 1.0, 5.0])
    for row in rows:
        assert row["sup_norm"] == pytest.approx(math.exp(-row["t"]))
    with pytest.raises(ModelError):
        sharp_bound_scan(explicit([-1.0]), 1.0, [1.0])


def test_sharp_scan_geometric_ladder():
    s = geometric(41)
    t = 2.0 ** -20
    assert sup_smoothing_norm(s, t, 1.0) >= math.exp(-1) / t * (1 - 1e-12)
    ts = 2.0 ** -np.arange(30, 9, -1)
    rows = sharp_bound_scan(s, 1.0, ts)
    slope = loglog_slope(ts, [r["sup_norm"] for r in rows])
    assert abs(slope + 1.0) <= 0.05
    assert all(r["ratio"] <= 1 + 1e-12 for r in rows)


@st.composite
def spectra(draw):
    n = draw(st.integers(1, 20))
    a = draw(st.lists(st.floats(-1, 1).filter(lambda x: abs(x) > 1e-3), min_size=n, max_size=n))
    return SpectrumSpec.from_values(a)


@given(spectra(), st.floats(0, 5), st.floats(0, 5), st.integers(0, 2 ** 31))
def test_semigroup_law(spec, t1, t2, seed):
    h = np.random.default_rng(seed).normal(size=spec.n)
    lhs = apply_semigroup(spec, t1, apply_semigroup(spec, t2, h))
    rhs = apply_semigroup(spec, t1 + t2, h)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-300)
    assert np.linalg.norm(rhs) <= np.linalg.norm(apply_semigroup(spec, t2, h)) * (1 + 1e-15)
    lhs_u = apply_semigroup(spec, -t1, apply_semigroup(spec, -t2, h, "unstable"), "unstable")
    assert np.allclose(lhs_u, apply_semigroup(spec, -t1 - t2, h, "unstable"), rtol=1e-12, atol=1e-300)


@given(spectra(), st.floats(0.01, 5), st.floats(0.1, 3), st.integers(0, 2 ** 31))
def test_smoothing_consistency(spec, t, r, seed):
    h = np.random.default_rng(seed).normal(size=spec.n)
    lhs = apply_smoothing(spec, t, h, r)
    rhs = abs_power_inv(spec, apply_semigroup(spec, t, h), r)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-300)
    assert np.linalg.norm(lhs) <= smoothing_constant(r) * t ** -r * np.linalg.norm(h) * (1 + 1e-12)


def test_strong_continuity():
    s = harmonic(50)
    h = np.ones(50)
    base = apply_semigroup(s, 0.3, h)
    errs = [np.linalg.norm(apply_semigroup(s, 0.3 + d, h) - base) for d in 2.0 ** -np.arange(4, 20)]
    assert np.all(np.diff(errs) < 0) and errs[-1] < 1e-4


def test_homogeneous_residual_second_order():
    s = explicit([0.3, 1.0])
    h = np.array([1.0, -0.5])
    errs = []
    for m in (200, 400, 800):
        t = np.linspace(0, 2, m + 1)
        x = homogeneous_solution(s, t, h)
        ax = x * s.alphas
        res = (ax[1:] - ax[:-1]) / np.diff(t)[:, None] + 0.5 * (x[1:] + x[:-1])
        errs.append(np.max(np.abs(res)))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)
