import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isowaves.core import DomainError, PhysicalParams
from isowaves.dispersion import omega
from isowaves.triads import I_term, J_term, K_term, Triad, abs_K_term, triangle_delta, v_squared

from helpers import resonant_triads

ROT = PhysicalParams(f=0.3, g=1.0, N=1.0, rho0=1.0)
NOROT = PhysicalParams(f=0.0, g=2.0, N=0.7, rho0=1.3)


def test_triangle_delta_equilateral():
    assert math.isclose(float(triangle_delta(1, 1, 1)), math.sqrt(3) / 2, rel_tol=1e-15)


def test_triangle_delta_no_triangle_is_nan():
    assert np.isnan(triangle_delta(5, 1, 1))


def test_magnitude_triad_rejects_triangle_violation():
    with pytest.raises(DomainError, match="triangle"):
        Triad.from_magnitudes(5.0, 1.0, 1.0, 1.0, 1.0)


def test_collinear_I_matches_scalar_formula():
    # k2 parallel to k3: every cosine is 1
    t = Triad.from_vectors(np.array([0.3, 0.4]), np.array([0.6, 0.8]), 1.2, -0.7)
    p = ROT
    k1, k2, k3 = 1.5, 0.5, 1.0
    w1, w2, w3 = omega(k1, 0.5, p), omega(k2, 1.2, p), omega(k3, -0.7, p)
    want = -p.N / (4 * math.sqrt(2 * p.g)) * (math.sqrt(w2 * w3 / w1) * k1 + math.sqrt(w1 * w3 / w2) * k2
                                              + math.sqrt(w1 * w2 / w3) * k3)
    assert math.isclose(float(I_term(t, p)), want, rel_tol=1e-14)


def test_I_scaling_with_N_and_length():
    rng = np.random.default_rng(0)
    t = resonant_triads(20, NOROT, rng)
    base = I_term(t, NOROT)
    L = 3.0
    shrunk = Triad.from_vectors(t.k2_vec / L, t.k3_vec / L, t.m2 / L, t.m3 / L)
    np.testing.assert_allclose(I_term(shrunk, NOROT), base / L, rtol=1e-13)
    # N -> lam N with m -> m / lam^2 keeps omega / N fixed
    lam = 2.0
    p2 = PhysicalParams(f=0.0, g=NOROT.g, N=lam * NOROT.N, rho0=NOROT.rho0)
    t2 = Triad.from_vectors(t.k2_vec, t.k3_vec, t.m2 / lam ** 2, t.m3 / lam ** 2)
    np.testing.assert_allclose(I_term(t2, p2), base * lam ** 1.5, rtol=1e-13)


def test_J_and_K_vanish_without_rotation():
    t = resonant_triads(10, NOROT, np.random.default_rng(1))
    assert np.all(J_term(t, NOROT) == 0.0)
    assert np.all(K_term(t, NOROT) == 0.0)
    np.testing.assert_array_equal(v_squared(t, NOROT), I_term(t, NOROT) ** 2)


def test_J_scales_as_f_squared():
    t = resonant_triads(10, ROT, np.random.default_rng(2))
    half = PhysicalParams(f=ROT.f / 2, g=ROT.g, N=ROT.N, rho0=ROT.rho0)
    np.testing.assert_allclose(J_term(t, half, high_frequency=True),
                               J_term(t, ROT, high_frequency=True) / 4, rtol=1e-15)


def test_K_collinear_is_zero():
    t = Triad.from_vectors(np.array([0.3, 0.4]), np.array([0.6, 0.8]), 1.2, -0.7)
    assert K_term(t, ROT) == 0.0


def test_K_needs_vector_triad():
    t = resonant_triads(3, ROT, np.random.default_rng(3), vector=False)
    with pytest.raises(DomainError):
        K_term(t, ROT)


def test_degenerate_magnitude_triangle_has_no_K():
    t = Triad.from_magnitudes(2.0, 1.5, 0.5, 0.8, 0.4)
    assert abs_K_term(t, ROT) == 0.0


def test_K_prefactor_quarter_option():
    t = resonant_triads(5, ROT, np.random.default_rng(4))
    np.testing.assert_allclose(K_term(t, ROT, k_prefactor_quarter=True), K_term(t, ROT) / 4, rtol=1e-15)


@pytest.mark.parametrize("fn", [I_term, J_term, K_term, v_squared])
def test_exchange_symmetry(fn):
    t = resonant_triads(200, ROT, np.random.default_rng(5))
    a, b = fn(t, ROT), fn(t.swapped(), ROT)
    np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-14 * np.max(np.abs(a)))


def test_vector_and_magnitude_paths_agree():
    rng = np.random.default_rng(6)
    t = resonant_triads(500, ROT, rng)
    tm = Triad.from_magnitudes(t.k1, t.k2, t.k3, t.m2, t.m3)
    np.testing.assert_allclose(v_squared(tm, ROT), v_squared(t, ROT), rtol=1e-12)
    np.testing.assert_allclose(abs_K_term(tm, ROT), np.abs(K_term(t, ROT)), rtol=1e-11,
                               atol=1e-13 * np.max(np.abs(K_term(t, ROT))))


def test_zero_wavenumber_rejected():
    t = Triad.from_magnitudes(1.0, 1.0, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        v_squared(t, ROT)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(0, 2 ** 31))
def test_v_squared_nonnegative_and_finite(f, seed):
    p = PhysicalParams(f=f, g=1.0, N=1.0, rho0=1.0)
    t = resonant_triads(5, p, np.random.default_rng(seed))
    v = v_squared(t, p)
    assert np.all(np.isfinite(v)) and np.all(v >= 0)
