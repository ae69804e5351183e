import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isowaves.core import (DomainError, PhysicalParams, PowerLawSpectrum, SpectralGrid, Wavevector,
                           WaveactionSpectrum, make_log_grid, sample_power_law, spectrum_from_function)


def test_params_reject_negative_f():
    with pytest.raises(DomainError, match="f must be >= 0"):
        PhysicalParams(f=-1e-4)


@pytest.mark.parametrize("name", ["g", "N", "rho0"])
def test_params_reject_nonpositive(name):
    with pytest.raises(DomainError, match=name):
        PhysicalParams(**{name: 0.0})


def test_params_high_frequency_flag():
    assert PhysicalParams(f=1e-4, N=1e-2).high_frequency
    assert not PhysicalParams(f=0.5, N=1.0).high_frequency


def test_wavevector_rejects_negative_k():
    with pytest.raises(DomainError):
        Wavevector(-1.0, 1.0)


def test_log_grid_decades():
    g = make_log_grid(1, 100, 3, 1, 100, 3)
    np.testing.assert_allclose(g.k_axis, [1, 10, 100], rtol=1e-15)
    np.testing.assert_allclose(g.m_axis, [1, 10, 100], rtol=1e-15)


@pytest.mark.parametrize("args", [(1, 1, 2, 1, 10, 3), (10, 1, 3, 1, 10, 3), (1, 10, 1, 1, 10, 3),
                                  (0, 10, 3, 1, 10, 3)])
def test_log_grid_rejects_degenerate(args):
    with pytest.raises(DomainError):
        make_log_grid(*args)


def test_log_grid_ratio():
    g = make_log_grid(0.5, 512, 11, 0.5, 512, 11)
    ratio = (512 / 0.5) ** (1 / 10)
    np.testing.assert_allclose(g.k_axis[1:] / g.k_axis[:-1], ratio, rtol=1e-13)
    assert g.k_axis[0] == 0.5 and g.k_axis[-1] == 512


def test_grid_requires_log_spacing():
    with pytest.raises(DomainError, match="log spacing"):
        SpectralGrid(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0]))


def test_power_law_samples():
    g = make_log_grid(1, 16, 5, 1, 16, 5)
    assert np.all(sample_power_law(g, PowerLawSpectrum(1, 0, 0)).values == 1.0)
    s = sample_power_law(g, PowerLawSpectrum(1, -3.5, -0.5))
    assert s.values[2, 0] == 0.0078125          # k = 4, m = 1
    assert PowerLawSpectrum(2, 1, 1)(3.0, 5.0) == 30.0


def test_power_law_is_even_in_m():
    law = PowerLawSpectrum(1, -3.5, -0.5)
    assert law(2.0, -3.0) == law(2.0, 3.0)


def test_spectrum_rejects_bad_values():
    g = make_log_grid(1, 10, 3, 1, 10, 3)
    with pytest.raises(DomainError):
        WaveactionSpectrum(g, np.ones((2, 3)))
    with pytest.raises(DomainError):
        WaveactionSpectrum(g, -np.ones((3, 3)))
    with pytest.raises(DomainError):
        WaveactionSpectrum(g, np.full((3, 3), np.nan))


def test_interpolation_exact_for_power_laws():
    # log-bilinear interpolation reproduces a pure power law off the grid and
    # outside it (boundary-slope extrapolation)
    g = make_log_grid(0.1, 10, 6, 0.1, 10, 6)
    law = PowerLawSpectrum(2.0, -1.7, 0.6)
    grid_only = WaveactionSpectrum(g, law(g.k_axis[:, None], g.m_axis[None, :]))
    k = np.array([0.013, 0.37, 2.2, 55.0])
    m = np.array([-0.05, 0.9, 3.3, 40.0])
    np.testing.assert_allclose(grid_only.evaluate(k, m), law(k, m), rtol=1e-12)


def test_interpolation_cutoff_when_not_extrapolating():
    g = make_log_grid(0.1, 10, 4, 0.1, 10, 4)
    s = WaveactionSpectrum(g, np.ones(g.shape))
    assert s.evaluate(20.0, 1.0, extrapolate=False) == 0.0
    assert s.evaluate(1.0, 1.0, extrapolate=False) == 1.0


def test_zero_node_does_not_leak():
    g = make_log_grid(1, 8, 4, 1, 8, 4)
    v = np.zeros(g.shape)
    v[1, 1] = 1.0
    s = WaveactionSpectrum(g, v)
    assert s.evaluate(g.k_axis[1], g.m_axis[1]) == 1.0
    assert s.evaluate(g.k_axis[2], g.m_axis[2]) == 0.0
    # anything strictly inside a cell touching the zero corners vanishes
    assert s.evaluate(1.5 * g.k_axis[1], 1.2 * g.m_axis[1]) == 0.0


def test_function_source_used_off_grid():
    g = make_log_grid(1, 8, 4, 1, 8, 4)
    s = spectrum_from_function(g, lambda k, m: np.exp(-k) + 0 * m)
    assert s.evaluate(2.5, 1.0) == math.exp(-2.5)


def test_cell_widths_sum_to_span():
    g = make_log_grid(0.5, 20, 9, 1, 3, 4)
    dk, dm = g.cell_widths()
    assert math.isclose(dk.sum(), 19.5, rel_tol=1e-14)
    assert math.isclose(dm.sum(), 2.0, rel_tol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-5, 5), st.floats(-5, 5))
def test_bilinear_interpolation_reproduces_any_power_law(x, y, lk, lm):
    g = make_log_grid(0.1, 10, 5, 0.1, 10, 5)
    law = PowerLawSpectrum(1.0, x, y)
    s = WaveactionSpectrum(g, law(g.k_axis[:, None], g.m_axis[None, :]))
    k, m = math.exp(lk), math.exp(lm)
    assert math.isclose(float(s.evaluate(k, m)), float(law(k, m)), rel_tol=1e-10)
