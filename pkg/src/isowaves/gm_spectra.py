"""Garrett-Munk energy spectrum, its moored frequency form, the wave-turbulence
spectrum and log-log slope fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .core import DomainError, PhysicalParams


@dataclass(frozen=True)
class GMParams:
    """Energy level ``E``, reference vertical wavenumber ``m_star`` and the medium."""

    E: float = 1.0
    m_star: float = 1.0
    params: PhysicalParams = field(default_factory=PhysicalParams)

    def __post_init__(self):
        if not (self.E > 0 and math.isfinite(self.E)):
            raise DomainError("E must be positive and finite")
        if not (self.m_star > 0 and math.isfinite(self.m_star)):
            raise DomainError("m_star must be positive and finite")


def gm_energy_density(k, m, gm: GMParams):
    """3 f N E (m/m*) / (pi (1 + m/m*)^(5/2) (N^2 k^2 + f^2 m^2))."""
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    if np.any(k < 0) or np.any(m < 0):
        raise DomainError("gm_energy_density needs k >= 0 and m >= 0")
    f, N = gm.params.f, gm.params.N
    den = N * N * k * k + f * f * m * m
    if np.any(den == 0):
        raise DomainError("gm_energy_density is undefined at k = m = 0 (or f = 0, k = 0)")
    r = m / gm.m_star
    return 3.0 * f * N * gm.E * r / (math.pi * (1.0 + r) ** 2.5 * den)


def gm_moored(omega, gm: GMParams):
    """2 f E / (pi sqrt(1 - f^2/omega^2) omega^2), defined for omega > f."""
    w = np.asarray(omega, dtype=float)
    f = gm.params.f
    if np.any(w <= f):
        raise DomainError("gm_moored needs omega > f")
    return 2.0 * f * gm.E / (math.pi * np.sqrt(1.0 - (f / w) ** 2) * w * w)


def wt_energy_density(k, m, amplitude: float = 1.0):
    """amplitude * k^(-3/2) m^(-3/2), i.e. k omega n for n = k^(-7/2) m^(-1/2)."""
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    if np.any(k <= 0) or np.any(m <= 0):
        raise DomainError("wt_energy_density needs k > 0 and m > 0")
    return amplitude * k ** -1.5 * m ** -1.5


def gm_frequency_density(k, omega, gm: GMParams):
    """E(k, omega) = E(k, m(k, omega)) |dm/domega| with m = N k / sqrt(omega^2 - f^2)."""
    k = np.asarray(k, dtype=float)
    w = np.asarray(omega, dtype=float)
    f, N = gm.params.f, gm.params.N
    if np.any(w <= f):
        raise DomainError("the frequency density needs omega > f")
    s = w * w - f * f
    m = N * k / np.sqrt(s)
    dm = N * k * w / s ** 1.5
    return gm_energy_density(k, m, gm) * dm


def moored_by_quadrature(omega: float, gm: GMParams) -> float:
    """Integral of :func:`gm_frequency_density` over k in (0, inf)."""
    if omega <= gm.params.f:
        raise DomainError("needs omega > f")
    f, N = gm.params.f, gm.params.N
    # k where m(k, omega) = m_star splits the integrand's two regimes
    k0 = gm.m_star * math.sqrt(omega * omega - f * f) / N

    def fn(t):
        k = k0 * math.exp(t)
        return float(gm_frequency_density(k, omega, gm)) * k

    val, _ = integrate.quad(fn, -60.0, 60.0, points=[0.0], limit=400, epsabs=0, epsrel=1e-12)
    return val


@dataclass(frozen=True)
class SlopeFit:
    x_slope: float
    y_slope: float
    residual: float
    intercept: float


def slope_fit(k_axis, m_axis, values, k_window=None, m_window=None) -> SlopeFit:
    """Least-squares plane log v = c + x log k + y log m over the windowed nodes."""
    k_axis = np.asarray(k_axis, dtype=float)
    m_axis = np.asarray(m_axis, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != (k_axis.size, m_axis.size):
        raise DomainError("values must have shape (len(k_axis), len(m_axis))")
    ksel = np.ones(k_axis.size, bool) if k_window is None else \
        (k_axis >= k_window[0]) & (k_axis <= k_window[1])
    msel = np.ones(m_axis.size, bool) if m_window is None else \
        (m_axis >= m_window[0]) & (m_axis <= m_window[1])
    if ksel.sum() < 4 or msel.sum() < 4:
        raise DomainError("the fit window needs at least 4 nodes per axis")
    v = values[np.ix_(ksel, msel)]
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise DomainError("slope_fit needs positive finite values in the window")
    K, M = np.meshgrid(np.log(k_axis[ksel]), np.log(m_axis[msel]), indexing="ij")
    A = np.column_stack([np.ones(K.size), K.ravel(), M.ravel()])
    y = np.log(v).ravel()
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return SlopeFit(float(coef[1]), float(coef[2]), res, float(coef[0]))


def moored_local_slope(omega, gm: GMParams, rel_step: float = 1e-4):
    """d log(moored) / d log(omega) by central differences."""
    w = np.asarray(omega, dtype=float)
    h = rel_step
    return (np.log(gm_moored(w * math.exp(h), gm)) - np.log(gm_moored(w * math.exp(-h), gm))) / (2 * h)
