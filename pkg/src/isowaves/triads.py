"""Three-wave interaction coefficients V = I + J + K for internal waves.

Index 1 is the sum wave: k1_vec = k2_vec + k3_vec and m1 = m2 + m3.  A
:class:`Triad` stores either explicit horizontal vectors (orientation known)
or only the three magnitudes (the axisymmetric kinetic setting).  All
functions are vectorized over arrays of triads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DomainError, PhysicalParams
from .dispersion import omega, omega_high_frequency


def triangle_delta(a, b, c):
    """Twice the area of the triangle with sides a, b, c (Heron, factored).

    Equal to 1/2 sqrt(2(a^2b^2 + a^2c^2 + b^2c^2) - a^4 - b^4 - c^4), written as
    a product so that it is accurate close to degenerate triangles.
    Returns NaN when no triangle exists.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    p = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
    with np.errstate(invalid="ignore"):
        return 0.5 * np.sqrt(np.where(p >= 0, p, np.nan))


@dataclass(frozen=True)
class Triad:
    """k1, k2, k3 magnitudes, m1, m2, m3 and optional horizontal vectors.

    ``k2_vec``/``k3_vec`` have shape (..., 2) for vector-form triads.
    """

    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    k2_vec: Optional[np.ndarray] = None
    k3_vec: Optional[np.ndarray] = None

    @property
    def is_vector(self) -> bool:
        return self.k2_vec is not None

    @classmethod
    def from_vectors(cls, k2_vec, k3_vec, m2, m3) -> "Triad":
        k2_vec = np.asarray(k2_vec, dtype=float)
        k3_vec = np.asarray(k3_vec, dtype=float)
        if k2_vec.shape[-1] != 2 or k3_vec.shape != k2_vec.shape:
            raise DomainError("horizontal vectors need shape (..., 2)")
        m2 = np.asarray(m2, dtype=float)
        m3 = np.asarray(m3, dtype=float)
        k1_vec = k2_vec + k3_vec
        return cls(np.hypot(k1_vec[..., 0], k1_vec[..., 1]),
                   np.hypot(k2_vec[..., 0], k2_vec[..., 1]),
                   np.hypot(k3_vec[..., 0], k3_vec[..., 1]),
                   m2 + m3, m2, m3, k2_vec, k3_vec)

    @classmethod
    def from_magnitudes(cls, k1, k2, k3, m2, m3, tol: float = 1e-12) -> "Triad":
        k1, k2, k3 = (np.asarray(v, dtype=float) for v in (k1, k2, k3))
        if np.any(k1 < 0) or np.any(k2 < 0) or np.any(k3 < 0):
            raise DomainError("magnitudes must be nonnegative")
        scale = k1 + k2 + k3
        bad = (k1 > k2 + k3 + tol * scale) | (k1 < np.abs(k2 - k3) - tol * scale)
        if np.any(bad):
            raise DomainError("magnitudes violate the triangle inequality")
        m2 = np.asarray(m2, dtype=float)
        m3 = np.asarray(m3, dtype=float)
        return cls(k1, k2, k3, m2 + m3, m2, m3)

    def swapped(self) -> "Triad":
        """The same triad with the roles of waves 2 and 3 exchanged."""
        return Triad(self.k1, self.k3, self.k2, self.m1, self.m3, self.m2,
                     self.k3_vec, self.k2_vec)

    def geometry(self):
        """Dot products (d23, d13, d12) and the cross term k2_vec . k3_vec_perp.

        For magnitude-form triads only the unsigned value |k2_vec x k3_vec|
        (= Delta) is available.
        """
        k1, k2, k3 = self.k1, self.k2, self.k3
        if self.is_vector:
            a, b = self.k2_vec, self.k3_vec
            k1v = a + b
            d23 = np.sum(a * b, axis=-1)
            d13 = np.sum(k1v * b, axis=-1)
            d12 = np.sum(k1v * a, axis=-1)
            # perp(v) = (-v_y, v_x)
            cross = -a[..., 0] * b[..., 1] + a[..., 1] * b[..., 0]
        else:
            d23 = 0.5 * (k1 * k1 - k2 * k2 - k3 * k3)
            d13 = 0.5 * (k1 * k1 + k3 * k3 - k2 * k2)
            d12 = 0.5 * (k1 * k1 + k2 * k2 - k3 * k3)
            cross = np.nan_to_num(triangle_delta(k1, k2, k3))
        return d23, d13, d12, cross


def _check(t: Triad):
    if np.any(t.k1 <= 0) or np.any(t.k2 <= 0) or np.any(t.k3 <= 0):
        raise DomainError("interaction coefficients need nonzero horizontal wavenumbers")
    if np.any(t.m1 == 0) or np.any(t.m2 == 0) or np.any(t.m3 == 0):
        raise DomainError("interaction coefficients need nonzero vertical wavenumbers")


def _omegas(t: Triad, params: PhysicalParams, high_frequency: bool):
    w = omega_high_frequency if high_frequency else omega
    return w(t.k1, t.m1, params), w(t.k2, t.m2, params), w(t.k3, t.m3, params)


def I_term(t: Triad, params: PhysicalParams, high_frequency: bool = False):
    _check(t)
    w1, w2, w3 = _omegas(t, params, high_frequency)
    d23, d13, d12, _ = t.geometry()
    k1, k2, k3 = t.k1, t.k2, t.k3
    s = (d23 / (k2 * k3) * np.sqrt(w2 * w3 / w1) * k1
         + d13 / (k1 * k3) * np.sqrt(w1 * w3 / w2) * k2
         + d12 / (k1 * k2) * np.sqrt(w1 * w2 / w3) * k3)
    return -params.N / (4.0 * np.sqrt(2.0 * params.g)) * s


def J_term(t: Triad, params: PhysicalParams, high_frequency: bool = False):
    _check(t)
    w1, w2, w3 = _omegas(t, params, high_frequency)
    d23, d13, d12, _ = t.geometry()
    k1, k2, k3 = t.k1, t.k2, t.k3
    s = d23 / (k2 * k3) * k1 - d13 / (k1 * k3) * k2 - d12 / (k1 * k2) * k3
    return params.N * params.f ** 2 / (4.0 * np.sqrt(2.0 * params.g * w1 * w2 * w3)) * s


def _k_bracket(t, w1, w2, w3):
    k1s, k2s, k3s = t.k1 ** 2, t.k2 ** 2, t.k3 ** 2
    return (np.sqrt(w2 / (w1 * w3)) * (k1s - k3s)
            + np.sqrt(w1 / (w2 * w3)) * (k2s - k3s)
            + np.sqrt(w3 / (w1 * w2)) * (k2s - k1s))


def _k_prefactor(params, quarter):
    p = params.f * params.N / np.sqrt(2.0 * params.g)
    return p / 4.0 if quarter else p


def K_term(t: Triad, params: PhysicalParams, high_frequency: bool = False,
           k_prefactor_quarter: bool = False):
    """Imaginary part of K (K itself is i times the returned value)."""
    if not t.is_vector:
        raise DomainError("the sign of K needs a vector-form triad; use abs_K_term")
    _check(t)
    w1, w2, w3 = _omegas(t, params, high_frequency)
    cross = t.geometry()[3]
    return (_k_prefactor(params, k_prefactor_quarter) * cross / (t.k1 * t.k2 * t.k3)
            * _k_bracket(t, w1, w2, w3))


def abs_K_term(t: Triad, params: PhysicalParams, high_frequency: bool = False,
               k_prefactor_quarter: bool = False):
    """|K|, available for both representations."""
    _check(t)
    w1, w2, w3 = _omegas(t, params, high_frequency)
    cross = np.abs(t.geometry()[3])
    return np.abs(_k_prefactor(params, k_prefactor_quarter) * cross / (t.k1 * t.k2 * t.k3)
                  * _k_bracket(t, w1, w2, w3))


def v_squared(t: Triad, params: PhysicalParams, high_frequency: bool = False,
              k_prefactor_quarter: bool = False):
    """|V|^2 = (I + J)^2 + |K|^2."""
    _check(t)
    w1, w2, w3 = _omegas(t, params, high_frequency)
    d23, d13, d12, cross = t.geometry()
    k1, k2, k3 = t.k1, t.k2, t.k3
    c23, c13, c12 = d23 / (k2 * k3), d13 / (k1 * k3), d12 / (k1 * k2)
    i_part = -params.N / (4.0 * np.sqrt(2.0 * params.g)) * (
        c23 * np.sqrt(w2 * w3 / w1) * k1
        + c13 * np.sqrt(w1 * w3 / w2) * k2
        + c12 * np.sqrt(w1 * w2 / w3) * k3)
    real = i_part
    if params.f != 0:
        real = real + params.N * params.f ** 2 / (4.0 * np.sqrt(2.0 * params.g * w1 * w2 * w3)) * (
            c23 * k1 - c13 * k2 - c12 * k3)
        kk = (_k_prefactor(params, k_prefactor_quarter) * cross / (k1 * k2 * k3)
              * _k_bracket(t, w1, w2, w3))
        return real * real + kk * kk
    return real * real
