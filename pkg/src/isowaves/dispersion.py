"""Linear internal-wave dispersion in isopycnal coordinates and the
normal-mode change of variables."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, PhysicalParams


def omega(k, m, params: PhysicalParams):
    """Frequency sqrt(f^2 + g^2 k^2 / (rho0^2 m^2 N^2)); even in m."""
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    if np.any(m == 0):
        raise DomainError("omega is undefined at m = 0")
    s = params.c * k / np.abs(m)
    return np.sqrt(params.f ** 2 + s * s)


def omega_high_frequency(k, m, params: PhysicalParams):
    """The f -> 0 form c k/|m|."""
    m = np.asarray(m, dtype=float)
    if np.any(m == 0):
        raise DomainError("omega is undefined at m = 0")
    return params.c * np.asarray(k, dtype=float) / np.abs(m)


def m_star(m, params: PhysicalParams):
    """Vertical wavenumber in depth coordinates, -rho0 N^2 m / g.

    Since d rho/dz = -rho0 N^2/g, d/dz = -(rho0 N^2/g) d/d rho; this is the
    scaling under which the depth-coordinate dispersion reproduces omega.
    """
    return -params.rho0 * params.N ** 2 * np.asarray(m, dtype=float) / params.g


def omega_eulerian(k, mz, params: PhysicalParams):
    """Dispersion written with the depth-coordinate wavenumber."""
    mz = np.asarray(mz, dtype=float)
    if np.any(mz == 0):
        raise DomainError("omega is undefined at m_* = 0")
    return np.sqrt(params.f ** 2 + params.N ** 2 * np.asarray(k, dtype=float) ** 2 / mz ** 2)


@dataclass(frozen=True)
class NormalModeCoeffs:
    f_p: np.ndarray
    omega: np.ndarray


def normal_coeffs(k, m, params: PhysicalParams) -> NormalModeCoeffs:
    """Weight f_p that diagonalizes the quadratic Hamiltonian, and omega."""
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    if np.any(k <= 0):
        raise DomainError("normal coefficients need k > 0")
    g, N, rho0, f = params.g, params.N, params.rho0, params.f
    a = g * k ** 2 / N ** 2
    b = N ** 2 * f ** 2 / (g * k ** 2) + g / (rho0 ** 2 * m ** 2)
    return NormalModeCoeffs(np.sqrt(a / b), omega(k, m, params))


def quadratic_coefficients(k, m, params: PhysicalParams):
    """Coefficients (A, B) of the quadratic form A|phi_p|^2 + B|Pi_p|^2."""
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    g, N, rho0, f = params.g, params.N, params.rho0, params.f
    A = g * k ** 2 / N ** 2
    B = N ** 2 * f ** 2 / (g * k ** 2) + g / (rho0 ** 2 * m ** 2)
    return A, B


def from_normal(a, a_minus_conj, k, m, params: PhysicalParams):
    """Fields (phi_p, Pi_p) from a_p and conj(a_{-p}).

    ``a`` and ``a_minus_conj`` are arrays over the same set of wavevectors
    p; the second holds the complex conjugate of the amplitude at -p.
    """
    c = normal_coeffs(k, m, params)
    phi = 1j / np.sqrt(2.0 * c.f_p) * (a - a_minus_conj)
    pi = np.sqrt(c.f_p / 2.0) * (a + a_minus_conj)
    return phi, pi


def to_normal(phi, pi, k, m, params: PhysicalParams):
    """Inverse of :func:`from_normal`: a_p from phi_p and Pi_p."""
    c = normal_coeffs(k, m, params)
    return (pi / np.sqrt(2.0 * c.f_p)) - 1j * np.sqrt(c.f_p / 2.0) * phi


def linear_energy(phi, pi, k, m, params: PhysicalParams):
    """Positive quadratic form 1/2 sum (A|phi|^2 + B|Pi|^2) over the given modes.

    The isopycnal Hamiltonian carries the opposite sign (Pi_0 < 0 makes it
    negative definite); see :func:`linear_hamiltonian`.
    """
    A, B = quadratic_coefficients(k, m, params)
    return 0.5 * float(np.sum(A * np.abs(phi) ** 2 + B * np.abs(pi) ** 2))


def linear_hamiltonian(phi, pi, k, m, params: PhysicalParams):
    return -linear_energy(phi, pi, k, m, params)
