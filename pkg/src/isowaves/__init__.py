"""Hamiltonian and kinetic toolkit for long internal waves in isopycnal coordinates."""

__version__ = "0.1.0"

from .core import (DomainError, PhysicalParams, PowerLawSpectrum, SpectralGrid, Wavevector,
                   WaveactionSpectrum, make_log_grid, sample_power_law, spectrum_from_function)
from .dispersion import m_star, normal_coeffs, omega
from .triads import Triad, I_term, J_term, K_term, v_squared
from .manifold import QuadSettings, enumerate_manifold, solve_k2, triangle_kernel
from .kinetic import (CollisionResult, StationarityReport, collision_rate, evolve, locality_check,
                      occupation_factor, stationarity_scan, zakharov_factor)

__all__ = [
    "DomainError", "PhysicalParams", "PowerLawSpectrum", "SpectralGrid", "Wavevector",
    "WaveactionSpectrum", "make_log_grid", "sample_power_law", "spectrum_from_function",
    "m_star", "normal_coeffs", "omega", "Triad", "I_term", "J_term", "K_term", "v_squared",
    "QuadSettings", "enumerate_manifold", "solve_k2", "triangle_kernel", "CollisionResult",
    "StationarityReport", "collision_rate", "evolve", "locality_check", "occupation_factor",
    "stationarity_scan", "zakharov_factor", "__version__",
]
