"""Shared value types: physical parameters, wavevectors, log grids and spectra."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

HIGH_FREQUENCY_THRESHOLD = 0.01


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a formula."""


@dataclass(frozen=True)
class PhysicalParams:
    """Coriolis parameter ``f``, gravity ``g``, buoyancy frequency ``N`` and
    reference density ``rho0`` (SI units unless the caller nondimensionalizes)."""

    f: float = 1.0e-4
    g: float = 9.81
    N: float = 5.0e-3
    rho0: float = 1025.0

    def __post_init__(self):
        for name in ("f", "g", "N", "rho0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.f < 0:
            raise DomainError(f"f must be >= 0, got {self.f!r}")
        for name in ("g", "N", "rho0"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)!r}")

    @property
    def f_over_N(self) -> float:
        return self.f / self.N

    @property
    def high_frequency(self) -> bool:
        """True when f/N is at or below the oceanic 1/100 threshold."""
        return self.f_over_N <= HIGH_FREQUENCY_THRESHOLD

    @property
    def c(self) -> float:
        """Speed g/(N rho0) relating omega to k/|m| when f = 0."""
        return self.g / (self.N * self.rho0)


@dataclass(frozen=True)
class Wavevector:
    """Horizontal magnitude ``k`` >= 0 and signed vertical wavenumber ``m``
    (conjugate to density)."""

    k: float
    m: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and math.isfinite(self.m)):
            raise DomainError("wavevector components must be finite")
        if self.k < 0:
            raise DomainError(f"k must be >= 0, got {self.k!r}")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Logarithmically spaced nodes in k and in |m|."""

    k_axis: np.ndarray
    m_axis: np.ndarray

    def __post_init__(self):
        for name in ("k_axis", "m_axis"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 1 or a.size < 2:
                raise DomainError(f"{name} needs at least two nodes")
            if not np.all(np.isfinite(a)) or a[0] <= 0:
                raise DomainError(f"{name} must be positive and finite")
            if np.any(np.diff(a) <= 0):
                raise DomainError(f"{name} must be strictly increasing")
            r = np.diff(np.log(a))
            if not np.allclose(r, r[0], rtol=1e-9, atol=0):
                raise DomainError(f"{name} must have constant log spacing")
            object.__setattr__(self, name, _frozen(a))

    @property
    def nk(self) -> int:
        return self.k_axis.size

    @property
    def nm(self) -> int:
        return self.m_axis.size

    @property
    def shape(self) -> tuple:
        return (self.nk, self.nm)

    @property
    def k_ratio(self) -> float:
        return float(self.k_axis[1] / self.k_axis[0])

    @property
    def m_ratio(self) -> float:
        return float(self.m_axis[1] / self.m_axis[0])

    @property
    def bounds(self) -> tuple:
        """(k_min, k_max, m_min, m_max)."""
        return (float(self.k_axis[0]), float(self.k_axis[-1]),
                float(self.m_axis[0]), float(self.m_axis[-1]))

    def node(self, i: int, j: int) -> Wavevector:
        return Wavevector(float(self.k_axis[i]), float(self.m_axis[j]))

    def cell_widths(self):
        """Trapezoid widths (dk, dm) of every node, used for energy sums."""
        return _trap_widths(self.k_axis), _trap_widths(self.m_axis)

    def scaled(self, lam_k: float, lam_m: float) -> "SpectralGrid":
        return SpectralGrid(self.k_axis * lam_k, self.m_axis * lam_m)

    def __eq__(self, other):
        return (isinstance(other, SpectralGrid)
                and np.array_equal(self.k_axis, other.k_axis)
                and np.array_equal(self.m_axis, other.m_axis))

    def __hash__(self):
        return hash((self.k_axis.tobytes(), self.m_axis.tobytes()))


def _trap_widths(a):
    w = np.empty_like(a)
    w[1:-1] = 0.5 * (a[2:] - a[:-2])
    w[0] = 0.5 * (a[1] - a[0])
    w[-1] = 0.5 * (a[-1] - a[-2])
    return w


def _log_axis(lo, hi, n, name):
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0 or hi <= lo:
        raise DomainError(f"{name} range must satisfy 0 < min < max, got ({lo}, {hi})")
    if int(n) != n or n < 2:
        raise DomainError(f"{name} node count must be an integer >= 2, got {n}")
    a = np.exp(np.linspace(math.log(lo), math.log(hi), int(n)))
    a[0], a[-1] = lo, hi
    return a


def make_log_grid(k_min, k_max, nk, m_min, m_max, nm) -> SpectralGrid:
    return SpectralGrid(_log_axis(k_min, k_max, nk, "k"), _log_axis(m_min, m_max, nm, "m"))


@dataclass(frozen=True)
class PowerLawSpectrum:
    """n(k, m) = amplitude * k**x * |m|**y."""

    amplitude: float = 1.0
    x: float = -3.5
    y: float = -0.5

    def __post_init__(self):
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise DomainError("amplitude must be positive and finite")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError("exponents must be finite")

    def __call__(self, k, m):
        k = np.asarray(k, dtype=float)
        m = np.abs(np.asarray(m, dtype=float))
        return self.amplitude * k ** self.x * m ** self.y


@dataclass(frozen=True, eq=False)
class WaveactionSpectrum:
    """Wave action on a grid.

    Off-grid values come from bilinear interpolation of log n in (log k, log m),
    with power-law extrapolation using the boundary slope.  When the spectrum
    was built from a closed-form law, ``source`` holds it and is used instead
    so analytic identities survive off the grid.  Spectra are even in m.
    """

    grid: SpectralGrid
    values: np.ndarray
    source: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise DomainError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("spectrum values must be finite")
        if np.any(v < 0):
            raise DomainError("spectrum values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        with np.errstate(divide="ignore"):
            lv = np.log(v)
        lv.setflags(write=False)
        object.__setattr__(self, "_logv", lv)

    def with_values(self, values) -> "WaveactionSpectrum":
        return WaveactionSpectrum(self.grid, values)

    def evaluate(self, k, m, extrapolate: bool = True):
        k = np.asarray(k, dtype=float)
        m = np.abs(np.asarray(m, dtype=float))
        if self.source is not None:
            return np.asarray(self.source(k, m), dtype=float)
        out = _log_bilinear(self.grid, self._logv, k, m)
        if not extrapolate:
            kmin, kmax, mmin, mmax = self.grid.bounds
            outside = (k < kmin) | (k > kmax) | (m < mmin) | (m > mmax)
            out = np.where(outside, 0.0, out)
        return out

    __call__ = evaluate


def _axis_coords(axis, x):
    """Cell index and fractional log position; positions beyond the ends
    give fractions outside [0, 1] (linear extrapolation of log n)."""
    la = np.log(axis)
    h = la[1] - la[0]
    with np.errstate(divide="ignore"):
        s = (np.log(x) - la[0]) / h
    i = np.clip(np.floor(s), 0, axis.size - 2).astype(np.intp)
    return i, s - i


def _log_bilinear(grid, logv, k, m):
    k, m = np.broadcast_arrays(k, m)
    i, t = _axis_coords(grid.k_axis, k)
    j, u = _axis_coords(grid.m_axis, m)
    # An exact node hit or a zero corner with positive weight must give an
    # exact answer, so corners with zero weight are skipped entirely.
    acc = np.zeros(k.shape)
    dead = np.zeros(k.shape, dtype=bool)
    for di, wi in ((0, 1.0 - t), (1, t)):
        for dj, wj in ((0, 1.0 - u), (1, u)):
            w = wi * wj
            lv = logv[i + di, j + dj]
            active = w != 0
            dead |= active & np.isneginf(lv)
            with np.errstate(invalid="ignore"):
                acc += np.where(active & np.isfinite(lv), w * lv, 0.0)
    return np.where(dead, 0.0, np.exp(acc))


def sample_power_law(grid: SpectralGrid, law: PowerLawSpectrum) -> WaveactionSpectrum:
    values = law(grid.k_axis[:, None], grid.m_axis[None, :])
    return WaveactionSpectrum(grid, values, source=law)


def spectrum_from_function(grid: SpectralGrid, fn: Callable) -> WaveactionSpectrum:
    """Sample ``fn(k, m)`` on the grid and keep it for exact off-grid use."""
    values = fn(grid.k_axis[:, None], grid.m_axis[None, :])
    return WaveactionSpectrum(grid, np.broadcast_to(values, grid.shape), source=fn)
