"""Angle-averaged kinetic equation for internal-wave action n(k, m).

dn/dt = (1/k) * integral of (R^k_12 - R^1_k2 - R^2_1k), each term being
1/Delta * delta(omega) * f * |V|^2 * delta(m) * k k1 k2 with the delta
functions resolved on the resonant manifold (see :mod:`isowaves.manifold`).
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import (DomainError, PhysicalParams, PowerLawSpectrum, SpectralGrid,
                   WaveactionSpectrum, sample_power_law, spectrum_from_function)
from .dispersion import omega
from .manifold import QuadSettings, enumerate_manifold
from .triads import Triad, v_squared

log = logging.getLogger(__name__)

THREADS_ENV = "ISOWAVES_THREADS"


class KineticError(RuntimeError):
    """Non-finite values or unstable evolution in a kinetic computation."""


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            n = int(value)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {value!r}")
        if n < 1:
            raise DomainError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def _map(fn, items, threads):
    items = list(items)
    if threads is None:
        threads = default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def occupation_factor(n, n1, n2):
    """n1 n2 - n (n1 + n2)."""
    return n1 * n2 - n * (n1 + n2)


def equipartition_spectrum(grid: SpectralGrid, params: PhysicalParams) -> WaveactionSpectrum:
    """n = 1/omega, kept in closed form for exact off-grid evaluation."""
    return spectrum_from_function(grid, lambda k, m: 1.0 / omega(k, m, params))


@dataclass(frozen=True)
class CollisionResult:
    rate: float
    branch_contributions: tuple
    node: tuple
    normalizer: float
    n_points: int
    refinement: int

    @property
    def normalized(self) -> float:
        return self.rate / self.normalizer if self.normalizer > 0 else 0.0


class NodeKernel:
    """Spectrum-independent part of the collision integral at one target.

    Holds the manifold nodes of all three branches together with
    weight/Delta * jacobian * |V|^2 * k k1 k2, so that rates for many
    spectra cost only occupation-number evaluations.
    """

    def __init__(self, k, m, params: PhysicalParams, quad: QuadSettings,
                 grid: Optional[SpectralGrid] = None):
        self.k, self.m = float(k), abs(float(m))
        self.params = params
        self.quad = quad
        self.samples = {}
        self.kernel = {}
        for br in ("k12", "1k2"):
            s = enumerate_manifold((self.k, self.m), grid, br, params, quad)
            self.samples[br] = s
        self.samples["21k"] = self.samples["1k2"].mirrored()
        for br, s in self.samples.items():
            self.kernel[br] = self._kernel(br, s)

    def _kernel(self, br, s):
        if len(s) == 0:
            return np.empty(0)
        kk = np.full(len(s), self.k)
        mm = np.full(len(s), self.m)
        if br == "k12":
            t = Triad(kk, s.k1, s.k2, mm, s.m1, s.m2)
        elif br == "1k2":
            t = Triad(s.k1, kk, s.k2, s.m1, mm, s.m2)
        else:
            t = Triad(s.k2, s.k1, kk, s.m2, s.m1, mm)
        v2 = v_squared(t, self.params, k_prefactor_quarter=self.quad.k_prefactor_quarter)
        g = s.weight * s.inv_delta * s.jacobian * v2 * self.k * s.k1 * s.k2
        if not np.all(np.isfinite(g)):
            bad = int(np.sum(~np.isfinite(g)))
            raise KineticError(f"{bad} non-finite kernel weights at (k={self.k}, m={self.m}), branch {br}")
        return g

    @property
    def n_points(self) -> int:
        return sum(len(s) for s in self.samples.values())

    def occupations(self, spectrum, br):
        s = self.samples[br]
        ext = self.quad.extrapolate
        n = float(spectrum.evaluate(self.k, self.m, extrapolate=ext))
        n1 = spectrum.evaluate(s.k1, s.m1, extrapolate=ext)
        n2 = spectrum.evaluate(s.k2, s.m2, extrapolate=ext)
        return n, n1, n2

    def pointwise(self, spectrum):
        """Per-branch arrays (kernel*f, kernel*(|a b| + |c (a + b)|))."""
        out = {}
        for br, g in self.kernel.items():
            n, n1, n2 = self.occupations(spectrum, br)
            if br == "k12":
                c, a, b = n, n1, n2
            elif br == "1k2":
                c, a, b = n1, n, n2
            else:
                c, a, b = n2, n1, n
            f = occupation_factor(c, a, b)
            fabs = np.abs(a * b) + np.abs(c * (a + b))
            out[br] = (g * f, g * fabs)
        return out

    def rate(self, spectrum) -> CollisionResult:
        pts = self.pointwise(spectrum)
        pref = self.quad.kernel_norm / self.k
        sums = {br: math.fsum(v[0]) for br, v in pts.items()}
        norm = pref * math.fsum(math.fsum(v[1]) for v in pts.values())
        contrib = (pref * sums["k12"], -pref * sums["1k2"], -pref * sums["21k"])
        rate = math.fsum(contrib)
        if not (math.isfinite(rate) and math.isfinite(norm)):
            raise KineticError(f"non-finite collision rate at (k={self.k}, m={self.m})")
        return CollisionResult(rate, contrib, (self.k, self.m), norm, self.n_points,
                               self.quad.refinement)


def _target(spectrum, node):
    grid = spectrum.grid
    if isinstance(node, tuple) and len(node) == 2 and all(isinstance(v, (int, np.integer)) for v in node):
        i, j = node
        if not (0 <= i < grid.nk and 0 <= j < grid.nm):
            raise DomainError(f"node {node} is outside the spectrum grid {grid.shape}")
        return float(grid.k_axis[i]), float(grid.m_axis[j])
    k, m = (float(v) for v in node)
    return k, abs(m)


def collision_rate(spectrum: WaveactionSpectrum, node, params: PhysicalParams,
                   quad: Optional[QuadSettings] = None) -> CollisionResult:
    """dn/dt at one node; ``node`` is a grid index pair or a (k, m) pair."""
    quad = quad or QuadSettings()
    k, m = _target(spectrum, node)
    return NodeKernel(k, m, params, quad, spectrum.grid).rate(spectrum)


def build_kernels(nodes, params, quad, grid=None, threads=None):
    return _map(lambda km: NodeKernel(km[0], km[1], params, quad, grid), nodes, threads)


def collision_rates(spectrum: WaveactionSpectrum, params: PhysicalParams,
                    quad: Optional[QuadSettings] = None, nodes=None, threads=None):
    """Collision results at many nodes (all grid nodes by default), in order."""
    quad = quad or QuadSettings()
    grid = spectrum.grid
    if nodes is None:
        nodes = [(i, j) for i in range(grid.nk) for j in range(grid.nm)]
    kms = [_target(spectrum, nd) for nd in nodes]
    return _map(lambda km: NodeKernel(km[0], km[1], params, quad, grid).rate(spectrum), kms, threads)


def zakharov_factor(k, m, k1, m1, k2, m2, x, y):
    """1 - (k1/k)^(-6-2x) (m/m1)^(2+2y) - (k2/k)^(-6-2x) (m/m2)^(2+2y).

    Vertical wavenumbers enter through their magnitudes.
    """
    arrs = [np.asarray(v, dtype=float) for v in (k, m, k1, m1, k2, m2)]
    k, m, k1, m1, k2, m2 = arrs
    if np.any(k == 0) or np.any(m1 == 0) or np.any(m2 == 0):
        raise DomainError("zakharov_factor needs nonzero k, m1 and m2")
    a = -6.0 - 2.0 * x
    b = 2.0 + 2.0 * y
    m, m1, m2 = np.abs(m), np.abs(m1), np.abs(m2)
    with np.errstate(divide="raise"):
        try:
            return 1.0 - (k1 / k) ** a * (m / m1) ** b - (k2 / k) ** a * (m / m2) ** b
        except FloatingPointError:
            raise DomainError("degenerate point: a partner wavenumber vanishes")


# ---------------------------------------------------------------------------
# Stationarity diagnostics


@dataclass(frozen=True)
class StationarityReport:
    x: float
    y: float
    residual: float
    per_node: tuple
    convergence: tuple = ()


def _residual(results):
    r = np.array([res.normalized for res in results])
    return float(np.sqrt(np.mean(r * r)))


def stationarity_residual(spectrum, probe_nodes, params, quad=None, kernels=None,
                          threads=None, x=math.nan, y=math.nan) -> StationarityReport:
    """RMS over the probe nodes of rate/normalizer, where the normalizer is
    the same quadrature with the occupation factor replaced by
    |n1 n2| + |n (n1 + n2)|."""
    quad = quad or QuadSettings()
    if kernels is None:
        kms = [_target(spectrum, nd) for nd in probe_nodes]
        kernels = build_kernels(kms, params, quad, spectrum.grid, threads)
    results = [kern.rate(spectrum) for kern in kernels]
    return StationarityReport(x, y, _residual(results), tuple(results))


@dataclass(frozen=True)
class ScanResult:
    xs: np.ndarray
    ys: np.ndarray
    residual: np.ndarray
    reports: tuple

    @property
    def argmin(self) -> tuple:
        i, j = np.unravel_index(np.argmin(self.residual), self.residual.shape)
        return float(self.xs[i]), float(self.ys[j])

    def at(self, x, y) -> float:
        i = int(np.argmin(np.abs(self.xs - x)))
        j = int(np.argmin(np.abs(self.ys - y)))
        return float(self.residual[i, j])


def stationarity_scan(xs, ys, probe_nodes, params, quad=None, grid=None,
                      amplitude=1.0, threads=None) -> ScanResult:
    """Residual surface of power laws amplitude * k^x |m|^y over an exponent grid.

    ``probe_nodes`` are (k, m) pairs.  Box truncation needs ``grid`` (or
    explicit bounds in ``quad``); window truncation needs neither.
    """
    quad = quad or QuadSettings(truncation="window")
    if not params.high_frequency:
        log.warning("f/N = %g is above the high-frequency threshold", params.f_over_N)
    if grid is None:
        ks = [p[0] for p in probe_nodes]
        ms = [abs(p[1]) for p in probe_nodes]
        grid = SpectralGrid(np.array([min(ks) / 2, max(ks) * 2]), np.array([min(ms) / 2, max(ms) * 2]))
    kernels = build_kernels([(float(k), abs(float(m))) for k, m in probe_nodes], params, quad,
                            grid, threads)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    surf = np.empty((xs.size, ys.size))
    reports = []
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            spec = sample_power_law(grid, PowerLawSpectrum(amplitude, float(x), float(y)))
            rep = stationarity_residual(spec, None, params, quad, kernels, x=float(x), y=float(y))
            surf[i, j] = rep.residual
            reports.append(rep)
    return ScanResult(xs, ys, surf, tuple(reports))


@dataclass(frozen=True)
class LocalityRow:
    label: str
    bounds: tuple
    rate: float
    contributions: tuple
    normalizer: float


@dataclass(frozen=True)
class LocalityTable:
    rows: tuple
    tolerance: float
    mode: str = "sequence"

    @property
    def base(self) -> LocalityRow:
        return self.rows[0]

    def relative_changes(self):
        """|rate - previous rate| / |previous rate| for successive rows."""
        out = []
        for a, b in zip(self.rows[:-1], self.rows[1:]):
            out.append(abs(b.rate - a.rate) / abs(a.rate) if a.rate != 0 else math.inf)
        return out

    def changes_from_base(self):
        b = self.base.rate
        return [abs(r.rate - b) / abs(b) if b != 0 else math.inf for r in self.rows[1:]]

    @property
    def converged(self) -> bool:
        """Sequence mode compares successive extensions; each mode compares
        every single-cutoff extension with the base box."""
        changes = self.changes_from_base() if self.mode == "each" else self.relative_changes()
        return all(c < self.tolerance for c in changes)


def locality_check(law: PowerLawSpectrum, node, params: PhysicalParams, bounds,
                   factors: Sequence[float] = (4.0,), quad: Optional[QuadSettings] = None,
                   mode: str = "sequence", tolerance: float = 0.01, threads=None) -> LocalityTable:
    """Collision rate of a power law at ``node`` as box cutoffs are extended.

    mode ``"sequence"``: every cutoff is extended by each factor in turn
    (k_min/F, k_max*F, m_min/F, m_max*F).  mode ``"each"``: one cutoff at a
    time by the first factor, then all four together.
    """
    quad = quad or QuadSettings()
    klo, khi, mlo, mhi = (float(b) for b in bounds)
    k, m = float(node[0]), abs(float(node[1]))
    cases = [("base", (klo, khi, mlo, mhi))]
    if mode == "sequence":
        for F in factors:
            cases.append((f"all x{F:g}", (klo / F, khi * F, mlo / F, mhi * F)))
    elif mode == "each":
        F = float(factors[0])
        cases += [(f"k_min/{F:g}", (klo / F, khi, mlo, mhi)),
                  (f"k_max*{F:g}", (klo, khi * F, mlo, mhi)),
                  (f"m_min/{F:g}", (klo, khi, mlo / F, mhi)),
                  (f"m_max*{F:g}", (klo, khi, mlo, mhi * F)),
                  (f"all x{F:g}", (klo / F, khi * F, mlo / F, mhi * F))]
    else:
        raise DomainError(f"unknown locality mode {mode!r}")

    def one(case):
        label, b = case
        q = replace(quad, truncation="box", bounds=b)
        grid = SpectralGrid(np.array([b[0], b[1]]), np.array([b[2], b[3]]))
        res = NodeKernel(k, m, params, q, grid).rate(sample_power_law(grid, law))
        return LocalityRow(label, b, res.rate, res.branch_contributions, res.normalizer)

    rows = _map(one, cases, threads)
    return LocalityTable(tuple(rows), tolerance, mode)


# ---------------------------------------------------------------------------
# Time evolution


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    spectra: tuple
    energy: np.ndarray
    clip_events: tuple = field(default=())
    substeps: int = 0

    @property
    def energy_drift_rate(self) -> float:
        """max |E(t) - E(0)| / (E(0) t) over the run."""
        e0 = self.energy[0]
        t = self.times[1:]
        if t.size == 0 or e0 == 0:
            return 0.0
        return float(np.max(np.abs(self.energy[1:] - e0) / (abs(e0) * t)))


def energy(spectrum: WaveactionSpectrum, params: PhysicalParams) -> float:
    """E = sum of k omega n dk dm over the grid (trapezoid widths)."""
    g = spectrum.grid
    dk, dm = g.cell_widths()
    kk, mm = g.k_axis[:, None], g.m_axis[None, :]
    return float(np.sum(kk * omega(kk, mm, params) * spectrum.values * dk[:, None] * dm[None, :]))


class _GridRates:
    """Fast repeated rate evaluation for grid spectra without a closed form."""

    def __init__(self, grid, params, quad, threads):
        self.grid = grid
        nodes = [(float(grid.k_axis[i]), float(grid.m_axis[j]))
                 for i in range(grid.nk) for j in range(grid.nm)]
        self.kernels = build_kernels(nodes, params, quad, grid, threads)
        self.threads = threads

    def __call__(self, values):
        spec = WaveactionSpectrum(self.grid, values)
        res = _map(lambda kern: kern.rate(spec), self.kernels, self.threads)
        return np.array([r.rate for r in res]).reshape(self.grid.shape)


def evolve(spectrum: WaveactionSpectrum, params: PhysicalParams, quad: Optional[QuadSettings] = None,
           dt: float = 1.0, steps: int = 10, cfl: float = 0.1, energy_tolerance: float = 0.5,
           threads=None, rate_fn=None) -> Trajectory:
    """Integrate dn/dt with Heun's method.

    Each requested step of length ``dt`` is split into substeps so that
    dt_sub * max|rate/n| <= ``cfl`` over nodes with n > 0.  Negative values
    are clipped to zero and recorded; a relative energy change beyond
    ``energy_tolerance`` aborts.
    """
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if int(steps) != steps or steps < 0:
        raise DomainError("steps must be a nonnegative integer")
    quad = quad or QuadSettings()
    grid = spectrum.grid
    rates = rate_fn or _GridRates(grid, params, quad, threads)
    n = np.array(spectrum.values, dtype=float)
    e0 = energy(spectrum, params)
    times, spectra, energies, clips = [0.0], [spectrum], [e0], []
    t = 0.0
    nsub_total = 0
    for step in range(int(steps)):
        remaining = dt
        while remaining > 1e-14 * dt:
            r1 = rates(n)
            pos = n > 0
            speed = np.max(np.abs(r1[pos] / n[pos])) if np.any(pos) else 0.0
            h = remaining if speed == 0 else min(remaining, cfl / speed)
            trial = n + h * r1
            r2 = rates(np.maximum(trial, 0.0))
            new = n + 0.5 * h * (r1 + r2)
            if np.any(new < 0):
                idx = np.argwhere(new < 0)
                clips.append((t + h, tuple(map(tuple, idx.tolist()))))
                log.info("clipped %d negative values at t=%g", len(idx), t + h)
                new = np.maximum(new, 0.0)
            if not np.all(np.isfinite(new)):
                raise KineticError(f"non-finite spectrum at t={t + h}")
            n = new
            t += h
            remaining -= h
            nsub_total += 1
        spec = WaveactionSpectrum(grid, n.copy())
        e = energy(spec, params)
        if not math.isfinite(e) or (e0 > 0 and abs(e - e0) > energy_tolerance * e0):
            raise KineticError(f"energy left tolerance at step {step + 1}: E={e}, E0={e0}")
        times.append(t)
        spectra.append(spec)
        energies.append(e)
    return Trajectory(np.array(times), tuple(spectra), np.array(energies), tuple(clips), nsub_total)
