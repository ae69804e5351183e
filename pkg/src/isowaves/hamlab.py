"""Pseudo-spectral laboratory for the canonical (eta, phi) wave models.

All models share one structure.  With h0 the rest depth (shallow water) or
rest stratification Pi0 (internal waves), eta the deviation from it and
q0 h0 = f,

    u   = grad phi + perp-grad invlap(q0 eta)
    H   = 1/2 sum (h0 [+ eta]) |u|^2 dV + PE(eta)
    PE  = 1/2 eta^2                              (shallow water)
    PE  = -g/(2 rho0^2) |antideriv_rho(eta)|^2   (internal waves)

and the evolution is eta_t = dH/dphi, phi_t = -dH/deta.  Linear models keep
h0 in the kinetic term.  Domains are periodic in every direction (x, y and,
for internal waves, the density coordinate rho).  Every field is projected
onto the 2/3-rule band before products are formed, so the tendencies are
the exact gradient of the discrete Hamiltonian.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import DomainError, PhysicalParams
from .dispersion import omega as iw_omega


class ModelKind(enum.Enum):
    LinearSW = "LinearSW"
    NonlinearSW = "NonlinearSW"
    RotatingLinearSW = "RotatingLinearSW"
    RotatingNonlinearSW = "RotatingNonlinearSW"
    InternalWaves = "InternalWaves"
    RotatingInternalWaves = "RotatingInternalWaves"

    @property
    def linear(self) -> bool:
        return self in (ModelKind.LinearSW, ModelKind.RotatingLinearSW)

    @property
    def internal(self) -> bool:
        return self in (ModelKind.InternalWaves, ModelKind.RotatingInternalWaves)

    @property
    def rotating(self) -> bool:
        return self in (ModelKind.RotatingLinearSW, ModelKind.RotatingNonlinearSW,
                        ModelKind.RotatingInternalWaves)

    @property
    def ndim(self) -> int:
        return 3 if self.internal else 2


class StratificationError(RuntimeError):
    """The layer thickness or stratification changed sign."""


class ZeroModeError(ValueError):
    """An inverse Laplacian was applied to a field with nonzero mean."""


class BlowUpError(RuntimeError):
    """Non-finite values appeared during integration."""


@dataclass(frozen=True)
class HamModel:
    """A model kind plus its constants.

    Shallow-water models are nondimensional (gravity and rest depth 1); the
    rotating ones use ``f`` (default 1).  Internal-wave models use ``f``,
    ``g``, ``N`` and ``rho0``; ``pi0_profile`` optionally gives a layered
    rest stratification Pi0(rho) < 0 (default -g/N^2), and q0 = f/Pi0.
    """

    kind: ModelKind
    f: Optional[float] = None
    g: float = 1.0
    N: float = 1.0
    rho0: float = 1.0
    pi0_profile: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, ModelKind) else ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.f is None:
            object.__setattr__(self, "f", (1.0 if not kind.internal else 0.5) if kind.rotating else 0.0)
        if not kind.rotating and self.f != 0:
            raise DomainError(f"{kind.value} is non-rotating; f must be 0")
        if self.f < 0 or not math.isfinite(self.f):
            raise DomainError("f must be finite and >= 0")
        for name in ("g", "N", "rho0"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be positive and finite")
        if self.pi0_profile is not None and not kind.internal:
            raise DomainError("pi0_profile applies to internal-wave models only")

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(f=self.f, g=self.g, N=self.N, rho0=self.rho0)

    def h0(self, grid: "PeriodicGrid"):
        """Rest thickness (shallow water) or Pi0 (internal waves), broadcastable."""
        if not self.kind.internal:
            return 1.0
        if self.pi0_profile is None:
            return -self.g / self.N ** 2
        p = np.asarray(self.pi0_profile(grid.axes[2]), dtype=float).reshape(1, 1, -1)
        if np.any(p >= 0):
            raise StratificationError("Pi0 must be negative at every level")
        return p

    def q0(self, grid: "PeriodicGrid"):
        return self.f / self.h0(grid)


@dataclass(frozen=True, eq=False)
class PeriodicGrid:
    """Collocation grid on a periodic box; axes are (x, y) or (x, y, rho)."""

    shape: tuple
    lengths: tuple

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        lengths = tuple(float(L) for L in self.lengths)
        if len(shape) not in (2, 3) or len(lengths) != len(shape):
            raise DomainError("grids are 2-D (x, y) or 3-D (x, y, rho)")
        if any(n < 4 or n % 2 for n in shape):
            raise DomainError("grid sizes must be even and >= 4")
        if any(not (L > 0) for L in lengths):
            raise DomainError("box lengths must be positive")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lengths", lengths)
        nd = len(shape)
        wav, idx = [], []
        for ax, (n, L) in enumerate(zip(shape, lengths)):
            j = np.fft.rfftfreq(n) * n if ax == nd - 1 else np.fft.fftfreq(n) * n
            sh = [1] * nd
            sh[ax] = j.size
            wav.append((2 * np.pi / L * j).reshape(sh))
            idx.append(j.reshape(sh))
        mask = np.ones([w.shape[a] for a, w in enumerate(wav)], dtype=bool)
        for ax, j in enumerate(idx):
            mask = mask & (3 * np.abs(j) < shape[ax])
        kh2 = wav[0] ** 2 + wav[1] ** 2
        with np.errstate(divide="ignore"):
            inv_lap = np.where(kh2 > 0, -1.0 / np.where(kh2 > 0, kh2, 1.0), 0.0)
        object.__setattr__(self, "_k", wav)
        object.__setattr__(self, "_mask", mask)
        object.__setattr__(self, "_inv_lap", inv_lap)
        if nd == 3:
            m = wav[2]
            with np.errstate(divide="ignore"):
                inv_d2 = np.where(m != 0, -1.0 / np.where(m != 0, m * m, 1.0), 0.0)
                inv_d = np.where(m != 0, 1.0 / (1j * np.where(m != 0, m, 1.0)), 0.0)
            object.__setattr__(self, "_inv_d", inv_d)
            object.__setattr__(self, "_inv_d2", inv_d2)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([L / n for L, n in zip(self.lengths, self.shape)]))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def axes(self):
        return [np.arange(n) * (L / n) for n, L in zip(self.shape, self.lengths)]

    def mesh(self):
        return np.meshgrid(*self.axes, indexing="ij")

    def fft(self, a):
        return np.fft.rfftn(a)

    def ifft(self, a):
        return np.fft.irfftn(a, s=self.shape, axes=tuple(range(len(self.shape))))

    def project(self, a):
        return self.ifft(self.fft(a) * self._mask)

    def grad(self, a_hat):
        return self.ifft(1j * self._k[0] * a_hat), self.ifft(1j * self._k[1] * a_hat)

    def div(self, vx, vy):
        return self.ifft(1j * self._k[0] * self.fft(vx) + 1j * self._k[1] * self.fft(vy))

    def inner(self, a, b) -> float:
        return float(np.sum(a * b)) * self.cell_volume


@dataclass(frozen=True, eq=False)
class FieldState:
    """Conjugate pair on a periodic grid.

    ``eta`` is h - 1 for shallow-water models and Pi - Pi0 for internal-wave
    models; ``phi`` is the velocity potential.
    """

    grid: PeriodicGrid
    eta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        for name in ("eta", "phi"):
            a = np.asarray(getattr(self, name))
            if a.shape != self.grid.shape:
                raise DomainError(f"{name} has shape {a.shape}, grid is {self.grid.shape}")
            if np.iscomplexobj(a):
                if np.max(np.abs(a.imag)) > 1e-12 * max(np.max(np.abs(a.real)), 1e-300):
                    raise DomainError(f"{name} must be real")
                a = a.real
            a = np.array(a, dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __add__(self, other):
        return FieldState(self.grid, self.eta + other.eta, self.phi + other.phi)

    def scaled(self, s: float) -> "FieldState":
        return FieldState(self.grid, s * self.eta, s * self.phi)

    def axpy(self, s: float, other: "FieldState") -> "FieldState":
        return FieldState(self.grid, self.eta + s * other.eta, self.phi + s * other.phi)

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "FieldState":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))


def _check_model(state: FieldState, model: HamModel):
    if state.grid.ndim != model.kind.ndim:
        raise DomainError(f"{model.kind.value} needs a {model.kind.ndim}-D grid")


def _prepare(state: FieldState, model: HamModel, check_sign: bool = True):
    """Dealiased eta, kinetic thickness, q0 and velocity components."""
    _check_model(state, model)
    g = state.grid
    eta = g.project(state.eta)
    phi_hat = g.fft(state.phi) * g._mask
    h0 = model.h0(g)
    q0 = model.q0(g)
    hk = h0 if model.kind.linear else h0 + eta
    if check_sign and not model.kind.linear:
        if not model.kind.internal and np.any(hk <= 0):
            raise StratificationError(f"layer thickness 1 + eta reached {float(np.min(hk)):.3g} <= 0")
        if model.kind.internal and np.any(hk >= 0):
            raise StratificationError(f"Pi0 + Pi reached {float(np.max(hk)):.3g} >= 0")
    ux, uy = g.grad(phi_hat)
    if model.f != 0:
        src = q0 * eta
        mean = np.mean(src, axis=(0, 1))
        # q0 Pi - f is measured against f itself, so states passing through
        # eta = 0 are not flagged for roundoff-level means
        scale = model.f + float(np.max(np.abs(src)))
        if check_sign and np.max(np.abs(mean)) > 1e-10 * scale:
            raise ZeroModeError("inverse Laplacian applied to q0*Pi - f with nonzero horizontal mean")
        chi_hat = g.fft(src) * g._inv_lap
        cx, cy = g.grad(chi_hat)
        # perp-grad chi = (-chi_y, chi_x)
        ux, uy = ux - cy, uy + cx
    return eta, hk, q0, ux, uy


def hamiltonian(state: FieldState, model: HamModel) -> float:
    """Discrete Hamiltonian (box quadrature, exact for the dealiased fields)."""
    g = state.grid
    eta, hk, _, ux, uy = _prepare(state, model)
    ke = 0.5 * np.sum(hk * (ux * ux + uy * uy))
    if model.kind.internal:
        d = g.ifft(g.fft(eta) * g._inv_d)
        pe = -0.5 * model.g / model.rho0 ** 2 * np.sum(d * d)
    else:
        pe = 0.5 * np.sum(eta * eta)
    return float((ke + pe) * g.cell_volume)


def rhs(state: FieldState, model: HamModel) -> FieldState:
    """Tendencies (eta_t, phi_t) = (dH/dphi, -dH/deta)."""
    return _rhs(state, model, True)


def _rhs(state, model, checks):
    g = state.grid
    eta, hk, q0, ux, uy = _prepare(state, model, checks)
    fx, fy = hk * ux, hk * uy
    eta_t = -g.div(fx, fy)
    dh_deta = np.zeros(g.shape)
    if not model.kind.linear:
        dh_deta = dh_deta + 0.5 * (ux * ux + uy * uy)
    if model.f != 0:
        # q0 invlap div(h u_perp), u_perp = (-u_y, u_x)
        dv = g.fft(g.div(-fy, fx)) * g._inv_lap
        dh_deta = dh_deta + q0 * g.ifft(dv)
    if model.kind.internal:
        dh_deta = dh_deta + model.g / model.rho0 ** 2 * g.ifft(g.fft(eta) * g._inv_d2)
    else:
        dh_deta = dh_deta + eta
    out = FieldState(g, g.project(eta_t), -g.project(dh_deta))
    if not (np.all(np.isfinite(out.eta)) and np.all(np.isfinite(out.phi))):
        raise BlowUpError("non-finite tendency")
    return out


def functional_derivative_check(state: FieldState, model: HamModel, direction: FieldState,
                                steps=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6)) -> float:
    """Minimum over ``steps`` of the relative difference between the
    directional derivative built from :func:`rhs` and a central difference
    of :func:`hamiltonian`."""
    g = state.grid
    t = rhs(state, model)
    # dH/dphi = eta_t and dH/deta = -phi_t
    exact = g.inner(t.eta, direction.phi) - g.inner(t.phi, direction.eta)
    best = math.inf
    for eps in steps:
        hp = hamiltonian(state.axpy(eps, direction), model)
        hm = hamiltonian(state.axpy(-eps, direction), model)
        fd = (hp - hm) / (2 * eps)
        denom = max(abs(exact), abs(fd), 1e-300)
        best = min(best, abs(fd - exact) / denom)
    return best


# ---------------------------------------------------------------------------
# States


def random_smooth_state(grid: PeriodicGrid, amplitude: float, rng: np.random.Generator,
                        max_mode: int = 3, decay: float = 1.0) -> FieldState:
    """Random real fields built from low Fourier modes, with zero horizontal
    mean on every level (required whenever q0 != 0)."""
    def field_():
        hat = np.zeros(np.fft.rfftn(np.zeros(grid.shape)).shape, dtype=complex)
        sl = []
        for ax, n in enumerate(grid.shape):
            j = np.fft.rfftfreq(n) * n if ax == grid.ndim - 1 else np.fft.fftfreq(n) * n
            sl.append(j)
        J = np.meshgrid(*sl, indexing="ij")
        r2 = sum(j * j for j in J)
        sel = np.all([np.abs(j) <= max_mode for j in J], axis=0) & (r2 > 0)
        sel &= ~((J[0] == 0) & (J[1] == 0))
        n_sel = int(sel.sum())
        hat[sel] = (rng.standard_normal(n_sel) + 1j * rng.standard_normal(n_sel)) * \
            np.exp(-decay * r2[sel] / max_mode ** 2)
        a = np.fft.irfftn(hat, s=grid.shape, axes=tuple(range(grid.ndim)))
        return amplitude * a / max(np.max(np.abs(a)), 1e-300)
    return FieldState(grid, field_(), field_())


def plane_wave_state(grid: PeriodicGrid, mode, amplitude: float) -> FieldState:
    """eta = amplitude cos(k . x) for integer mode numbers, phi = 0."""
    X = grid.mesh()
    ph = sum(2 * np.pi * j / L * x for j, L, x in zip(mode, grid.lengths, X))
    return FieldState(grid, amplitude * np.cos(ph), np.zeros(grid.shape))


def expected_frequency(model: HamModel, grid: PeriodicGrid, mode) -> float:
    k = [2 * np.pi * j / L for j, L in zip(mode, grid.lengths)]
    kh = math.hypot(k[0], k[1])
    if model.kind.internal:
        return float(iw_omega(kh, k[2], model.params))
    return math.sqrt(model.f ** 2 + kh * kh)


# ---------------------------------------------------------------------------
# Time integration


@dataclass(frozen=True)
class HamTrajectory:
    times: np.ndarray
    energy: np.ndarray
    snapshots: tuple
    records: np.ndarray
    final: FieldState

    @property
    def max_relative_drift(self) -> float:
        e0 = self.energy[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return float(np.max(np.abs(self.energy - e0)) / scale)


def _rk4(state, model, dt):
    k1 = rhs(state, model)
    k2 = rhs(state.axpy(0.5 * dt, k1), model)
    k3 = rhs(state.axpy(0.5 * dt, k2), model)
    k4 = rhs(state.axpy(dt, k3), model)
    g = state.grid
    eta = state.eta + dt / 6.0 * (k1.eta + 2 * k2.eta + 2 * k3.eta + k4.eta)
    phi = state.phi + dt / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi)
    return FieldState(g, eta, phi)


def _linear_symbols(model: HamModel, grid: PeriodicGrid):
    """Per-mode 2x2 matrices of a linear model, read off from impulse responses."""
    delta = np.zeros(grid.shape)
    delta[(0,) * grid.ndim] = 1.0 / grid.cell_volume
    z = np.zeros(grid.shape)
    # impulses are not mean-free; the zero modes simply come out as-is
    r_eta = _rhs(FieldState(grid, delta, z), model, False)
    r_phi = _rhs(FieldState(grid, z, delta), model, False)
    s = grid.cell_volume
    M = np.empty(grid._mask.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = grid.fft(r_eta.eta) * s
    M[..., 1, 0] = grid.fft(r_eta.phi) * s
    M[..., 0, 1] = grid.fft(r_phi.eta) * s
    M[..., 1, 1] = grid.fft(r_phi.phi) * s
    return M


class _LinearMidpoint:
    def __init__(self, model, grid, dt):
        M = _linear_symbols(model, grid)
        I = np.eye(2)
        A = I - 0.5 * dt * M
        B = I + 0.5 * dt * M
        self.G = np.linalg.solve(A, B)
        self.grid = grid

    def __call__(self, state):
        g = self.grid
        x = np.stack([g.fft(state.eta), g.fft(state.phi)], axis=-1)
        y = np.einsum("...ij,...j->...i", self.G, x)
        return FieldState(g, g.ifft(y[..., 0]), g.ifft(y[..., 1]))


def _nonlinear_midpoint(state, model, dt, tol=1e-14, max_iter=100):
    nxt = _rk4(state, model, dt)
    for _ in range(max_iter):
        mid = FieldState(state.grid, 0.5 * (state.eta + nxt.eta), 0.5 * (state.phi + nxt.phi))
        new = state.axpy(dt, rhs(mid, model))
        diff = max(np.max(np.abs(new.eta - nxt.eta)), np.max(np.abs(new.phi - nxt.phi)))
        scale = max(np.max(np.abs(new.eta)), np.max(np.abs(new.phi)), 1e-300)
        nxt = new
        if diff <= tol * scale:
            break
    return nxt


def integrate(state: FieldState, model: HamModel, dt: float, steps: int, scheme: str = "rk4",
              snapshot_every: int = 0, record: Optional[Callable] = None,
              energy_every: int = 1) -> HamTrajectory:
    """Advance the canonical equations; ``scheme`` is ``"rk4"`` or ``"midpoint"``.

    ``record(state)`` (if given) is evaluated at every step, including t = 0.
    """
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if int(steps) != steps or steps < 0:
        raise DomainError("steps must be a nonnegative integer")
    if scheme not in ("rk4", "midpoint"):
        raise DomainError(f"unknown scheme {scheme!r}")
    _check_model(state, model)
    stepper = None
    if scheme == "midpoint" and model.kind.linear:
        stepper = _LinearMidpoint(model, state.grid, dt)
    times, energy, snaps, recs = [0.0], [hamiltonian(state, model)], [state], []
    if record is not None:
        recs.append(record(state))
    s = state
    for n in range(1, int(steps) + 1):
        if scheme == "rk4":
            s = _rk4(s, model, dt)
        elif stepper is not None:
            s = stepper(s)
        else:
            s = _nonlinear_midpoint(s, model, dt)
        if not (np.all(np.isfinite(s.eta)) and np.all(np.isfinite(s.phi))):
            raise BlowUpError(f"non-finite fields at step {n}")
        if record is not None:
            recs.append(record(s))
        if energy_every and (n % energy_every == 0 or n == steps):
            times.append(n * dt)
            energy.append(hamiltonian(s, model))
        if snapshot_every and n % snapshot_every == 0:
            snaps.append(s)
    return HamTrajectory(np.array(times), np.array(energy), tuple(snaps), np.array(recs), s)


def measure_frequency(model: HamModel, grid: PeriodicGrid, mode, amplitude: float = 1e-3,
                      periods: float = 3.0, steps_per_period: int = 200,
                      scheme: str = "rk4") -> tuple:
    """(measured, expected) angular frequency of a standing plane wave.

    The projection of eta on the initial cosine oscillates as cos(omega t);
    omega is read from the spacing of its zero crossings.
    """
    w0 = expected_frequency(model, grid, mode)
    state = plane_wave_state(grid, mode, amplitude)
    basis = state.eta / amplitude
    norm = float(np.sum(basis * basis))
    dt = 2 * np.pi / w0 / steps_per_period
    steps = int(math.ceil(periods * steps_per_period))
    tr = integrate(state, model, dt, steps, scheme, record=lambda s: float(np.sum(s.eta * basis)) / norm,
                   energy_every=0)
    a = tr.records
    t = np.arange(a.size) * dt
    idx = np.nonzero(np.signbit(a[:-1]) != np.signbit(a[1:]))[0]
    if idx.size < 2:
        raise DomainError("too few zero crossings; integrate for more periods")
    tc = t[idx] - a[idx] * dt / (a[idx + 1] - a[idx])
    measured = math.pi * (tc.size - 1) / (tc[-1] - tc[0])
    return measured, w0
