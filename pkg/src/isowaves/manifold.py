"""Resonant manifold of the angle-averaged kinetic equation.

For a target wave p = (k, m) the two delta functions (in m and in omega) are
resolved analytically: m2 follows from the vertical resonance and k2 from
inverting the dispersion relation.  The remaining free variables (k1, m1)
are integrated with

* composite Gauss-Legendre panels in log|m1| whose ends sit where the
  active constraint bounding the k1 interval changes (so every panel sees a
  smooth integrand), and
* Gauss-Legendre in an angle variable theta on k1 = c + r cos(theta), where
  [c - r, c + r] is the interval on which the triangle exists.  The
  substitution absorbs the inverse-square-root singularity of 1/Delta at
  the triangle edges.

Three branches are produced.  ``"k12"``: p = p1 + p2.  ``"1k2"``:
p1 = p + p2.  ``"21k"``: p2 = p1 + p, generated by relabelling the ``"1k2"``
nodes so mirrored terms share their discretization exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import DomainError, PhysicalParams, SpectralGrid, Wavevector
from .dispersion import omega
from .triads import triangle_delta

BRANCHES = ("k12", "1k2", "21k")
GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class QuadSettings:
    """Quadrature and truncation settings for manifold integrals.

    truncation:
        ``"box"`` keeps k1, k2 in [k_lo, k_hi] and |m1|, |m2| in
        [m_lo, m_hi] (the grid bounds unless ``bounds`` is given).
        ``"window"`` instead keeps every ratio among {k, k1, k2} and among
        {|m|, |m1|, |m2|} inside [1/window, window]; that domain is mapped
        onto itself by the Zakharov transformation.
    refinement:
        each level doubles ``n_theta`` and ``n_gauss``.
    """

    n_theta: int = 24
    n_gauss: int = 12
    max_panel: float = 0.25
    n_scan: int = 1500
    refinement: int = 0
    truncation: str = "box"
    window: float = 30.0
    bounds: Optional[tuple] = None
    edge_mapping: bool = True
    mixed_sign: bool = True
    kernel_norm: float = 1.0
    k_prefactor_quarter: bool = False
    extrapolate: bool = True

    def __post_init__(self):
        if self.truncation not in ("box", "window"):
            raise DomainError(f"truncation must be 'box' or 'window', got {self.truncation!r}")
        for name in ("n_theta", "n_gauss", "n_scan"):
            if int(getattr(self, name)) < 2:
                raise DomainError(f"{name} must be >= 2")
        if self.refinement < 0:
            raise DomainError("refinement must be >= 0")
        if not self.max_panel > 0:
            raise DomainError("max_panel must be > 0")
        if not self.window > 1:
            raise DomainError("window must be > 1")
        if self.bounds is not None:
            klo, khi, mlo, mhi = self.bounds
            if not (0 < klo < khi and 0 < mlo < mhi):
                raise DomainError("bounds must satisfy 0 < lo < hi")
        if not self.kernel_norm > 0:
            raise DomainError("kernel_norm must be > 0")

    @property
    def nodes_theta(self) -> int:
        return int(self.n_theta) * 2 ** int(self.refinement)

    @property
    def nodes_gauss(self) -> int:
        return int(self.n_gauss) * 2 ** int(self.refinement)

    def refined(self, levels: int = 1) -> "QuadSettings":
        return replace(self, refinement=self.refinement + levels)


@dataclass(frozen=True)
class ResonantPoint:
    k: float
    m: float
    k1: float
    m1: float
    k2: float
    m2: float
    jacobian: float
    branch: str


@dataclass(frozen=True)
class ManifoldSample:
    """Quadrature nodes on the resonant manifold of one target and branch.

    For branch ``"k12"`` the triangle is (k; k1, k2); for ``"1k2"`` it is
    (k1; k, k2) and for ``"21k"`` (k2; k1, k).  ``jacobian`` is
    |d omega / d k|^-1 of the wave solved from the frequency resonance and
    ``weight`` the quadrature weight of dk dm over the free variables with
    the edge substitution folded in, so that an integral of F over the
    manifold measure is ``sum(weight * inv_delta * jacobian * F)``.
    """

    k: float
    m: float
    branch: str
    k1: np.ndarray
    m1: np.ndarray
    k2: np.ndarray
    m2: np.ndarray
    jacobian: np.ndarray
    inv_delta: np.ndarray
    weight: np.ndarray

    def __len__(self) -> int:
        return int(self.k1.size)

    @property
    def measure(self) -> float:
        return float(np.sum(self.weight * self.inv_delta * self.jacobian))

    def points(self) -> Iterator[ResonantPoint]:
        for i in range(len(self)):
            yield ResonantPoint(self.k, self.m, float(self.k1[i]), float(self.m1[i]),
                                float(self.k2[i]), float(self.m2[i]),
                                float(self.jacobian[i]), self.branch)

    def mirrored(self) -> "ManifoldSample":
        """Relabel a ``"1k2"`` sample as the ``"21k"`` branch."""
        if self.branch != "1k2":
            raise DomainError("only the '1k2' branch has a mirror image")
        return ManifoldSample(self.k, self.m, "21k", self.k2, self.m2, self.k1, self.m1,
                              self.jacobian, self.inv_delta, self.weight)


def solve_k2(omega_target, m2, params: PhysicalParams):
    """k2 >= 0 with omega(k2, m2) = omega_target, and |d omega/d k2|^-1.

    Off-manifold targets (omega_target < f) give NaN; omega_target = f gives
    k2 = 0 with an infinite jacobian.
    """
    w = np.asarray(omega_target, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    if np.any(m2 == 0):
        raise DomainError("m2 must be nonzero")
    c, f = params.c, params.f
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(w >= f, (w - f) * (w + f), np.nan)
        k2 = np.abs(m2) * np.sqrt(s) / c
        jac = m2 * m2 * w / (c * c * k2)
    return k2, jac


def triangle_kernel(k, k1, k2):
    """1/Delta for the triangle (k, k1, k2).

    Zero where no triangle exists and +inf on the degenerate boundary.
    """
    k = np.asarray(k, dtype=float)
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    if np.any(k < 0) or np.any(k1 < 0) or np.any(k2 < 0):
        raise DomainError("triangle sides must be nonnegative")
    d = triangle_delta(k, k1, k2)
    with np.errstate(divide="ignore"):
        out = np.where(np.isnan(d), 0.0, 1.0 / np.where(np.isnan(d), 1.0, d))
    return out


# ---------------------------------------------------------------------------
# Constraint geometry at fixed m1.
#
# Every constraint is written g(k1) >= 0 and is either monotone or concave in
# k1, so their minimum is quasi-concave and its superlevel set an interval.


class _Sector:
    """Free-variable geometry for one branch at fixed arrays of m1."""

    def __init__(self, k, m, branch, m1, params, cuts):
        self.k, self.m, self.branch = k, m, branch
        self.params = params
        self.c = params.c
        self.f = params.f
        self.w = float(omega(k, m, params))
        self.cuts = cuts
        self.set_m1(m1)

    def set_m1(self, m1):
        self.m1 = np.asarray(m1, dtype=float)
        self.m2 = (self.m - self.m1) if self.branch == "k12" else (self.m1 - self.m)
        self.a1 = np.abs(self.m1)
        self.a2 = np.abs(self.m2)

    def subset(self, idx):
        out = object.__new__(_Sector)
        out.__dict__.update(self.__dict__)
        out.set_m1(self.m1[idx])
        return out

    # -- k2 as a function of k1 -------------------------------------------
    def freq_gap(self, k1):
        s = self.c * k1 / self.a1
        w1 = np.sqrt(self.f ** 2 + s * s)
        return (self.w - w1) if self.branch == "k12" else (w1 - self.w)

    def k2_of(self, k1):
        u = self.freq_gap(k1)
        with np.errstate(invalid="ignore"):
            return self.a2 * np.sqrt(np.maximum((u - self.f) * (u + self.f), 0.0)) / self.c

    def bracket(self):
        """An interval in k1 that contains every admissible k1."""
        c, f, w, k = self.c, self.f, self.w, self.k
        a1, a2 = self.a1, self.a2
        if self.branch == "k12":
            lo = np.zeros_like(a1)
            top = (w - f) ** 2 - f * f
            hi = np.where(top > 0, a1 * np.sqrt(np.maximum(top, 0.0)) / c, 0.0)
            hi = np.minimum(hi, a1 * w / c)
        else:
            lo = a1 * np.sqrt((w + f) ** 2 - f * f) / c
            b = a2 / a1
            with np.errstate(divide="ignore", invalid="ignore"):
                up1 = np.where(b < 1, (k + a2 * f / c) / (1.0 - b), np.inf)
                up2 = np.where(b > 1, (k + a2 * (w + f) / c) / (b - 1.0), np.inf)
            hi = np.minimum(up1, up2)
            hi = np.where(np.isfinite(hi), hi, lo + 1e8 * k)
            hi = np.maximum(hi, lo)
        return lo, hi

    # -- constraint sets ------------------------------------------------------
    def _affine(self, with_cuts):
        """Rows after the first are affine in (k1, k2): alpha*k1 + beta*k2 + gamma."""
        cache = self.__dict__.setdefault("_affine_cache", {})
        if with_cuts not in cache:
            cache[with_cuts] = self._build_affine(with_cuts)
        return cache[with_cuts]

    def _build_affine(self, with_cuts):
        k = self.k
        rows = [(1.0, 1.0, -k), (-1.0, 1.0, k), (1.0, -1.0, k)]
        if with_cuts:
            cuts = self.cuts
            if cuts.mode == "box":
                rows += [(1.0, 0.0, -cuts.klo), (-1.0, 0.0, cuts.khi),
                         (0.0, 1.0, -cuts.klo), (0.0, -1.0, cuts.khi)]
            else:
                L = cuts.L
                rows += [(1.0, 0.0, -k / L), (-1.0, 0.0, k * L), (0.0, 1.0, -k / L),
                         (0.0, -1.0, k * L), (-1.0, L, 0.0), (L, -1.0, 0.0)]
        coef = np.array(rows)
        return coef[:, 0:1], coef[:, 1:2], coef[:, 2:3]

    def rows_at(self, X, with_cuts):
        """Constraint i evaluated at X[i]; X has shape (n_rows, n)."""
        al, be, ga = self._affine(with_cuts)
        freq = (self.freq_gap(X[0]) - self.f) * (self.k / self.w)
        k2 = self.k2_of(X[1:])
        return np.concatenate([freq[None, :], al * X[1:] + be * k2 + ga])

    def n_rows(self, with_cuts):
        return 1 + self._affine(with_cuts)[0].shape[0]

    def constraints(self, k1, with_cuts):
        """Stacked constraint values at k1 (each must be >= 0)."""
        k1 = np.asarray(k1, dtype=float)
        X = np.broadcast_to(k1, (self.n_rows(with_cuts),) + k1.shape)
        return self.rows_at(X, with_cuts)

    def linear_rows(self, with_cuts):
        """For f = 0 every constraint is affine in k1: rows (b, a) of b + a*k1."""
        k, w, c = self.k, self.w, self.c
        if self.branch == "k12":
            P, Q = self.a2 * w / c, -self.a2 / self.a1
        else:
            P, Q = -self.a2 * w / c, self.a2 / self.a1
        one = np.ones_like(P)
        zero = np.zeros_like(P)
        rows = [
            (P, Q),                     # k2 >= 0, i.e. omega2 >= 0
            (P - k, Q + 1.0),
            (P + k, Q - 1.0),
            (k - P, 1.0 - Q),
        ]
        if with_cuts:
            cuts = self.cuts
            if cuts.mode == "box":
                rows += [(-cuts.klo * one, one), (cuts.khi * one, -one),
                         (P - cuts.klo, Q), (cuts.khi - P, -Q)]
            else:
                L = cuts.L
                rows += [(-k / L * one, one), (k * L * one, -one), (P - k / L, Q),
                         (k * L - P, -Q), (L * P, L * Q - 1.0), (-P, L - Q)]
        b = np.stack([np.broadcast_to(r[0], P.shape) for r in rows])
        a = np.stack([np.broadcast_to(r[1], P.shape) for r in rows])
        return b, a

    def m_valid(self):
        cuts, a1, a2, m = self.cuts, self.a1, self.a2, self.m
        ok = (a2 > 0) & (a1 > 0)
        if cuts.mode == "box":
            ok &= (a1 >= cuts.mlo) & (a1 <= cuts.mhi) & (a2 >= cuts.mlo) & (a2 <= cuts.mhi)
        else:
            L = cuts.L
            ok &= (a1 >= m / L) & (a1 <= m * L) & (a2 >= m / L) & (a2 <= m * L)
            ok &= (a1 <= L * a2) & (a2 <= L * a1)
        return ok

    def k1_limits(self):
        cuts = self.cuts
        if cuts.mode == "box":
            return cuts.klo, cuts.khi
        return self.k / cuts.L, self.k * cuts.L


@dataclass(frozen=True)
class _Cuts:
    mode: str
    klo: float = 0.0
    khi: float = math.inf
    mlo: float = 0.0
    mhi: float = math.inf
    L: float = math.inf


def _golden_max(fun, lo, hi, iters):
    """Vectorized golden-section search for the maximum of a quasi-concave
    function; returns (x, f(x))."""
    a, b = lo.copy(), hi.copy()
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        left = f1 >= f2
        na = np.where(left, a, x1)
        nb = np.where(left, x2, b)
        probe = np.where(left, nb - GOLDEN * (nb - na), na + GOLDEN * (nb - na))
        fp = fun(probe)
        nx1 = np.where(left, probe, x2)
        nf1 = np.where(left, fp, f2)
        nx2 = np.where(left, x1, probe)
        nf2 = np.where(left, f1, fp)
        a, b, x1, x2, f1, f2 = na, nb, nx1, nx2, nf1, nf2
    pick = f1 >= f2
    return np.where(pick, x1, x2), np.where(pick, f1, f2)


def _row_roots(sec, with_cuts, xin, xout, iters=100, tol=8e-16):
    """Per constraint row, the zero nearest ``xin`` on the way to ``xout``.

    ``xin`` must satisfy every row; rows still nonnegative at ``xout``
    return ``xout``.  Illinois regula falsi runs independently per row, so
    each iteration works on a smooth function.
    """
    nr = sec.n_rows(with_cuts)
    A = np.broadcast_to(xin, (nr,) + xin.shape).copy()
    B = np.broadcast_to(xout, (nr,) + xout.shape).copy()
    fa = sec.rows_at(A, with_cuts)
    fb = sec.rows_at(B, with_cuts)
    open_ = fb < 0
    # row 0 (frequency) vanishes exactly at the analytic bracket ends, which
    # callers always stay inside; polishing it would only chase roundoff
    open_[0] = False
    side = np.zeros(A.shape, dtype=np.int8)
    prev = np.abs(B - A)
    for it in range(iters):
        width = np.abs(B - A)
        active = open_ & (width > tol * np.maximum(np.abs(A), np.abs(B))) & (fa != 0)
        if not np.any(active):
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            x = B - fb * (B - A) / (fb - fa)
        # bisect when the secant step is unusable or progress has stalled
        bad = (~np.isfinite(x) | (x <= np.minimum(A, B)) | (x >= np.maximum(A, B))
               | ((it % 3 == 2) & (width > 0.5 * prev)))
        x = np.where(bad, 0.5 * (A + B), x)
        x = np.where(active, x, A)
        if it % 3 == 2:
            prev = width
        fx = sec.rows_at(x, with_cuts)
        feas = fx >= 0
        fb = np.where(active & feas & (side == 1), 0.5 * fb, fb)
        fa = np.where(active & ~feas & (side == -1), 0.5 * fa, fa)
        A = np.where(active & feas, x, A)
        fa = np.where(active & feas, fx, fa)
        B = np.where(active & ~feas, x, B)
        fb = np.where(active & ~feas, fx, fb)
        side = np.where(active, np.where(feas, 1, -1), side).astype(np.int8)
    return np.where(open_, A, B)


def _interval(sec: _Sector, with_cuts: bool, lo, hi, n_samples=17, golden_iters=30, tol=8e-16):
    """Feasible k1 interval of the selected constraint set inside [lo, hi].

    Returns (left, right, feasible) arrays.
    """
    n = lo.size
    left = np.full(n, np.nan)
    right = np.full(n, np.nan)
    ok = hi > lo
    if not np.any(ok):
        return left, right, np.zeros(n, dtype=bool)
    if sec.f == 0.0:
        return _linear_interval(sec, with_cuts, lo, hi)

    def G(x):
        return sec.constraints(x, with_cuts).min(axis=0)

    # a feasible interior point: coarse sampling, then golden search on misses
    u = (np.arange(n_samples) + 0.5) / n_samples
    X = lo[None, :] + (hi - lo)[None, :] * u[:, None]
    GX = np.stack([G(x) for x in X])
    j = np.argmax(GX, axis=0)
    cols = np.arange(n)
    x0 = X[j, cols]
    g0 = GX[j, cols]
    miss = ok & (g0 <= 0)
    if np.any(miss):
        idx = np.nonzero(miss)[0]
        s = sec.subset(idx)
        jj = j[idx]
        a = np.where(jj == 0, lo[idx], X[np.maximum(jj - 1, 0), idx])
        b = np.where(jj == n_samples - 1, hi[idx], X[np.minimum(jj + 1, n_samples - 1), idx])
        xm, gm = _golden_max(lambda x: s.constraints(x, with_cuts).min(axis=0), a, b, golden_iters)
        x0[idx], g0[idx] = xm, gm
    feas = ok & (g0 > 0)
    if not np.any(feas):
        return left, right, feas
    idx = np.nonzero(feas)[0]
    s = sec.subset(idx)
    left[idx] = _row_roots(s, with_cuts, x0[idx], lo[idx], tol=tol).max(axis=0)
    right[idx] = _row_roots(s, with_cuts, x0[idx], hi[idx], tol=tol).min(axis=0)
    feas &= right > left
    return left, right, feas


def _linear_interval(sec, with_cuts, lo, hi):
    b, a = sec.linear_rows(with_cuts)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = -b / a
    left = np.max(np.where(a > 0, r, -np.inf), axis=0)
    right = np.min(np.where(a < 0, r, np.inf), axis=0)
    dead = np.any((a == 0) & (b < 0), axis=0)
    left = np.maximum(left, lo)
    right = np.minimum(right, hi)
    feas = (right > left) & ~dead
    return np.where(feas, left, np.nan), np.where(feas, right, np.nan), feas


@dataclass
class _Solved:
    tri_lo: np.ndarray
    tri_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    valid: np.ndarray
    code: np.ndarray


def _solve(sec: _Sector, tol: float = 8e-16) -> _Solved:
    """Triangle and admissible k1 intervals; ``tol`` is the relative root tolerance."""
    blo, bhi = sec.bracket()
    tlo, thi, tfeas = _interval(sec, False, blo, bhi, tol=tol)
    klo, khi = sec.k1_limits()
    elo = np.where(tfeas, np.maximum(tlo, klo), 0.0)
    ehi = np.where(tfeas, np.minimum(thi, khi), 0.0)
    sub = tfeas & (ehi > elo)
    lo = np.full(tlo.shape, np.nan)
    hi = np.full(tlo.shape, np.nan)
    valid = np.zeros(tlo.shape, dtype=bool)
    if np.any(sub):
        idx = np.nonzero(sub)[0]
        s = sec.subset(idx)
        a, b, ok = _interval(s, True, elo[idx], ehi[idx], tol=tol)
        lo[idx], hi[idx], valid[idx] = a, b, ok
    valid &= sec.m_valid()
    code = np.full(tlo.shape, -1, dtype=np.int64)
    if np.any(valid):
        idx = np.nonzero(valid)[0]
        s = sec.subset(idx)
        ca = np.abs(s.constraints(lo[idx], True)).argmin(axis=0)
        cb = np.abs(s.constraints(hi[idx], True)).argmin(axis=0)
        code[idx] = ca * 64 + cb
    return _Solved(tlo, thi, lo, hi, valid, code)


def _breakpoints(k, m, branch, params, cuts, sign, ta, tb, n_scan, iters=26, tol=1e-9):
    """Panel edges in t = log|m1| on [ta, tb] where the solution structure changes."""
    t = np.linspace(ta, tb, n_scan)
    sec = _Sector(k, m, branch, sign * np.exp(t), params, cuts)
    code = _solve(sec, tol).code
    idx = np.nonzero(code[1:] != code[:-1])[0]
    edges = [ta]
    if idx.size:
        L, R = t[idx].copy(), t[idx + 1].copy()
        cL = code[idx]
        for _ in range(iters):
            M = 0.5 * (L + R)
            sec.set_m1(sign * np.exp(M))
            cM = _solve(sec, tol).code
            same = cM == cL
            L = np.where(same, M, L)
            R = np.where(same, R, M)
        edges += list(0.5 * (L + R))
    # a transition resolved onto an end point (or onto another transition)
    # would only add a sliver panel whose size is set by roundoff
    gap = 1e-8 * (tb - ta)
    merged = [ta]
    for e in edges[1:]:
        if e - merged[-1] > gap and tb - e > gap:
            merged.append(e)
    merged.append(tb)
    edges = np.array(merged)
    # a panel is kept when any scan sample or its midpoint is admissible
    active = []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (t >= a) & (t <= b)
        active.append(bool(np.any(code[sel] >= 0))
                      or _probe_active(k, m, branch, params, cuts, sign, a, b))
    return edges, np.array(active, dtype=bool)


def _probe_active(k, m, branch, params, cuts, sign, a, b):
    if b <= a:
        return False
    sec = _Sector(k, m, branch, sign * np.exp(np.array([0.5 * (a + b)])), params, cuts)
    return bool(_solve(sec).valid[0])


def _sectors(m, branch, cuts, mixed_sign):
    """(sign, |m1| lo, |m1| hi, mixed) ranges of m1 for a target m > 0."""
    big = math.inf
    if branch == "k12":
        raw = [(-1.0, 0.0, big, True), (1.0, 0.0, m, False), (1.0, m, big, True)]
    else:
        raw = [(1.0, 0.0, m, True), (1.0, m, big, False), (-1.0, 0.0, big, True)]
    if cuts.mode == "box":
        lim = (cuts.mlo, cuts.mhi)
    else:
        lim = (m / cuts.L, m * cuts.L)
    out = []
    for sign, lo, hi, mixed in raw:
        if mixed and not mixed_sign:
            continue
        lo, hi = max(lo, lim[0]), min(hi, lim[1])
        if hi > lo:
            out.append((sign, lo, hi, mixed))
    return out


def make_cuts(k, m, quad: QuadSettings, grid: Optional[SpectralGrid]) -> _Cuts:
    if quad.truncation == "window":
        return _Cuts("window", L=float(quad.window))
    bounds = quad.bounds
    if bounds is None:
        if grid is None:
            raise DomainError("box truncation needs a grid or explicit bounds")
        bounds = grid.bounds
    klo, khi, mlo, mhi = (float(b) for b in bounds)
    return _Cuts("box", klo, khi, mlo, mhi)


def _panels(edges, active, max_panel):
    out = []
    for a, b, on in zip(edges[:-1], edges[1:], active):
        if not on or b <= a:
            continue
        n = max(1, int(math.ceil((b - a) / max_panel)))
        s = np.linspace(a, b, n + 1)
        out += list(zip(s[:-1], s[1:]))
    return out


def _edge_angle(x, lo, hi):
    """theta in [0, pi] with x = (lo + hi)/2 + (hi - lo)/2 cos(theta), using
    half-angle forms that stay accurate next to either end."""
    span = hi - lo
    near_hi = (hi - x) <= (x - lo)
    with np.errstate(invalid="ignore"):
        a = 2.0 * np.arcsin(np.sqrt(np.clip((hi - x) / span, 0.0, 1.0)))
        b = np.pi - 2.0 * np.arcsin(np.sqrt(np.clip((x - lo) / span, 0.0, 1.0)))
    return np.where(near_hi, a, b)


def _enumerate_free(k, m, branch, params, quad, cuts) -> ManifoldSample:
    """Nodes for branch ``"k12"`` or ``"1k2"`` with free variables (k1, m1)."""
    ng, nt = quad.nodes_gauss, quad.nodes_theta
    xg, wg = leggauss(ng)
    xt, wt = leggauss(nt)
    chunks = []
    for sign, lo, hi, _mixed in _sectors(m, branch, cuts, quad.mixed_sign):
        ta, tb = math.log(lo), math.log(hi)
        edges, active = _breakpoints(k, m, branch, params, cuts, sign, ta, tb, quad.n_scan)
        panels = _panels(edges, active, quad.max_panel)
        if not panels:
            continue
        pa = np.array([p[0] for p in panels])
        pb = np.array([p[1] for p in panels])
        t = (0.5 * (pa + pb))[:, None] + (0.5 * (pb - pa))[:, None] * xg
        w = (0.5 * (pb - pa))[:, None] * wg
        t, w = t.ravel(), w.ravel()
        m1 = sign * np.exp(t)
        wm = w * np.exp(t)
        sec = _Sector(k, m, branch, m1, params, cuts)
        sol = _solve(sec)
        keep = sol.valid
        if not np.any(keep):
            continue
        m1, wm = m1[keep], wm[keep]
        sec.set_m1(m1)
        tlo, thi = sol.tri_lo[keep], sol.tri_hi[keep]
        elo, ehi = sol.lo[keep], sol.hi[keep]
        if quad.edge_mapping:
            cc = 0.5 * (tlo + thi)
            rr = 0.5 * (thi - tlo)
            th_a = _edge_angle(ehi, tlo, thi)
            th_b = _edge_angle(elo, tlo, thi)
            th = (0.5 * (th_a + th_b))[:, None] + (0.5 * (th_b - th_a))[:, None] * xt
            wth = (0.5 * (th_b - th_a))[:, None] * wt
            k1 = cc[:, None] + rr[:, None] * np.cos(th)
            k1 = np.clip(k1, elo[:, None], ehi[:, None])
            edge = rr[:, None] * np.sin(th)
            wk = wth
        else:
            k1 = (0.5 * (elo + ehi))[:, None] + (0.5 * (ehi - elo))[:, None] * xt
            wk = (0.5 * (ehi - elo))[:, None] * wt
            edge = None
        m1b = np.broadcast_to(m1[:, None], k1.shape)
        sub = sec.subset(np.repeat(np.arange(m1.size), nt))
        k1f = k1.ravel()
        k2f = sub.k2_of(k1f)
        m2f = sub.m2
        if branch == "k12":
            d = triangle_delta(k, k1f, k2f)
        else:
            d = triangle_delta(k1f, k, k2f)
        with np.errstate(divide="ignore", invalid="ignore"):
            if edge is not None:
                # edge factor / Delta, finite at the ends of [tlo, thi]
                inv = 1.0 / d
                wk_full = (wk * edge).ravel()
            else:
                inv = 1.0 / d
                wk_full = wk.ravel()
            w2 = np.sqrt(params.f ** 2 + (params.c * k2f / m2f) ** 2)
            jac = m2f * m2f * w2 / (params.c ** 2 * k2f)
        weight = wk_full * np.repeat(wm, nt)
        # safety net: drop any node outside the admissible set
        g = sub.constraints(k1f, True).min(axis=0)
        scale = k
        good = (np.isfinite(inv) & np.isfinite(jac) & (k2f > 0) & (d > 0)
                & (g >= -1e-9 * scale))
        chunks.append((k1f[good], m1b.ravel()[good], k2f[good], m2f[good],
                       jac[good], inv[good], weight[good]))
    if chunks:
        cols = [np.concatenate(c) for c in zip(*chunks)]
    else:
        cols = [np.empty(0) for _ in range(7)]
    return ManifoldSample(float(k), float(m), branch, *cols)


def enumerate_manifold(node, grid: Optional[SpectralGrid], branch: str,
                       params: PhysicalParams, quad: Optional[QuadSettings] = None) -> ManifoldSample:
    """Quadrature nodes of the resonant manifold for one target and branch.

    ``node`` is a grid index pair (i, j), a :class:`Wavevector` or a
    (k, m) pair; m is taken as |m| (spectra are even in m).
    """
    quad = quad or QuadSettings()
    k, m = _node_km(node, grid)
    if branch not in BRANCHES:
        raise DomainError(f"unknown branch {branch!r}; expected one of {BRANCHES}")
    cuts = make_cuts(k, m, quad, grid)
    if branch == "21k":
        return _enumerate_free(k, m, "1k2", params, quad, cuts).mirrored()
    return _enumerate_free(k, m, branch, params, quad, cuts)


def _node_km(node, grid):
    if isinstance(node, Wavevector):
        k, m = node.k, node.m
    elif isinstance(node, tuple) and len(node) == 2 and all(
            isinstance(v, (int, np.integer)) for v in node):
        if grid is None:
            raise DomainError("index nodes need a grid")
        k, m = float(grid.k_axis[node[0]]), float(grid.m_axis[node[1]])
    else:
        k, m = (float(v) for v in node)
    m = abs(m)
    if not (k > 0 and m > 0):
        raise DomainError("target wavevector needs k > 0 and m != 0")
    return float(k), float(m)
