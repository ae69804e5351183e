"""Brute-force reference for the collision integral.

Independent of :mod:`isowaves.manifold`: the frequency delta function is
replaced by a Gaussian of width sigma and the integral is taken on a tensor
grid over all free variables.  Horizontal magnitudes use elliptic
coordinates around the target,

    k1 = k (cosh a + cos b)/2,   k2 = k (cosh a - cos b)/2,

whose Jacobian k^2 sinh a sin b / 2 cancels 1/Delta exactly.  The vertical
partner m1 runs over both signs on a uniform grid in log|m1|.  Results for a
decreasing sequence of widths are extrapolated to sigma -> 0 by a quadratic
fit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, PhysicalParams
from .dispersion import omega
from .kinetic import occupation_factor
from .triads import Triad, v_squared


@dataclass(frozen=True)
class OracleResult:
    sigmas: np.ndarray
    rates: np.ndarray
    extrapolated: float
    branch_rates: np.ndarray


def _branch_sum(br, k, m, a1k, a2k, w_ab, s_nodes, ds, spectrum, params, bounds, sig_rel,
                k_quarter):
    """Sum over (alpha, beta, m1) of delta_sigma * f * V^2 * k k1 k2 for one branch."""
    klo, khi, mlo, mhi = bounds
    w = float(omega(k, m, params))
    out = np.zeros(len(sig_rel))
    n = float(spectrum.evaluate(k, m))
    for sign in (1.0, -1.0):
        m1 = sign * np.exp(s_nodes)
        if br == "k12":
            m2 = m - m1
        elif br == "1k2":
            m2 = m1 - m
        else:
            m2 = m1 + m
        okm = (np.abs(m2) >= mlo) & (np.abs(m2) <= mhi)
        m1, m2, dm = m1[okm], m2[okm], (np.abs(m1) * ds)[okm]
        if m1.size == 0:
            continue
        K1 = a1k[:, None]
        K2 = a2k[:, None]
        W = w_ab[:, None]
        w1 = omega(K1, m1[None, :], params)
        w2 = omega(K2, m2[None, :], params)
        if br == "k12":
            gap = w - w1 - w2
        elif br == "1k2":
            gap = w1 - w - w2
        else:
            gap = w2 - w1 - w
        smax = max(sig_rel) * w
        near = np.abs(gap) < 9.0 * smax
        if not np.any(near):
            continue
        ia, im = np.nonzero(near)
        k1v, k2v = a1k[ia], a2k[ia]
        mm1, mm2 = m1[im], m2[im]
        kk = np.full(ia.size, k)
        mm = np.full(ia.size, m)
        if br == "k12":
            t = Triad(kk, k1v, k2v, mm, mm1, mm2)
            f = occupation_factor(n, spectrum.evaluate(k1v, mm1), spectrum.evaluate(k2v, mm2))
        elif br == "1k2":
            t = Triad(k1v, kk, k2v, mm1, mm, mm2)
            f = occupation_factor(spectrum.evaluate(k1v, mm1), n, spectrum.evaluate(k2v, mm2))
        else:
            t = Triad(k2v, k1v, kk, mm2, mm1, mm)
            f = occupation_factor(spectrum.evaluate(k2v, mm2), spectrum.evaluate(k1v, mm1), n)
        base = v_squared(t, params, k_prefactor_quarter=k_quarter) * f * k * k1v * k2v \
            * W[ia, 0] * dm[im]
        g = gap[ia, im]
        for q, sr in enumerate(sig_rel):
            sig = sr * w
            out[q] += math.fsum(base * np.exp(-0.5 * (g / sig) ** 2) / (math.sqrt(2 * math.pi) * sig))
    return out


def broadened_rate(spectrum, node, params: PhysicalParams, bounds, sigmas=(0.08, 0.04, 0.02),
                   n_alpha: int = 160, n_beta: int = 80, n_m: int = 2400,
                   kernel_norm: float = 1.0, k_prefactor_quarter: bool = False,
                   chunk: int = 8) -> OracleResult:
    """Gaussian-broadened brute-force dn/dt at ``node`` = (k, m) with box ``bounds``.

    ``sigmas`` are Gaussian widths relative to omega(k, m).  Narrower widths
    need finer grids: at the default resolution, widths much below 0.02
    leave the Gaussian under-sampled where omega(k, m) is small and the
    extrapolation then amplifies the sampling noise.
    """
    k, m = float(node[0]), abs(float(node[1]))
    klo, khi, mlo, mhi = (float(b) for b in bounds)
    if not (0 < klo < khi and 0 < mlo < mhi):
        raise DomainError("bounds must satisfy 0 < lo < hi")
    sig_rel = [float(s) for s in sigmas]
    if len(sig_rel) < 3:
        raise DomainError("at least three widths are needed for the extrapolation")
    amax = math.acosh(max(2.0 * khi / k, 1.0 + 1e-12))
    ha, hb = amax / n_alpha, math.pi / n_beta
    a = (np.arange(n_alpha) + 0.5) * ha
    b = (np.arange(n_beta) + 0.5) * hb
    A, B = np.meshgrid(a, b, indexing="ij")
    K1 = 0.5 * k * (np.cosh(A) + np.cos(B))
    K2 = 0.5 * k * (np.cosh(A) - np.cos(B))
    keep = (K1 >= klo) & (K1 <= khi) & (K2 >= klo) & (K2 <= khi)
    k1s, k2s = K1[keep], K2[keep]
    wab = np.full(k1s.size, ha * hb)
    smin, smax = math.log(mlo), math.log(mhi)
    ds = (smax - smin) / n_m
    s_nodes = smin + (np.arange(n_m) + 0.5) * ds
    totals = np.zeros((3, len(sig_rel)))
    for j, br in enumerate(("k12", "1k2", "21k")):
        for lo in range(0, k1s.size, chunk * n_beta):
            sl = slice(lo, lo + chunk * n_beta)
            totals[j] += _branch_sum(br, k, m, k1s[sl], k2s[sl], wab[sl], s_nodes, ds,
                                     spectrum, params, (klo, khi, mlo, mhi), sig_rel,
                                     k_prefactor_quarter)
    pref = kernel_norm / k
    branch = pref * np.array([totals[0], -totals[1], -totals[2]])
    rates = branch.sum(axis=0)
    s = np.array(sig_rel)
    coef = np.polyfit(s, rates, 2)
    return OracleResult(s, rates, float(coef[-1]), branch)
