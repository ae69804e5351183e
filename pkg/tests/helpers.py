import numpy as np

from isowaves.dispersion import omega
from isowaves.manifold import solve_k2
from isowaves.triads import Triad


def resonant_triads(n, params, rng, vector=True):
    """``n`` random triads with k1 = k2 + k3 (vectors), m1 = m2 + m3 and
    omega1 = omega2 + omega3, built by solving for |k1| and keeping triangles."""
    k2s, k3s, m2s, m3s, k1s = [], [], [], [], []
    while len(k1s) < n:
        size = 4 * n
        k2 = 10 ** rng.uniform(-1, 1, size)
        k3 = 10 ** rng.uniform(-1, 1, size)
        m2 = rng.choice([-1.0, 1.0], size) * 10 ** rng.uniform(-1, 1, size)
        m3 = rng.choice([-1.0, 1.0], size) * 10 ** rng.uniform(-1, 1, size)
        m1 = m2 + m3
        ok = np.abs(m1) > 1e-3
        w = omega(k2[ok], m2[ok], params) + omega(k3[ok], m3[ok], params)
        k1, _ = solve_k2(w, m1[ok], params)
        k2, k3, m2, m3 = k2[ok], k3[ok], m2[ok], m3[ok]
        tri = (k1 < k2 + k3) & (k1 > np.abs(k2 - k3)) & np.isfinite(k1)
        k1s += list(k1[tri]); k2s += list(k2[tri]); k3s += list(k3[tri])
        m2s += list(m2[tri]); m3s += list(m3[tri])
    k1, k2, k3 = (np.array(v[:n]) for v in (k1s, k2s, k3s))
    m2, m3 = np.array(m2s[:n]), np.array(m3s[:n])
    if not vector:
        return Triad.from_magnitudes(k1, k2, k3, m2, m3)
    # place k2 at a random angle and k3 at the angle that closes the triangle
    a = rng.uniform(0, 2 * np.pi, n)
    cos_b = np.clip((k1 ** 2 - k2 ** 2 - k3 ** 2) / (2 * k2 * k3), -1, 1)
    b = a + rng.choice([-1.0, 1.0], n) * np.arccos(cos_b)
    k2v = np.stack([k2 * np.cos(a), k2 * np.sin(a)], axis=-1)
    k3v = np.stack([k3 * np.cos(b), k3 * np.sin(b)], axis=-1)
    return Triad.from_vectors(k2v, k3v, m2, m3)
