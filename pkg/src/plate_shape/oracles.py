"""Closed-form reference values for the clamped disk plate."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.special import iv, jv


def clamped_disk_characteristic(k: float, n: int = 0) -> float:
    """J_n(k) I_n'(k) - J_n'(k) I_n(k), written via the recurrences as J_n I_{n+1} + J_{n+1} I_n."""
    return float(jv(n, k) * iv(n + 1, k) + jv(n + 1, k) * iv(n, k))


def clamped_disk_roots(n: int = 0, count: int = 1, kmax: float = 40.0) -> list[float]:
    """First ``count`` positive roots of the characteristic equation for azimuthal order ``n``."""
    grid = np.linspace(0.5, kmax, 8000)
    vals = np.array([clamped_disk_characteristic(k, n) for k in grid])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
        roots.append(brentq(clamped_disk_characteristic, grid[i], grid[i + 1], args=(n,), xtol=1e-15))
        if len(roots) == count:
            break
    return roots


def clamped_disk_eigenvalues(radius: float = 1.0, count: int = 6) -> list[float]:
    """Smallest eigenvalues lambda = k^4 / R^4 of the clamped disk, with multiplicity."""
    vals = []
    for n in range(0, 8):
        for k in clamped_disk_roots(n, count=count):
            vals.extend([k**4] * (1 if n == 0 else 2))
    return [v / radius**4 for v in sorted(vals)[:count]]


def clamped_disk_ground_mode(r, radius: float = 1.0):
    """Radial ground mode (unnormalized) and its Laplacian on the disk of ``radius``."""
    k = clamped_disk_roots(0)[0]
    x = k * np.asarray(r, dtype=float) / radius
    u = jv(0, x) * iv(0, k) - iv(0, x) * jv(0, k)
    lap = -(k / radius) ** 2 * (jv(0, x) * iv(0, k) + iv(0, x) * jv(0, k))
    return u, lap
