"""Deterministic quadrature on the sphere and the circle.

Sphere integrals use Gauss-Legendre nodes in the polar cosine crossed
with a uniform (periodic trapezoid) azimuthal rule; both are spectrally
accurate for the low-degree integrands that occur here.  Regions made of
pairwise disjoint caps are integrated cap by cap in cap-aligned frames,
so indicator discontinuities never cross a quadrature domain.
"""

from __future__ import annotations

import numpy as np

from .outcomes import TWO_PI, Cap, Region

DEFAULT_SPHERE_BUDGET = 8192  # 64 polar x 128 azimuthal nodes


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def rotation_to(axis: np.ndarray) -> np.ndarray:
    """Deterministic rotation matrix mapping +z to ``axis``."""
    axis = np.asarray(axis, dtype=float)
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.clip(axis @ z, -1.0, 1.0))
    if c > 1.0 - 1e-14:
        return np.eye(3)
    if c < -1.0 + 1e-14:
        return np.diag([1.0, -1.0, -1.0])
    v = np.cross(z, axis)
    s2 = float(v @ v)
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / s2)


def _budget_to_grid(budget: int) -> tuple[int, int]:
    n_u = max(8, int(round(np.sqrt(budget / 2.0))))
    return n_u, 2 * n_u


def sphere_band_nodes(
    axis: np.ndarray,
    u_lo: float,
    u_hi: float,
    n_u: int,
    n_phi: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for the surface integral over ``u_lo <= n.axis <= u_hi``.

    Weights carry the full surface measure, so they sum to the band area
    ``2*pi*(u_hi - u_lo)``.
    """
    u, wu = gauss_legendre(n_u, u_lo, u_hi)
    phi = np.arange(n_phi) * (TWO_PI / n_phi)
    wphi = np.full(n_phi, TWO_PI / n_phi)
    su = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    x = np.outer(su, np.cos(phi)).ravel()
    y = np.outer(su, np.sin(phi)).ravel()
    z = np.outer(u, np.ones(n_phi)).ravel()
    pts = np.column_stack([x, y, z])
    w = np.outer(wu, wphi).ravel()
    rot = rotation_to(axis)
    return pts @ rot.T, w


def sphere_cap_nodes(cap: Cap, n_u: int, n_phi: int):
    return sphere_band_nodes(cap.axis_array, float(np.cos(cap.angle)), 1.0, n_u, n_phi)


def sphere_nodes(n_u: int, n_phi: int):
    return sphere_band_nodes(np.array([0.0, 0.0, 1.0]), -1.0, 1.0, n_u, n_phi)


def integrate_sphere(f, budget: int = DEFAULT_SPHERE_BUDGET) -> float | np.ndarray:
    """Surface integral of a smooth function over the whole sphere.

    ``f`` maps an (m, 3) array of unit vectors to an (m,) or (m, ...)
    array of values.
    """
    n_u, n_phi = _budget_to_grid(budget)
    pts, w = sphere_nodes(n_u, n_phi)
    vals = np.asarray(f(pts))
    return np.tensordot(w, vals, axes=(0, 0))


def integrate_sphere_region(f, region: Region, budget: int = DEFAULT_SPHERE_BUDGET):
    """Surface integral of a smooth function over a cap-union region.

    The caps must be pairwise disjoint (complement handled by
    subtracting from the full-sphere integral); this keeps every
    quadrature sub-domain free of indicator jumps, so accuracy is set by
    the smooth integrand alone.
    """
    if region.caps is None:
        raise ValueError("sphere region required")
    if not region.caps_pairwise_disjoint():
        raise ValueError(
            "closed-form region integration requires pairwise disjoint caps"
        )
    n_u, n_phi = _budget_to_grid(budget)
    total = 0.0
    for cap in region.caps:
        pts, w = sphere_cap_nodes(cap, n_u, n_phi)
        total = total + np.tensordot(w, np.asarray(f(pts)), axes=(0, 0))
    if region.complement:
        pts, w = sphere_nodes(n_u, n_phi)
        whole = np.tensordot(w, np.asarray(f(pts)), axes=(0, 0))
        total = whole - total
    return total


def circle_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Periodic trapezoid rule on [0, 2*pi)."""
    phi = np.arange(n) * (TWO_PI / n)
    return phi, np.full(n, TWO_PI / n)


def intersect_arcs_with_window(arcs, lo: float, hi: float):
    """Intersections of normalized arcs [a, b) with the window [lo, hi)."""
    out = []
    for a, b in arcs:
        s, e = max(a, lo), min(b, hi)
        if e > s:
            out.append((s, e))
    return out


def integrate_intervals(f, intervals, order: int = 24):
    """Gauss-Legendre integral of a smooth function over interval pieces."""
    total = 0.0
    for a, b in intervals:
        x, w = gauss_legendre(order, a, b)
        total = total + np.tensordot(w, np.asarray(f(x)), axes=(0, 0))
    return total
