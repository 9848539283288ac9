"""Shared log-radial quadrature rules.

All singular integrals in this package reduce, per ray, to integrals against
the measure d(rho)/rho = d(ln rho).  The canonical rule is composite Simpson
in s = ln(rho), with panel edges at decade boundaries and at caller-declared
breakpoints (kernel support edges, indicator jumps, modulus kinks), so that
the integrand restricted to each panel is smooth.  Panel endpoints are nudged
into the panel interior by one part in 1e12 before the integrand is sampled,
which makes indicator-type integrands evaluate on the correct side of their
jumps at negligible cost for smooth integrands.
"""

from __future__ import annotations

import math

import numpy as np

_NUDGE = 1e-12


def panel_edges(lo, hi, breakpoints=()):
    """Sorted panel edges in [lo, hi]: decades plus interior breakpoints."""
    if not lo < hi:
        raise ValueError("empty radial range")
    edges = {lo, hi}
    k = math.ceil(math.log10(lo) + 1e-12)
    while 10.0 ** k < hi * (1 - 1e-12):
        if 10.0 ** k > lo * (1 + 1e-12):
            edges.add(10.0 ** k)
        k += 1
    for b in breakpoints:
        if lo * (1 + 1e-10) < b < hi * (1 - 1e-10):
            edges.add(float(b))
    out = sorted(edges)
    # merge edges that collide up to relative 1e-10
    merged = [out[0]]
    for e in out[1:]:
        if e > merged[-1] * (1 + 1e-10):
            merged.append(e)
    if merged[-1] != hi:
        merged[-1] = hi
    return merged


def radial_rule(lo, hi, n_per_decade, breakpoints=()):
    """Composite-Simpson nodes/weights for integral f(rho) d(rho)/rho.

    Returns (rho, w) with sum(w * f(rho)) approximating the integral over
    [lo, hi].  Node density is n_per_decade subintervals per factor of 10,
    with at least two subintervals per panel.
    """
    edges = panel_edges(lo, hi, breakpoints)
    rhos = []
    wts = []
    ln10 = math.log(10.0)
    for a, b in zip(edges[:-1], edges[1:]):
        sa, sb = math.log(a), math.log(b)
        m = max(2, 2 * math.ceil(n_per_decade * (sb - sa) / (2 * ln10)))
        s = np.linspace(sa, sb, m + 1)
        rho = np.exp(s)
        rho[0] = a * (1 + _NUDGE)
        rho[-1] = b * (1 - _NUDGE)
        ds = (sb - sa) / m
        w = np.full(m + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        w *= ds / 3.0
        rhos.append(rho)
        wts.append(w)
    return np.concatenate(rhos), np.concatenate(wts)


def sphere_crossings(x, theta, radius):
    """Positive ray parameters rho with |x + rho*theta| = radius."""
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    b = float(np.dot(x, theta))
    c = float(np.dot(x, x)) - radius * radius
    disc = b * b - c
    if disc < 0:
        return []
    root = math.sqrt(disc)
    return [t for t in (-b - root, -b + root) if t > 0]


def closest_approach(x, theta):
    """Ray parameter of the point closest to the origin (if ahead of x)."""
    t = -float(np.dot(np.asarray(x, float), np.asarray(theta, float)))
    return [t] if t > 0 else []


def unit_directions(N, n_angular):
    """Quadrature directions and angular weights on the unit sphere.

    1-D: the two rays with weight 1 each (counting measure on S^0).
    2-D: uniform angles with the periodic-trapezoid weight 2*pi/M.
    """
    if N == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if N == 2:
        M = int(n_angular)
        phi = 2 * np.pi * np.arange(M) / M
        thetas = np.column_stack([np.cos(phi), np.sin(phi)])
        return thetas, np.full(M, 2 * np.pi / M)
    raise ValueError("only dimensions 1 and 2 are supported")
