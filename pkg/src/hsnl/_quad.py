"""Gauss-Legendre panel helpers shared by the quadrature-heavy modules."""

import functools

import numpy as np


@functools.lru_cache(maxsize=16)
def gauss_rule(n):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_points(breaks, n):
    """Gauss points and weights for the panels delimited by `breaks`.

    breaks is an increasing 1-D array of panel edges; returns flat arrays
    (points, weights) covering every panel with the n-point rule.
    """
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1]
    b = breaks[1:]
    x, w = gauss_rule(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    pts = mid[:, None] + half[:, None] * x[None, :]
    wts = half[:, None] * w[None, :]
    return pts.ravel(), wts.ravel()


def geometric_breaks(lo, hi, ratio=4.0):
    """Geometrically graded panel edges from hi down to lo (0 < lo < hi)."""
    edges = [hi]
    t = hi
    while t > lo * (1 + 1e-12):
        t = max(t / ratio, lo)
        edges.append(t)
    return np.array(edges[::-1])


def merge_breaks(lo, hi, *candidate_lists):
    """Sorted unique break points on [lo, hi] including both endpoints."""
    pts = [lo, hi]
    for cand in candidate_lists:
        for c in cand:
            if lo < c < hi:
                pts.append(float(c))
    return np.unique(np.array(pts, dtype=float))


def refine_breaks(breaks, offsets=(0.125, 0.25, 0.5, 0.75, 0.875)):
    """Subdivide every panel at relative offsets, grading toward both ends."""
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1]
    b = breaks[1:]
    extra = [a + off * (b - a) for off in offsets]
    return np.unique(np.concatenate([breaks] + extra))
