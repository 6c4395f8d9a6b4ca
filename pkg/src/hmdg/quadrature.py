"""Quadrature rules on the reference triangle and the unit interval.

Reference triangle: vertices (0,0), (1,0), (0,1), area 1/2. Triangle rule
weights sum to 1/2, so mapping to a physical cell multiplies by det(J) =
2*area. Interval rules live on [0,1] with weights summing to 1.

Low degrees use symmetric (Dunavant-style) point sets; higher degrees fall
back to a collapsed Gauss (Duffy) tensor rule, exact for any requested
polynomial degree.
"""

import functools

import numpy as np


@functools.lru_cache(maxsize=None)
def gauss_01(npoints: int):
    """Gauss-Legendre rule on [0,1]; exact for degree 2*npoints - 1."""
    if npoints < 1:
        raise ValueError("need at least one quadrature point")
    x, w = np.polynomial.legendre.leggauss(npoints)
    return 0.5 * (x + 1.0), 0.5 * w


def interval_rule(degree: int):
    """Smallest Gauss rule on [0,1] exact for polynomials of `degree`."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    return gauss_01(degree // 2 + 1)


def _orbit3(a):
    return [(a, a), (1.0 - 2.0 * a, a), (a, 1.0 - 2.0 * a)]


# Symmetric rules, weights normalized to the reference area 1/2.
_SYMMETRIC = {
    1: ([(1.0 / 3.0, 1.0 / 3.0)], [0.5]),
    2: (_orbit3(1.0 / 6.0), [1.0 / 6.0] * 3),
    4: (
        _orbit3(0.445948490915965) + _orbit3(0.091576213509771),
        [0.223381589678011 / 2.0] * 3 + [0.109951743655322 / 2.0] * 3,
    ),
    5: (
        [(1.0 / 3.0, 1.0 / 3.0)]
        + _orbit3(0.470142064105115)
        + _orbit3(0.101286507323456),
        [0.225 / 2.0]
        + [0.132394152788506 / 2.0] * 3
        + [0.125939180544827 / 2.0] * 3,
    ),
}


def _duffy_rule(degree):
    # y = s*(1-x) collapse; x-integrand degree rises by one.
    xs, wx = gauss_01((degree + 2) // 2 + 1)
    ss, ws = gauss_01((degree + 1) // 2 + 1)
    X, S = np.meshgrid(xs, ss, indexing="ij")
    WX, WS = np.meshgrid(wx, ws, indexing="ij")
    pts = np.column_stack([X.ravel(), (S * (1.0 - X)).ravel()])
    wts = (WX * WS * (1.0 - X)).ravel()
    return pts, wts


@functools.lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Points (n,2) and weights (n,) on the reference triangle.

    Exact for all polynomials up to `degree`.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    deg = max(degree, 1)
    if deg == 3:
        deg = 4
    if deg in _SYMMETRIC:
        pts, wts = _SYMMETRIC[deg]
        return np.array(pts, dtype=float), np.array(wts, dtype=float)
    pts, wts = _duffy_rule(deg)
    return pts, wts


def map_to_cells(ref_points, ref_weights, vertices):
    """Push a reference rule to physical cells.

    vertices: (ncells, 3, 2) triangle corners. Returns points
    (ncells, nq, 2) and weights (ncells, nq).
    """
    v0 = vertices[:, 0, :]
    e1 = vertices[:, 1, :] - v0
    e2 = vertices[:, 2, :] - v0
    pts = (
        v0[:, None, :]
        + ref_points[None, :, 0, None] * e1[:, None, :]
        + ref_points[None, :, 1, None] * e2[:, None, :]
    )
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    wts = ref_weights[None, :] * det[:, None]
    return pts, wts
