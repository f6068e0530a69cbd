"""Quadrature on the reference triangle and the unit segment.

Triangle rules come from the collapsed-coordinate product of Gauss-Legendre
(in the first coordinate) with Gauss-Jacobi weighted by (1-b) (in the
second), which integrates every bivariate polynomial up to the requested
total degree exactly and has strictly positive weights.  Reference triangle:
{(x, y) : x >= 0, y >= 0, x + y <= 1}, measure 1/2.  Segment rules are plain
Gauss-Legendre on [0, 1], total weight 1.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["QuadratureRule", "triangle_rule", "segment_rule", "MAX_EXACTNESS"]

MAX_EXACTNESS = 20


class QuadratureRule(NamedTuple):
    points: np.ndarray   # (npts, dim) for triangles, (npts,) for segments
    weights: np.ndarray  # (npts,), strictly positive


def _check_degree(degree: int):
    if not 0 <= degree <= MAX_EXACTNESS:
        raise ValueError(f"exactness degree must lie in [0, {MAX_EXACTNESS}], got {degree}")


@lru_cache(maxsize=None)
def segment_rule(degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1] exact for polynomials of degree <= degree."""
    _check_degree(degree)
    npts = degree // 2 + 1
    nodes, weights = np.polynomial.legendre.leggauss(npts)
    rule = QuadratureRule(0.5 * (nodes + 1.0), 0.5 * weights)
    rule.points.flags.writeable = False
    rule.weights.flags.writeable = False
    return rule


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Rule on the reference triangle exact for total degree <= degree."""
    _check_degree(degree)
    n = degree // 2 + 1
    ga, wa = np.polynomial.legendre.leggauss(n)
    ga = 0.5 * (ga + 1.0)
    wa = 0.5 * wa
    # roots_jacobi(n, 1, 0): nodes/weights for weight (1-t) on [-1, 1]; the
    # map t -> (t+1)/2 carries the weight to 2*(1-b) with jacobian 1/2.
    gb, wb = roots_jacobi(n, 1.0, 0.0)
    gb = 0.5 * (gb + 1.0)
    wb = 0.25 * wb
    # Collapsed map (a, b) -> (a(1-b), b) has jacobian (1-b), absorbed by wb.
    pts = np.empty((n * n, 2))
    wts = np.empty(n * n)
    k = 0
    for i in range(n):
        for j in range(n):
            pts[k, 0] = ga[i] * (1.0 - gb[j])
            pts[k, 1] = gb[j]
            wts[k] = wa[i] * wb[j]
            k += 1
    pts.flags.writeable = False
    wts.flags.writeable = False
    return QuadratureRule(pts, wts)
