"""Gauss-Legendre quadrature on reference cubes and simplices.

Cubes are [0,1]^k with tensor-product rules; the standard simplex
{u_i >= 0, sum u_i <= 1} is covered by the collapsed-cube (Duffy) map, which
keeps the nodes strictly interior.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

DEFAULT_ORDER = 8
ERROR_ORDER_STEP = 4


@lru_cache(maxsize=None)
def gauss_01(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    if order < 1:
        raise ValueError("quadrature order must be positive")
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=None)
def cube_rule(k: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor rule on [0,1]^k: points (m, k), weights (m,)."""
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    x, w = gauss_01(order)
    grids = np.meshgrid(*([x] * k), indexing="ij")
    points = np.stack([g.reshape(-1) for g in grids], axis=1)
    weights = np.ones(points.shape[0])
    wg = np.meshgrid(*([w] * k), indexing="ij")
    for g in wg:
        weights = weights * g.reshape(-1)
    return points, weights


@lru_cache(maxsize=None)
def simplex_rule(k: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Duffy-collapsed tensor rule on the standard k-simplex."""
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    pts, wts = cube_rule(k, order)
    out = np.empty_like(pts)
    jac = np.ones(pts.shape[0])
    remaining = np.ones(pts.shape[0])
    for i in range(k):
        out[:, i] = pts[:, i] * remaining
        jac = jac * remaining
        remaining = remaining * (1.0 - pts[:, i])
    return out, wts * jac


def domain_rule(domain: str, k: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    if domain == "cube":
        return cube_rule(k, order)
    if domain == "simplex":
        return simplex_rule(k, order)
    raise ValueError(f"unknown domain {domain!r}")


def domain_volume(domain: str, k: int) -> float:
    if domain == "cube":
        return 1.0
    import math

    return 1.0 / math.factorial(k)
