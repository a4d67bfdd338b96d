"""Integration against the normalized uniform measure on the simplex."""

from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Callable

import numpy as np

from .errors import CapacityError, QuadratureError


@lru_cache(maxsize=64)
def simplex_rule(d: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule collapsed onto the simplex.

    Returns points ``p`` of shape ``(K, d + 1)`` (rows on the simplex) and
    weights summing to 1. Collapsed coordinates: ``x_k = u_k prod_{i<k}(1-u_i)``
    for ``k = 1..d`` and ``p_0 = 1 - sum x_k``, with Jacobian
    ``prod_k (1-u_k)^{d-k}`` times ``d!`` for the normalization.
    """
    if d == 0:
        return np.ones((1, 1)), np.ones(1)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = (nodes + 1) / 2
    weights = weights / 2
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([weights] * d), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    x = np.empty_like(u)
    remaining = np.ones(u.shape[0])
    jac = np.ones(u.shape[0])
    for k in range(d):
        x[:, k] = u[:, k] * remaining
        jac *= (1 - u[:, k]) ** (d - 1 - k)
        remaining = remaining * (1 - u[:, k])
    p = np.column_stack([1 - x.sum(axis=1), x])
    p = np.clip(p, 0.0, 1.0)
    return p, w * jac * factorial(d)


def integrate_simplex(
    f: Callable[[np.ndarray], np.ndarray],
    d: int,
    rtol: float = 1e-8,
    start_order: int = 4,
    max_points: int = 2_000_000,
) -> tuple[np.ndarray, float]:
    """Integrate ``f`` over the simplex, doubling the Gauss order until converged.

    ``f`` maps an array of simplex points ``(K, d + 1)`` to values of shape
    ``(K, ...)``. Convergence is declared when the largest change between
    successive orders, relative to the largest magnitude of the estimate,
    is at most ``rtol``.

    Returns:
        The integral estimate and the achieved relative change.

    Raises:
        QuadratureError: if ``max_points`` is reached before convergence.
    """
    order = start_order
    p, w = simplex_rule(d, order)
    prev = np.tensordot(w, f(p), axes=(0, 0))
    if d == 0:
        return prev, 0.0
    change = np.inf
    while True:
        order *= 2
        if order**d > max_points:
            raise QuadratureError(f"simplex quadrature in d={d} did not converge", change)
        p, w = simplex_rule(d, order)
        cur = np.tensordot(w, f(p), axes=(0, 0))
        scale = max(np.abs(cur).max(), np.finfo(float).tiny)
        change = float(np.abs(cur - prev).max() / scale)
        if change <= rtol:
            return cur, change
        prev = cur


def check_quadrature_dimension(d: int, max_d: int = 4):
    if d > max_d:
        raise CapacityError(f"tensor quadrature limited to d <= {max_d}, got d={d}")
