"""Gauss-Legendre rules and adaptive bisection."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point rule on ``[a, b]``.

    Exact for polynomials of degree ``2n - 1``.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def fixed_quad(func: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int) -> float:
    x, w = gauss_legendre(a, b, n)
    return float(np.dot(w, func(x)))


def adaptive_quad(func: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                  tol: float = 1e-12, order: int = 10, max_depth: int = 60) -> tuple[float, float]:
    """Integrate a vectorized ``func`` on ``[a, b]`` by adaptive bisection.

    Each panel is accepted when the ``order``-point rule agrees with the sum
    of the two half-panel rules to ``tol * max(1, |estimate|)`` scaled by the
    panel's share of the interval.

    Returns
    -------
    value, error_estimate
    """
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    length = b - a
    whole = fixed_quad(func, a, b, order)
    total = 0.0
    err = 0.0
    stack = [(a, b, whole, 0)]
    scale = max(1.0, abs(whole))
    while stack:
        lo, hi, coarse, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = fixed_quad(func, lo, mid, order)
        right = fixed_quad(func, mid, hi, order)
        fine = left + right
        diff = abs(fine - coarse)
        if diff <= tol * scale * (hi - lo) / length or depth >= max_depth:
            total += fine
            err += diff
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return sign * total, err
