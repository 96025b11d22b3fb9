"""Adaptive Gauss-Legendre quadrature for vector-valued integrands."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["QuadratureSpec", "adaptive_quad"]


@dataclass(frozen=True)
class QuadratureSpec:
    tolerance: float = 1e-10
    max_levels: int = 20
    order: int = 15


@lru_cache(maxsize=8)
def _nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel(fn, a, b, order):
    x, w = _nodes(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = [fn(mid + half * xi) for xi in x]
    return half * sum(wi * vi for wi, vi in zip(w, vals))


def adaptive_quad(fn, a: float, b: float, spec: QuadratureSpec = QuadratureSpec()):
    """Integrate a (possibly vector-valued) function over [a, b].

    Bisects panels until the coarse and refined estimates agree to the
    requested absolute tolerance (distributed over panels).  Returns
    ``(value, error_estimate)``.
    """

    def recurse(a, b, coarse, tol, level):
        mid = 0.5 * (a + b)
        left = _panel(fn, a, mid, spec.order)
        right = _panel(fn, mid, b, spec.order)
        refined = left + right
        err = float(np.max(np.abs(refined - coarse)))
        if err < tol or level >= spec.max_levels:
            return refined, err
        lval, lerr = recurse(a, mid, left, 0.5 * tol, level + 1)
        rval, rerr = recurse(mid, b, right, 0.5 * tol, level + 1)
        return lval + rval, lerr + rerr

    coarse = _panel(fn, a, b, spec.order)
    return recurse(a, b, coarse, spec.tolerance, 0)
