"""Gauss-Legendre rules on intervals and two-panel splits."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float, b: float):
    x, w = _legendre(int(n))
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def split_gauss_legendre(n: int, a: float, b: float, mid: float):
    """n nodes in total, n//2 on each of [a, mid] and [mid, b]."""
    h = max(int(n) // 2, 1)
    x1, w1 = gauss_legendre(h, a, mid)
    x2, w2 = gauss_legendre(h, mid, b)
    return np.concatenate([x1, x2]), np.concatenate([w1, w2])
