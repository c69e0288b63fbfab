"""Small numerical helpers: Bernoulli numbers, compensated sums, Gauss-Legendre
panels and an order-preserving parallel map."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache

import numpy as np
from threadpoolctl import threadpool_limits


@lru_cache(maxsize=None)
def bernoulli_fractions(n: int) -> tuple:
    """Exact B_0..B_n (B_1 = -1/2 convention)."""
    B = [Fraction(0)] * (n + 1)
    B[0] = Fraction(1)
    for m in range(1, n + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * B[k]
        B[m] = -acc / (m + 1)
    return tuple(B)


def bernoulli(n: int) -> np.ndarray:
    return np.array([float(b) for b in bernoulli_fractions(n)])


class ComplexSum:
    """Neumaier-compensated accumulator for complex terms."""

    __slots__ = ("re", "im", "cre", "cim")

    def __init__(self, start=0j):
        self.re = float(start.real)
        self.im = float(start.imag)
        self.cre = 0.0
        self.cim = 0.0

    def add(self, z):
        x = z.real
        t = self.re + x
        if abs(self.re) >= abs(x):
            self.cre += (self.re - t) + x
        else:
            self.cre += (x - t) + self.re
        self.re = t
        y = z.imag
        t = self.im + y
        if abs(self.im) >= abs(y):
            self.cim += (self.im - t) + y
        else:
            self.cim += (y - t) + self.im
        self.im = t

    @property
    def value(self):
        return complex(self.re + self.cre, self.im + self.cim)


@lru_cache(maxsize=32)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(a: float, b: float, width: float, order: int = 16):
    """Composite Gauss-Legendre rule on [a, b] with panels no wider than ``width``.

    Returns (centers, offsets, weights): node j of panel i sits at
    ``centers[i] + offsets[j]`` with weight ``weights[j]``. All panels share one
    width so the offset vector is common.
    """
    if b <= a:
        raise ValueError("empty interval")
    npan = max(1, int(math.ceil((b - a) / width)))
    h = (b - a) / npan
    x, w = gauss_legendre(order)
    centers = a + h * (np.arange(npan) + 0.5)
    return centers, 0.5 * h * x, 0.5 * h * w


def ordered_map(fn, chunks, threads: int = 1):
    """Apply ``fn`` to each chunk and return results in input order.

    BLAS is pinned to one thread inside the workers so every chunk is computed
    by the same kernel regardless of ``threads``.
    """
    chunks = list(chunks)
    with threadpool_limits(limits=1):
        if threads <= 1 or len(chunks) <= 1:
            return [fn(c) for c in chunks]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, chunks))


def chunk_slices(n: int, size: int):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]
