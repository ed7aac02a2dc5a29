"""Small finite fields GF(p^k) with table-driven arithmetic."""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from .errors import ConfigurationError


def prime_power(q: int) -> tuple[int, int] | None:
    """Return (p, k) with q = p**k, or None."""
    if q < 2:
        return None
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    return (p, k) if r == 1 else None


def _poly_mod(a: list[int], mod: list[int], p: int) -> list[int]:
    a = a[:]
    while len(a) >= len(mod):
        coef = a[-1]
        if coef:
            shift = len(a) - len(mod)
            for i, m in enumerate(mod):
                a[shift + i] = (a[shift + i] - coef * m) % p
        a.pop()
    return a


def _is_irreducible(poly: list[int], p: int) -> bool:
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for tail in product(range(p), repeat=d):
            div = list(tail) + [1]
            if not any(_poly_mod(poly, div, p)):
                return False
    return True


class GaloisField:
    """GF(q), elements encoded as integers 0..q-1 (base-p coefficient digits)."""

    def __init__(self, q: int):
        pk = prime_power(q)
        if pk is None:
            raise ConfigurationError(f"{q} is not a prime power")
        if q > 4096:
            raise ConfigurationError("field tables limited to q <= 4096")
        self.q, (self.p, self.k) = q, pk
        p, k = self.p, self.k
        digits = np.array([[(e // p**i) % p for i in range(k)] for e in range(q)], dtype=np.int64)
        weights = p ** np.arange(k)
        self.add = (((digits[:, None, :] + digits[None, :, :]) % p) @ weights).astype(np.int64)
        if k == 1:
            self.mul = np.outer(np.arange(q), np.arange(q)) % p
            return
        modulus = next(
            list(t) + [1] for t in product(range(p), repeat=k) if _is_irreducible(list(t) + [1], p)
        )
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                prod = [0] * (2 * k - 1)
                for i in range(k):
                    for j in range(k):
                        prod[i + j] = (prod[i + j] + digits[a, i] * digits[b, j]) % p
                red = _poly_mod(prod, modulus, p) + [0] * k
                mul[a, b] = mul[b, a] = int(np.dot(red[:k], weights))
        self.mul = mul

    def evaluate(self, coeffs, points) -> np.ndarray:
        """Horner evaluation of sum_i coeffs[i] x^i at every point."""
        points = np.asarray(points, dtype=np.int64)
        acc = np.zeros_like(points)
        for c in reversed(list(coeffs)):
            acc = self.add[self.mul[acc, points], c]
        return acc


@lru_cache(maxsize=16)
def field(q: int) -> GaloisField:
    return GaloisField(q)
