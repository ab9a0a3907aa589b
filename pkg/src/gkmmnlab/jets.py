"""Truncated Taylor jets in (x, y, t) for exact derivatives of quotients.

A jet of order ``n`` stores ``coef[i, j, l] = d^{i+j+l} f / (dx^i dy^j dt^l) / (i! j! l!)``
for ``i + j + l <= n``.
"""
from __future__ import annotations

from math import factorial

import numpy as np


def _mask(n: int, order: int) -> np.ndarray:
    i, j, l = np.indices((n + 1,) * 3)
    return (i + j + l) <= order


def _fact(n: int) -> np.ndarray:
    f = np.array([factorial(i) for i in range(n + 1)], dtype=float)
    return f[:, None, None] * f[None, :, None] * f[None, None, :]


class Jet:
    __slots__ = ("coef", "order")

    def __init__(self, coef: np.ndarray, order: int):
        coef = np.asarray(coef, dtype=np.complex128)
        n = coef.shape[0] - 1
        if coef.shape != (n + 1,) * 3 or order > n:
            raise ValueError("bad jet shape")
        self.coef = np.where(_mask(n, order), coef, 0)
        self.order = order

    @property
    def size(self) -> int:
        return self.coef.shape[0] - 1

    @classmethod
    def constant(cls, value: complex, n: int) -> "Jet":
        c = np.zeros((n + 1,) * 3, dtype=np.complex128)
        c[0, 0, 0] = value
        return cls(c, n)

    @classmethod
    def from_derivatives(cls, derivs: np.ndarray) -> "Jet":
        """From an array of partial derivatives ``derivs[i, j, l]``."""
        n = derivs.shape[0] - 1
        return cls(derivs / _fact(n), n)

    @classmethod
    def exp_linear(cls, value: complex, rates: tuple, n: int) -> "Jet":
        """Jet of ``value * exp(rx dx + ry dy + rt dt)``."""
        p = [np.array([r ** k / factorial(k) for k in range(n + 1)], dtype=np.complex128) for r in rates]
        return cls(value * p[0][:, None, None] * p[1][None, :, None] * p[2][None, None, :], n)

    def _coerce(self, b) -> "Jet":
        if isinstance(b, Jet):
            return b
        return Jet.constant(b, self.size)

    def __add__(self, b):
        b = self._coerce(b)
        return Jet(self.coef + b.coef, min(self.order, b.order))

    __radd__ = __add__

    def __sub__(self, b):
        b = self._coerce(b)
        return Jet(self.coef - b.coef, min(self.order, b.order))

    def __rsub__(self, b):
        return self._coerce(b) - self

    def __neg__(self):
        return Jet(-self.coef, self.order)

    def __mul__(self, b):
        if not isinstance(b, Jet):
            return Jet(self.coef * b, self.order)
        n = self.size
        order = min(self.order, b.order)
        out = np.zeros_like(self.coef)
        for i, j, l in zip(*np.nonzero(self.coef)):
            if i + j + l > order:
                continue
            out[i:, j:, l:] += self.coef[i, j, l] * b.coef[: n + 1 - i, : n + 1 - j, : n + 1 - l]
        return Jet(out, order)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        f0 = self.coef[0, 0, 0]
        if f0 == 0:
            raise ZeroDivisionError("jet has zero constant term")
        h = (self - f0) * (1.0 / f0)
        term = Jet.constant(1.0, self.size)
        total = Jet.constant(1.0, self.size)
        for _ in range(self.order):
            term = term * (-h)
            total = total + term
        return total * (1.0 / f0)

    def __truediv__(self, b):
        if not isinstance(b, Jet):
            return Jet(self.coef / b, self.order)
        return self * b.reciprocal()

    def d(self, axis: str) -> "Jet":
        """Partial derivative; the order drops by one."""
        n = self.size
        ax = "xyt".index(axis)
        out = np.zeros_like(self.coef)
        k = np.arange(1, n + 1, dtype=float)
        src = np.moveaxis(self.coef, ax, 0)[1:]
        dst = np.moveaxis(out, ax, 0)
        dst[:-1] = src * k[:, None, None]
        return Jet(out, self.order - 1)

    def deriv(self, i: int = 0, j: int = 0, l: int = 0) -> complex:
        if i + j + l > self.order:
            raise ValueError(f"derivative order {i + j + l} exceeds jet order {self.order}")
        return complex(self.coef[i, j, l] * factorial(i) * factorial(j) * factorial(l))

    @property
    def value(self) -> complex:
        return complex(self.coef[0, 0, 0])
