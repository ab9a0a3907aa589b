"""Evaluate differential polynomials on grid fields with spectral derivatives."""
from __future__ import annotations

import numpy as np

from ..grid import Field, deriv, pointwise
from .algebra import QI, DiffPolynomial, Sym


class MissingFieldError(KeyError):
    pass


def evaluate(p: DiffPolynomial, env: dict, threshold: float = 1e-12) -> Field:
    """Numeric value of ``p``.

    ``env`` maps base names to fields; a first time derivative ``G_t`` is looked
    up as ``env["G_t"]`` and differentiated spatially as needed.
    """
    if not env:
        raise MissingFieldError("empty environment")
    domain = next(iter(env.values())).domain
    cache: dict = {}

    def value(s: Sym) -> Field:
        if s in cache:
            return cache[s]
        if s.dt == 0:
            key = s.name
        elif s.dt == 1:
            key = f"{s.name}_t"
        else:
            raise MissingFieldError(f"no rule for {s}: only first time derivatives are supported")
        if key not in env:
            raise MissingFieldError(f"no field supplied for {key!r}")
        out = deriv(deriv(env[key], "x", s.dx), "y", s.dy)
        cache[s] = out
        return out

    total = np.zeros(domain.shape, dtype=np.complex128)
    for m, c in p.terms.items():
        term = np.full(domain.shape, complex(c) if isinstance(c, QI) else float(c), dtype=np.complex128)
        for s, e in m:
            v = value(s)
            if e < 0:
                v = pointwise("div", Field.constant(domain, 1.0), v, threshold)
                e = -e
            term = term * v.values ** e
        total += term
    return Field(domain, total)
