"""Periodic 2D spectral grid: fields, Fourier differentiation, antiderivatives.

Fields are stored as complex arrays of shape ``(Nx, Ny)`` with
``values[i, j] ~ f(i*Lx/Nx, j*Ly/Ny)``; axis 0 is ``x`` and axis 1 is ``y``.
All operations are pure and return new fields.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

AXES = {"x": 0, "y": 1}


class GridError(ValueError):
    """Base class for grid-level numerical errors."""


class InvalidFieldError(GridError):
    pass


class NoPeriodicAntiderivativeError(GridError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class SingularFieldError(GridError):
    def __init__(self, message: str, location: tuple[int, ...]):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class Domain:
    Lx: float
    Ly: float
    Nx: int
    Ny: int

    def __post_init__(self):
        for n in (self.Nx, self.Ny):
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"sample counts must be even and >= 8, got {n}")
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError("period lengths must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nx, self.Ny)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.Nx) * (self.Lx / self.Nx)
        y = np.arange(self.Ny) * (self.Ly / self.Ny)
        return x, y

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.coords()
        return np.meshgrid(x, y, indexing="ij")

    def wavenumbers(self, axis: str) -> np.ndarray:
        n, length = (self.Nx, self.Lx) if axis == "x" else (self.Ny, self.Ly)
        return 2 * np.pi * np.fft.fftfreq(n, d=length / n)

    def mode_index(self, axis: str) -> np.ndarray:
        n = self.Nx if axis == "x" else self.Ny
        return np.fft.fftfreq(n, d=1.0 / n)

    def kmax_retained(self) -> float:
        """Largest wavenumber magnitude kept by :func:`dealias` on either axis."""
        kx = np.abs(self.wavenumbers("x"))[np.abs(self.mode_index("x")) < self.Nx / 3]
        ky = np.abs(self.wavenumbers("y"))[np.abs(self.mode_index("y")) < self.Ny / 3]
        return float(max(kx.max(), ky.max()))


@dataclass(frozen=True, eq=False)
class Field:
    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.domain.shape:
            raise InvalidFieldError(f"expected shape {self.domain.shape}, got {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    # construction helpers
    @classmethod
    def from_function(cls, domain: Domain, func) -> "Field":
        X, Y = domain.mesh()
        return cls(domain, np.broadcast_to(func(X, Y), domain.shape))

    @classmethod
    def constant(cls, domain: Domain, value: complex) -> "Field":
        return cls(domain, np.full(domain.shape, value, dtype=np.complex128))

    @classmethod
    def zeros(cls, domain: Domain) -> "Field":
        return cls.constant(domain, 0.0)

    def _wrap(self, values) -> "Field":
        return Field(self.domain, values)

    def _other(self, b):
        if isinstance(b, Field):
            if b.domain != self.domain:
                raise InvalidFieldError("fields live on different domains")
            return b.values
        return b

    def __add__(self, b):
        return self._wrap(self.values + self._other(b))

    __radd__ = __add__

    def __sub__(self, b):
        return self._wrap(self.values - self._other(b))

    def __rsub__(self, b):
        return self._wrap(self._other(b) - self.values)

    def __mul__(self, b):
        return self._wrap(self.values * self._other(b))

    __rmul__ = __mul__

    def __truediv__(self, b):
        return pointwise("div", self, b)

    def __neg__(self):
        return self._wrap(-self.values)

    @property
    def real(self) -> "Field":
        return self._wrap(self.values.real)

    @property
    def imag(self) -> "Field":
        return self._wrap(self.values.imag)

    def conj(self) -> "Field":
        return self._wrap(self.values.conj())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def max_imag(self) -> float:
        return float(np.max(np.abs(self.values.imag)))


def _check_finite(field: Field) -> None:
    if not field.is_finite():
        bad = np.argwhere(~np.isfinite(field.values))[0]
        raise InvalidFieldError(f"non-finite sample at index {tuple(int(i) for i in bad)}")


def _multiplier(domain: Domain, axis: str, order: int) -> np.ndarray:
    k = domain.wavenumbers(axis)
    n = domain.Nx if axis == "x" else domain.Ny
    mult = (1j * k) ** order
    if order % 2:
        # odd derivatives of the real Nyquist cosine vanish on the grid
        mult[n // 2] = 0.0
    return mult[:, None] if axis == "x" else mult[None, :]


def deriv(field: Field, axis: str, order: int = 1) -> Field:
    """Spectral derivative of the trigonometric interpolant along ``axis``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    _check_finite(field)
    if order == 0:
        return field
    ax = AXES[axis]
    fhat = np.fft.fft(field.values, axis=ax)
    return Field(field.domain, np.fft.ifft(fhat * _multiplier(field.domain, axis, order), axis=ax))


def dx(field: Field, order: int = 1) -> Field:
    return deriv(field, "x", order)


def dy(field: Field, order: int = 1) -> Field:
    return deriv(field, "y", order)


def axis_mean(field: Field, axis: str) -> np.ndarray:
    """Mean along ``axis``; a 1D array over the transverse coordinate."""
    return field.values.mean(axis=AXES[axis])


def antideriv(field: Field, axis: str, zero_mode: Union[np.ndarray, complex, float] = 0.0,
              rtol: float = 1e-10) -> Field:
    """Periodic antiderivative along ``axis`` whose axis-mean equals ``zero_mode``.

    Raises :class:`NoPeriodicAntiderivativeError` when the axis-mean of
    ``field`` does not vanish, naming the worst transverse index.
    """
    _check_finite(field)
    ax = AXES[axis]
    d = field.domain
    n = d.Nx if axis == "x" else d.Ny
    scale = max(float(np.max(np.abs(field.values))), 1.0)
    means = axis_mean(field, axis)
    worst = int(np.argmax(np.abs(means)))
    if abs(means[worst]) > rtol * scale:
        raise NoPeriodicAntiderivativeError(
            f"{axis}-mean of field is {abs(means[worst]):.3e} at transverse index {worst}; "
            "no periodic antiderivative exists", worst)
    fhat = np.fft.fft(field.values, axis=ax)
    nyq = fhat[n // 2, :] if axis == "x" else fhat[:, n // 2]
    if np.max(np.abs(nyq)) > rtol * scale * n:
        raise NoPeriodicAntiderivativeError(
            "field carries Nyquist content; its antiderivative is not representable",
            int(np.argmax(np.abs(nyq))))
    k = d.wavenumbers(axis)
    inv = np.zeros_like(k, dtype=np.complex128)
    nz = k != 0
    inv[nz] = 1.0 / (1j * k[nz])
    inv[n // 2] = 0.0
    inv = inv[:, None] if axis == "x" else inv[None, :]
    out = np.fft.ifft(fhat * inv, axis=ax)
    zm = np.broadcast_to(np.asarray(zero_mode, dtype=np.complex128), means.shape)
    out = out + (zm[None, :] if axis == "x" else zm[:, None])
    return Field(d, out)


def pointwise(op: str, a: Field, b=None, threshold: float = 1e-12) -> Field:
    """Elementwise arithmetic. ``div`` and ``log`` guard against near-zero values."""
    av = a.values
    bv = b.values if isinstance(b, Field) else b
    if op == "add":
        return Field(a.domain, av + bv)
    if op == "sub":
        return Field(a.domain, av - bv)
    if op in ("mul", "scale"):
        return Field(a.domain, av * bv)
    if op == "div":
        den = np.broadcast_to(np.asarray(bv, dtype=np.complex128), av.shape)
        small = np.abs(den) < threshold
        if small.any():
            loc = tuple(int(i) for i in np.argwhere(small)[0])
            raise SingularFieldError(f"division by |value| < {threshold:g} at {loc}", loc)
        return Field(a.domain, av / den)
    if op == "log":
        small = np.abs(av) < threshold
        if small.any():
            loc = tuple(int(i) for i in np.argwhere(small)[0])
            raise SingularFieldError(f"log of |value| < {threshold:g} at {loc}", loc)
        return Field(a.domain, np.log(av))
    if op == "exp":
        return Field(a.domain, np.exp(av))
    raise ValueError(f"unknown pointwise op {op!r}")


def dealias_mask(domain: Domain) -> np.ndarray:
    kx = np.abs(domain.mode_index("x")) < domain.Nx / 3
    ky = np.abs(domain.mode_index("y")) < domain.Ny / 3
    return kx[:, None] & ky[None, :]


def dealias(field: Field) -> Field:
    """Zero every Fourier mode outside the 2/3 box on each axis.

    A field whose tail is already at roundoff level is returned unchanged,
    which makes the operation bit-exactly idempotent.
    """
    fhat = np.fft.fft2(field.values)
    tail = ~dealias_mask(field.domain)
    peak = float(np.max(np.abs(fhat)))
    if peak == 0.0 or float(np.max(np.abs(fhat[tail]))) <= 1e-13 * peak:
        return field
    fhat[tail] = 0.0
    return Field(field.domain, np.fft.ifft2(fhat))


def spectral_tail_fraction(field: Field) -> float:
    """Share of spectral energy outside the dealiasing box."""
    fhat = np.fft.fft2(field.values)
    e = np.abs(fhat) ** 2
    total = e.sum()
    if total == 0:
        return 0.0
    return float(e[~dealias_mask(field.domain)].sum() / total)


def rms(field: Field) -> float:
    return float(np.sqrt(np.mean(np.abs(field.values) ** 2)))


def max_abs(field: Field) -> float:
    return float(np.max(np.abs(field.values)))


def rel(num: float, *refs: float) -> float:
    """``num`` divided by the largest reference; zero over zero is zero."""
    den = max(refs) if refs else 0.0
    if num == 0.0:
        return 0.0
    return num / den if den > 0 else float("inf")


def random_bandlimited(domain: Domain, rng: np.random.Generator, kmax: int = 3,
                       amplitude: float = 1.0, real: bool = True) -> Field:
    """Random trigonometric polynomial with modes ``|n| <= kmax`` on each axis."""
    fhat = np.zeros(domain.shape, dtype=np.complex128)
    ix = domain.mode_index("x")
    iy = domain.mode_index("y")
    sel = (np.abs(ix)[:, None] <= kmax) & (np.abs(iy)[None, :] <= kmax)
    count = int(sel.sum())
    fhat[sel] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    vals = np.fft.ifft2(fhat)
    if real:
        vals = vals.real
    vals = vals / max(np.max(np.abs(vals)), 1e-300) * amplitude
    return Field(domain, vals)
