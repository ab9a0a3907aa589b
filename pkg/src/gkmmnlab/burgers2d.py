"""The S = 0 reduction: exact solution of the separable linear equation

    c_t = c_xx - c_yy + (U(x) + V(y)) c

by dense 1D eigendecompositions, the Cole-Hopf map back to (G, F, A), and
residual/separability certificates.
"""
from __future__ import annotations

import warnings
from math import factorial
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gkmmn import GkmmnState, residual_gkmmn
from .grid import (Domain, Field, SingularFieldError, axis_mean, deriv, pointwise, rel, rms,
                   spectral_tail_fraction)


# Retained eigenmodes of the anti-diffusive y-operator; None keeps all of them.
DEFAULT_MODAL_CAP = 15


class TruncationWarning(UserWarning):
    pass


class TruncationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrigSeries:
    """``a0 + sum_n cos[n-1] cos(2 pi n s/L) + sin[n-1] sin(2 pi n s/L)``."""

    a0: float = 0.0
    cos: tuple = ()
    sin: tuple = ()

    @property
    def degree(self) -> int:
        return max(len(self.cos), len(self.sin))

    def sample(self, s: np.ndarray, length: float) -> np.ndarray:
        out = np.full(s.shape, float(self.a0))
        w = 2 * np.pi / length
        for n, a in enumerate(self.cos, start=1):
            out += a * np.cos(n * w * s)
        for n, b in enumerate(self.sin, start=1):
            out += b * np.sin(n * w * s)
        return out

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 3, amplitude: float = 1.0) -> "TrigSeries":
        raw = rng.uniform(-1, 1, size=2 * degree + 1)
        raw *= amplitude / np.sum(np.abs(raw))
        return cls(float(raw[0]), tuple(raw[1:degree + 1]), tuple(raw[degree + 1:]))


@dataclass(frozen=True)
class SeparablePotential:
    domain: Domain
    U_series: TrigSeries = field(default_factory=TrigSeries)
    V_series: TrigSeries = field(default_factory=TrigSeries)

    def __post_init__(self):
        if self.U_series.degree >= self.domain.Nx / 3 or self.V_series.degree >= self.domain.Ny / 3:
            raise ValueError("potential is not band-limited below the 2/3 cutoff")

    @property
    def U(self) -> np.ndarray:
        x, _ = self.domain.coords()
        return self.U_series.sample(x, self.domain.Lx)

    @property
    def V(self) -> np.ndarray:
        _, y = self.domain.coords()
        return self.V_series.sample(y, self.domain.Ly)

    def field(self) -> Field:
        return Field(self.domain, self.U[:, None] + self.V[None, :])


def second_derivative_matrix(n: int, length: float) -> np.ndarray:
    """Dense Fourier second-derivative matrix (real symmetric circulant)."""
    k = 2 * np.pi * np.fft.fftfreq(n, d=length / n)
    col = np.fft.ifft(-(k ** 2)).real
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Eigendecomposition of a symmetric 1D operator ``sign * d2 + diag(potential)``."""

    values: np.ndarray
    vectors: np.ndarray

    @classmethod
    def build(cls, n: int, length: float, potential: np.ndarray, sign: float) -> "EigenBasis":
        op = sign * second_derivative_matrix(n, length) + np.diag(potential)
        op = 0.5 * (op + op.T)
        w, v = np.linalg.eigh(op)
        return cls(w, v)

    def orthonormality_defect(self) -> float:
        v = self.vectors
        return float(np.max(np.abs(v.T @ v - np.eye(v.shape[1]))))

    def propagator(self, t: float, keep: int | None = None) -> np.ndarray:
        v = self.vectors if keep is None else self.vectors[:, :keep]
        lam = self.values if keep is None else self.values[:keep]
        return (v * np.exp(lam * t)) @ v.T

    def matrix(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


class SeparableSolver:
    """Exact modal evolution for ``c_t = A_x c + A_y c`` with
    ``A_x = d_xx + U`` and ``A_y = -d_yy + V``.

    ``A_y`` is anti-diffusive; only its ``modal_cap`` lowest eigenmodes are
    retained and the dropped initial energy is reported.
    """

    def __init__(self, pot: SeparablePotential, modal_cap: int | None = DEFAULT_MODAL_CAP, strict: bool = False,
                 truncation_tol: float = 1e-8):
        d = pot.domain
        self.domain = d
        self.pot = pot
        self.modal_cap = d.Ny if modal_cap is None else min(int(modal_cap), d.Ny)
        if not 1 <= self.modal_cap <= d.Ny:
            raise ValueError("modal_cap must lie in [1, Ny]")
        self.strict = strict
        self.truncation_tol = truncation_tol
        self.bx = EigenBasis.build(d.Nx, d.Lx, pot.U, +1.0)
        self.by = EigenBasis.build(d.Ny, d.Ly, pot.V, -1.0)

    def discarded_fraction(self, c0: Field) -> float:
        C = c0.values
        total = np.sum(np.abs(C) ** 2)
        if total == 0 or self.modal_cap == self.domain.Ny:
            return 0.0
        dropped = C @ self.by.vectors[:, self.modal_cap:]
        return float(np.sum(np.abs(dropped) ** 2) / total)

    def propagate(self, c0: Field, t: float) -> Field:
        """Evolve by ``t`` (either sign) without checks."""
        Ex = self.bx.propagator(t)
        Ey = self.by.propagator(t, self.modal_cap)
        return Field(self.domain, Ex @ c0.values @ Ey.T)

    def evolve(self, c0: Field, t: float, band_tol: float = 1e-12) -> tuple[Field, float]:
        if t < 0:
            raise ValueError("t must be non-negative")
        tail = spectral_tail_fraction(c0)
        if tail > band_tol:
            raise ValueError(f"c0 is not band-limited (tail fraction {tail:.2e})")
        frac = self.discarded_fraction(c0)
        if frac > self.truncation_tol:
            msg = f"modal truncation discards {frac:.3e} of the initial energy"
            if self.strict:
                raise TruncationError(msg)
            warnings.warn(msg, TruncationWarning, stacklevel=2)
        return self.propagate(c0, t), frac

    def rate(self, c: Field) -> Field:
        """``A_x c + A_y c`` with the dense operators (exact time derivative of a modal solution)."""
        Ax = self.bx.matrix()
        Ay = self.by.matrix()
        return Field(self.domain, Ax @ c.values + c.values @ Ay.T)


def solve_separable(c0: Field, pot: SeparablePotential, t: float, modal_cap: int | None = DEFAULT_MODAL_CAP,
                     strict: bool = False) -> tuple[Field, float]:
    """``c(t)`` and the discarded-energy fraction for the separable linear equation."""
    return SeparableSolver(pot, modal_cap, strict).evolve(c0, t)


def _require_positive(c: Field, threshold: float = 1e-12) -> None:
    scale = max(float(np.max(np.abs(c.values))), 1.0)
    if c.max_imag() > 1e-12 * scale:
        raise SingularFieldError("c must be real", (0, 0))
    bad = c.values.real <= threshold
    if bad.any():
        loc = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SingularFieldError(f"c must be positive; min {c.values.real.min():.3e} at {loc}", loc)


def cole_hopf_map(c: Field, pot: SeparablePotential) -> GkmmnState:
    """``G = -(log c)_x``, ``F = -2(log c)_y``, ``S = 0``, ``A = U(x)``.

    ``F`` carries its full x-mean at the current time (recorded as gaugeF);
    ``A`` is ``U`` with additive constant zero.
    """
    _require_positive(c)
    logc = pointwise("log", c.real)
    G = (-deriv(logc, "x")).real
    F = (-2 * deriv(logc, "y")).real
    d = c.domain
    A = Field(d, np.broadcast_to(pot.U[:, None], d.shape))
    S = Field.zeros(d)
    f = 2 * deriv(G, "x") - deriv(F, "y")
    return GkmmnState(G, S, axis_mean(F, "x"), pot.U.astype(np.complex128), F, A, f.real)


def fd_weights(nodes: Sequence[float], at: float, order: int = 1) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``at``."""
    z = np.asarray(nodes, dtype=float) - at
    n = len(z)
    scale = max(np.max(np.abs(z)), 1e-300)
    zs = z / scale
    V = np.vander(zs, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = factorial(order)
    return np.linalg.solve(V, rhs) / scale ** order


def trajectory_rates(times: Sequence[float], fields: Sequence[Field], points: int = 5) -> list:
    """Time derivative at each snapshot from the ``points`` nearest snapshots."""
    times = np.asarray(times, dtype=float)
    if len(times) < 3:
        raise ValueError("need at least three snapshots for finite differencing")
    points = min(points, len(times))
    out = []
    for i, t in enumerate(times):
        idx = np.sort(np.argsort(np.abs(times - t), kind="stable")[:points])
        w = fd_weights(times[idx], t)
        vals = sum(wj * fields[j].values for wj, j in zip(w, idx))
        out.append(Field(fields[i].domain, vals))
    return out


def separability_check(c: Field, cdot: Field, threshold: float = 1e-8) -> float:
    """RMS of ``d_x d_y [(c_t - c_xx + c_yy)/c]``; zero iff the potential is separable."""
    q = pointwise("div", cdot - deriv(c, "x", 2) + deriv(c, "y", 2), c, threshold)
    return rms(deriv(deriv(q, "x"), "y"))


@dataclass
class B2Report:
    times: list
    residual_G: list
    residual_S: list
    separability: list
    min_c: list

    @property
    def max_residual(self) -> float:
        return max(max(self.residual_G), max(self.residual_S))

    def records(self) -> list:
        out = []
        for t, rg, rs, sep, mc in zip(self.times, self.residual_G, self.residual_S,
                                      self.separability, self.min_c):
            out.append({"t": t, "residual_G": rg, "residual_S": rs, "separability": sep, "min_c": mc})
        return out


def verify_b2(times: Sequence[float], c_traj: Sequence[Field], pot: SeparablePotential,
              rates: Sequence[Field] | None = None, at: Sequence[int] | None = None) -> B2Report:
    """Map each snapshot through :func:`cole_hopf_map` and evaluate the GKMMN residual.

    Rates of ``c`` come from finite differences over the trajectory unless
    supplied.  ``at`` restricts the report to the given snapshot indices.
    """
    if rates is None:
        rates = trajectory_rates(times, c_traj)
    idx = range(len(times)) if at is None else at
    rep = B2Report([], [], [], [], [])
    for i in idx:
        c, cdot = c_traj[i], rates[i]
        state = cole_hopf_map(c, pot)
        Gdot = -deriv(pointwise("div", cdot.real, c.real), "x")
        rG, rS = residual_gkmmn(state, Gdot, Field.zeros(c.domain), dealias_products=False)
        scale = max(rms(Gdot), rms(deriv(state.G, "x", 2)), rms(deriv(state.G, "y", 2)))
        rep.times.append(float(times[i]))
        rep.residual_G.append(rel(rms(rG), scale))
        rep.residual_S.append(rms(rS))
        rep.separability.append(separability_check(c, cdot))
        rep.min_c.append(float(c.values.real.min()))
    return rep
