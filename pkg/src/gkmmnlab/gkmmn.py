"""Numeric GKMMN system: constraint closure, residuals, (c, u) variables, stepping.

The evolution equations are the engine-derived ones::

    G_t = G_xx - G_yy + (F^2/4)_x - (G^2)_x - A_x + 2 S_y
    S_t = -S_xx + S_yy - 2 (G S)_x + (F S)_y
    F_x = 2 G_y,  A_y = 2 S_x,  f = 2 G_x - F_y

All nonlinear products are dealiased with the 2/3 rule.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .diffpoly.numeric import evaluate
from .diffpoly.systems import cu_system_engine
from .diffpoly import published
from .grid import (Domain, Field, GridError, NoPeriodicAntiderivativeError, SingularFieldError,
                   antideriv, axis_mean, dealias, dealias_mask, deriv, max_abs, pointwise, rms,
                   spectral_tail_fraction)

log = logging.getLogger(__name__)


class ConstraintError(GridError):
    pass


class StepConfigError(ValueError):
    pass


class BlowUpError(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True, eq=False)
class GkmmnState:
    G: Field
    S: Field
    gaugeF: np.ndarray
    gaugeA: np.ndarray
    F: Field
    A: Field
    f: Field

    @property
    def domain(self) -> Domain:
        return self.G.domain

    def constraint_defects(self) -> tuple[float, float]:
        """Relative max-norm defects of ``F_x - 2G_y`` and ``A_y - 2S_x``."""
        d1 = deriv(self.F, "x") - 2 * deriv(self.G, "y")
        d2 = deriv(self.A, "y") - 2 * deriv(self.S, "x")
        s1 = max(max_abs(self.F), max_abs(self.G), 1.0)
        s2 = max(max_abs(self.A), max_abs(self.S), 1.0)
        return max_abs(d1) / s1, max_abs(d2) / s2


@dataclass(frozen=True, eq=False)
class TransformedState:
    c: Field
    u: Field
    threshold: float = 1e-8

    def __post_init__(self):
        small = np.abs(self.c.values) <= self.threshold
        if small.any():
            loc = tuple(int(i) for i in np.argwhere(small)[0])
            raise SingularFieldError(f"|c| <= {self.threshold:g} at {loc}", loc)


def _gauge(g, n: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(g, dtype=np.complex128), (n,)).copy()


def close_constraints(G: Field, S: Field, gaugeF=0.0, gaugeA=0.0, tol: float = 1e-9) -> GkmmnState:
    """Solve ``F_x = 2G_y`` and ``A_y = 2S_x`` with the given zero-mode gauges."""
    d = G.domain
    gF = _gauge(gaugeF, d.Ny)
    gA = _gauge(gaugeA, d.Nx)
    try:
        F = antideriv(2 * deriv(G, "y"), "x", gF, rtol=tol)
    except NoPeriodicAntiderivativeError as e:
        raise ConstraintError(f"x-mean of G must be y-independent ({e})") from e
    try:
        A = antideriv(2 * deriv(S, "x"), "y", gA, rtol=tol)
    except NoPeriodicAntiderivativeError as e:
        raise ConstraintError(f"y-mean of S must be x-independent ({e})") from e
    f = 2 * deriv(G, "x") - deriv(F, "y")
    return GkmmnState(G, S, gF, gA, F, A, f)


def _prod(a: Field, b: Field, dealias_products: bool) -> Field:
    p = a * b
    return dealias(p) if dealias_products else p


def rhs_gkmmn(state: GkmmnState, dealias_products: bool = True) -> tuple[Field, Field]:
    G, S, F, A = state.G, state.S, state.F, state.A
    rG = (deriv(G, "x", 2) - deriv(G, "y", 2)
          + 0.25 * deriv(_prod(F, F, dealias_products), "x")
          - deriv(_prod(G, G, dealias_products), "x")
          - deriv(A, "x") + 2 * deriv(S, "y"))
    rS = (-deriv(S, "x", 2) + deriv(S, "y", 2)
          - 2 * deriv(_prod(G, S, dealias_products), "x")
          + deriv(_prod(F, S, dealias_products), "y"))
    return rG, rS


def residual_gkmmn(state: GkmmnState, Gdot: Field, Sdot: Field,
                      dealias_products: bool = True) -> tuple[Field, Field]:
    rG, rS = rhs_gkmmn(state, dealias_products)
    return Gdot - rG, Sdot - rS


def transform_from_cu(ts: TransformedState, tol: float = 1e-9) -> GkmmnState:
    """``G = -(log c)_x, F = -2(log c)_y, A = -2u_x, S = -u_y``."""
    c, u = ts.c, ts.u
    if c.max_imag() == 0.0 and float(np.min(c.values.real)) > 0.0:
        # a periodic logarithm exists; its mixed partials commute exactly
        logc = pointwise("log", c, threshold=ts.threshold)
        lx, ly = deriv(logc, "x"), deriv(logc, "y")
    else:
        lx = pointwise("div", deriv(c, "x"), c, ts.threshold)
        ly = pointwise("div", deriv(c, "y"), c, ts.threshold)
    G, F = -lx, -2 * ly
    A, S = -2 * deriv(u, "x"), -deriv(u, "y")
    f = 2 * deriv(G, "x") - deriv(F, "y")
    state = GkmmnState(G, S, axis_mean(F, "x"), axis_mean(A, "y"), F, A, f)
    d1, d2 = state.constraint_defects()
    if max(d1, d2) > tol:
        raise ConstraintError(f"transformed state violates constraints ({d1:.2e}, {d2:.2e})")
    return state


def rates_from_cu(ts: TransformedState, cdot: Field, udot: Field) -> tuple[Field, Field]:
    """Chain rule: ``Gdot = -(cdot/c)_x``, ``Sdot = -udot_y``."""
    q = pointwise("div", cdot, ts.c, ts.threshold)
    return -deriv(q, "x"), -deriv(udot, "y")


def residual_cu(ts: TransformedState, cdot: Field, udot: Field,
                       printed: bool = False) -> tuple[Field, Field]:
    """Residuals of the (c, u) system.

    The second equation is the engine form (an equation for ``u_y``); pass
    ``printed=True`` to evaluate the literal published transcription instead.
    """
    env = {"c": ts.c, "u": ts.u, "c_t": cdot, "u_t": udot}
    eq1, eq2 = published.cu_system_printed() if printed else cu_system_engine()
    return evaluate(eq1, env, ts.threshold), evaluate(eq2, env, ts.threshold)


# stepping

def _linear_multipliers(d: Domain) -> tuple[np.ndarray, np.ndarray]:
    kx = d.wavenumbers("x")[:, None]
    ky = d.wavenumbers("y")[None, :]
    lg = -kx ** 2 + ky ** 2
    return lg, -lg


def _project_solvable(gh: np.ndarray, sh: np.ndarray, drift_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero the Fourier modes that make the periodic constraints unsolvable.

    These are the y-dependent part of the x-mean of ``G`` (``kx = 0, ky != 0``)
    and the x-dependent part of the y-mean of ``S``.  Only roundoff-level
    content is removed; anything larger is a genuine loss of solvability.
    """
    bad_g = gh[0, 1:]
    bad_s = sh[1:, 0]
    scale = max(np.max(np.abs(gh)), np.max(np.abs(sh)), 1e-300)
    drift = max(np.max(np.abs(bad_g)), np.max(np.abs(bad_s))) / scale
    if drift > drift_tol:
        raise ConstraintError(f"periodic constraints lost solvability during stepping (drift {drift:.2e})")
    gh = gh.copy()
    sh = sh.copy()
    gh[0, 1:] = 0.0
    sh[1:, 0] = 0.0
    return gh, sh


def _nonlinear(G: Field, S: Field, gaugeF, gaugeA) -> tuple[np.ndarray, np.ndarray]:
    st = close_constraints(G, S, gaugeF, gaugeA)
    F, A = st.F, st.A
    nG = (0.25 * deriv(dealias(F * F), "x") - deriv(dealias(G * G), "x")
          - deriv(A, "x") + 2 * deriv(S, "y"))
    nS = -2 * deriv(dealias(G * S), "x") + deriv(dealias(F * S), "y")
    return np.fft.fft2(nG.values), np.fft.fft2(nS.values)


def step_guarded(state: GkmmnState, dt: float, steps: int, growth: float = 10.0,
                 tail_tol: float = 1e-12, drift_tol: float = 1e-6) -> GkmmnState:
    """Integrating-factor RK4 for the GKMMN system.

    The anisotropic linear parts ``G_xx - G_yy`` and ``-S_xx + S_yy`` are
    applied exactly per Fourier mode.  Raises :class:`BlowUpError` when any
    field's RMS norm exceeds ``growth`` times its initial value.
    """
    d = state.domain
    kmax = d.kmax_retained()
    if dt <= 0 or steps < 0:
        raise StepConfigError("dt must be positive and steps non-negative")
    if dt * kmax ** 2 > 1.0:
        raise StepConfigError(f"dt*k_max^2 = {dt * kmax ** 2:.3g} exceeds 1 (k_max = {kmax:.4g})")
    for name, fld in (("G", state.G), ("S", state.S)):
        tail = spectral_tail_fraction(fld)
        if tail > tail_tol:
            raise StepConfigError(f"{name} is not band-limited: energy fraction {tail:.2e} above cutoff")
    log.info("step_guarded: dt=%g steps=%d gaugeF mean=%g gaugeA mean=%g", dt, steps,
             float(np.mean(np.abs(state.gaugeF))), float(np.mean(np.abs(state.gaugeA))))

    mask = dealias_mask(d)
    lg, ls = _linear_multipliers(d)
    EG, ES = np.exp(lg * dt / 2), np.exp(ls * dt / 2)
    gF, gA = state.gaugeF, state.gaugeA

    def fields(gh, sh):
        return Field(d, np.fft.ifft2(gh)), Field(d, np.fft.ifft2(sh))

    def N(gh, sh):
        gh, sh = _project_solvable(gh, sh, drift_tol)
        return _nonlinear(*fields(gh, sh), gF, gA)

    g = np.fft.fft2(state.G.values) * mask
    s = np.fft.fft2(state.S.values) * mask
    g, s = _project_solvable(g, s, drift_tol)
    real = max(state.G.max_imag(), state.S.max_imag(), float(np.max(np.abs(np.imag(gF)))),
               float(np.max(np.abs(np.imag(gA))))) == 0.0
    n0 = (rms(state.G), rms(state.S))
    ref = tuple(v if v > 0 else max(n0) for v in n0)
    h = dt
    for step in range(1, steps + 1):
        k1 = N(g, s)
        k2 = N(EG * (g + h / 2 * k1[0]), ES * (s + h / 2 * k1[1]))
        k3 = N(EG * g + h / 2 * k2[0], ES * s + h / 2 * k2[1])
        k4 = N(EG ** 2 * g + h * EG * k3[0], ES ** 2 * s + h * ES * k3[1])
        g = EG ** 2 * g + h / 6 * (EG ** 2 * k1[0] + 2 * EG * (k2[0] + k3[0]) + k4[0])
        s = ES ** 2 * s + h / 6 * (ES ** 2 * k1[1] + 2 * ES * (k2[1] + k3[1]) + k4[1])
        g, s = _project_solvable(g * mask, s * mask, drift_tol)
        if real:
            # the flow maps real data to real data; drop amplified roundoff
            g = np.fft.fft2(np.fft.ifft2(g).real)
            s = np.fft.fft2(np.fft.ifft2(s).real)
        Gf, Sf = fields(g, s)
        for name, fld, r in (("G", Gf, ref[0]), ("S", Sf, ref[1])):
            if not fld.is_finite() or (r > 0 and rms(fld) > growth * r):
                raise BlowUpError(f"{name} norm grew beyond {growth}x at step {step}", step)
    Gf, Sf = fields(g, s)
    return close_constraints(Gf, Sf, gF, gA)
