"""Self-adjoint (z, zbar) reduction: magnetic field and the residuals of the
factorizable systems.

Complex derivatives follow ``d = Dx - i Dy`` and ``dbar = Dx + i Dy`` so that
``d dbar = Laplacian`` with no factor 4.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffpoly.numeric import evaluate
from .diffpoly.systems import selfadjoint_system_engine
from .grid import Field, SingularFieldError, dealias, deriv, max_abs, pointwise, rms


class RealityError(ValueError):
    pass


def zbar_derivs(f: Field) -> tuple[Field, Field]:
    fx, fy = deriv(f, "x"), deriv(f, "y")
    return fx - 1j * fy, fx + 1j * fy


def laplacian(f: Field) -> Field:
    return deriv(f, "x", 2) + deriv(f, "y", 2)


def _check_real_positive(c: Field, threshold: float) -> None:
    scale = max(max_abs(c), 1.0)
    if c.max_imag() > 1e-12 * scale:
        raise RealityError(f"c must be real (max imaginary part {c.max_imag():.2e})")
    bad = c.values.real <= threshold
    if bad.any():
        loc = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SingularFieldError(f"c must be positive; {c.values.real[loc]:.3e} at {loc}", loc)


def magnetic_field(c: Field, threshold: float = 1e-12) -> tuple[Field, Field]:
    """``B = -1/2 Laplacian(log c)`` (real) and ``G = 1/2 d(log c)``."""
    _check_real_positive(c, threshold)
    logc = pointwise("log", c.real, threshold=threshold)
    B = -0.5 * laplacian(logc)
    d, _ = zbar_derivs(logc)
    return B.real, 0.5 * d


def _prod(a: Field, b: Field, dealias_products: bool) -> Field:
    p = a * b
    return dealias(p) if dealias_products else p


def residual_pauli_linear(c: Field, cdot: Field, T: Field, threshold: float = 1e-12,
                 dealias_products: bool = True, reality_tol: float = 1e-10) -> tuple[Field, float]:
    """``r = c_t - 4 c_xy - T c`` and ``harm = max |Laplacian T|``."""
    _check_real_positive(c, threshold)
    if T.max_imag() > reality_tol * max(max_abs(T), 1.0):
        raise RealityError(f"T must be real (max imaginary part {T.max_imag():.2e})")
    r = cdot - 4 * deriv(deriv(c, "x"), "y") - _prod(T, c, dealias_products)
    return r, max_abs(laplacian(T))


@dataclass(frozen=True, eq=False)
class PauliState:
    """``c = exp(2 Phi)`` real positive, ``u = a + i b`` with ``a_y + b_x = 0``."""

    c: Field
    u: Field
    threshold: float = 1e-12
    tol: float = 1e-9

    def __post_init__(self):
        _check_real_positive(self.c, self.threshold)
        defect = self.admissibility_defect()
        scale = max(max_abs(self.u), 1.0)
        if defect > self.tol * scale:
            raise ValueError(f"u is not admissible: max |a_y + b_x| = {defect:.2e}")

    @property
    def a(self) -> Field:
        return self.u.real

    @property
    def b(self) -> Field:
        return self.u.imag

    @property
    def Phi(self) -> Field:
        return 0.5 * pointwise("log", self.c.real, threshold=self.threshold)

    @property
    def S(self) -> Field:
        return deriv(self.a, "x") - deriv(self.b, "y")

    def admissibility_defect(self) -> float:
        return max_abs(deriv(self.a, "y") + deriv(self.b, "x"))

    @classmethod
    def from_stream(cls, c: Field, psi: Field, **kw) -> "PauliState":
        """Admissible ``u`` from a real stream function: ``a = psi_x``, ``b = -psi_y``."""
        a = deriv(psi.real, "x")
        b = -deriv(psi.real, "y")
        return cls(c, a + 1j * b, **kw)


def residual_pauli_factorized(state: PauliState, cdot: Field, Sdot: Field, dealias_products: bool = True,
                reality_tol: float = 1e-10) -> tuple[Field, Field]:
    """``r1 = c_t - 4 c_xy - 8 a_y c``;
    ``r2 = S_t + 4 S_xy - 8 [S Phi_xy - S_x Phi_y - S_y Phi_x]``."""
    c, S, Phi = state.c, state.S, state.Phi
    ay = deriv(state.a, "y")
    r1 = cdot - 4 * deriv(deriv(c, "x"), "y") - 8 * _prod(ay, c, dealias_products)
    Px, Py = deriv(Phi, "x"), deriv(Phi, "y")
    bracket = (_prod(S, deriv(Px, "y"), dealias_products) - _prod(deriv(S, "x"), Py, dealias_products)
               - _prod(deriv(S, "y"), Px, dealias_products))
    r2 = Sdot + 4 * deriv(deriv(S, "x"), "y") - 8 * bracket
    real_rates = cdot.max_imag() <= reality_tol and Sdot.max_imag() <= reality_tol
    if real_rates:
        for name, r in (("r1", r1), ("r2", r2)):
            if r.max_imag() > reality_tol * max(max_abs(r), 1.0):
                raise RealityError(f"{name} has imaginary part {r.max_imag():.2e} for real input")
    return r1, r2


def ay_identity_defect(u: Field) -> float:
    """``max |8 a_y + 4 Im(u_z)|``; vanishes whenever ``a_y + b_x = 0``."""
    uz, _ = zbar_derivs(u)
    return max_abs(8 * deriv(u.real, "y") + 4 * uz.imag)


def residual_selfadjoint(c: Field, u: Field, cdot: Field, udot: Field,
               threshold: float = 1e-12) -> tuple[Field, Field]:
    """Engine-derived (z, zbar) system in real coordinates with real time ``tau``."""
    eq1, eq2 = selfadjoint_system_engine()
    env = {"c": c, "u": u, "c_t": cdot, "u_t": udot}
    return evaluate(eq1, env, threshold), evaluate(eq2, env, threshold)


def modal_solution_pauli_linear(c0: Field, t: float, T: float = 0.0, band: int | None = None,
                       rtol: float = 1e-13) -> Field:
    """Exact solution of ``c_t = 4 c_xy + T c`` for constant ``T`` (per Fourier mode).

    ``4 d_xy`` is anti-diffusive along one diagonal, so only modes with
    ``|n_x|, |n_y| <= band`` are propagated.  By default ``band`` is the
    smallest box holding every mode of ``c0`` above ``rtol`` of the peak.
    """
    d = c0.domain
    fhat = np.fft.fft2(c0.values)
    nx = np.abs(d.mode_index("x"))[:, None]
    ny = np.abs(d.mode_index("y"))[None, :]
    if band is None:
        live = np.abs(fhat) > rtol * np.max(np.abs(fhat))
        band = int(max(np.max(np.where(live, nx, 0)), np.max(np.where(live, ny, 0))))
    keep = (nx <= band) & (ny <= band)
    kx = d.wavenumbers("x")[:, None]
    ky = d.wavenumbers("y")[None, :]
    mult = np.where(keep, np.exp((-4 * kx * ky + T) * t), 0.0)
    return Field(d, np.fft.ifft2(fhat * mult))


def pauli_report(c: Field, T: Field | None = None, cdot: Field | None = None) -> dict:
    B, _ = magnetic_field(c)
    out = {"B_rms": rms(B), "B_max_imag": B.max_imag(), "c_min": float(c.values.real.min())}
    if T is not None:
        out["T_harmonic_defect"] = max_abs(laplacian(T))
        out["T_max_imag"] = T.max_imag()
        if cdot is not None:
            r, _ = residual_pauli_linear(c, cdot, T)
            out["residual_pauli_linear"] = max_abs(r)
    return out
