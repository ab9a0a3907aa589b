"""Published forms of the GKMMN equations, transcribed verbatim, plus the
engine-verified corrections where a transcription disagrees with the triple.

Everything is kept as parseable text so the golden derivation report is
reproducible from this table alone.
"""
from __future__ import annotations

from math import comb

from .algebra import QI, DiffPolynomial, Sym
from .parser import parse_operator, parse_poly

L_TEXT = "Dx*Dy + G*Dy + S"
# H as printed next to L.
H_PRINTED_TEXT = "Dx^2 + F*Dy + A"
# H with elliptic principal part; the form that reproduces the published constraints.
H_TEXT = "Dx^2 + Dy^2 + F*Dy + A"

F_PRINTED = "2*G_x - F_y"
CONSTRAINTS_PRINTED = ("F_x - 2*G_y", "A_y - 2*S_x")
EVOLUTION_PRINTED = {
    # G_t = G_xx - G_yy + (F^2)_x - (G^2)_x - A_x + 2 S_y
    "G": "G_xx - G_yy + 2*F*F_x - 2*G*G_x - A_x + 2*S_y",
    # S_t = -S_xx + S_yy + 2 (G S)_x - 2 (F S)_y
    "S": "-S_xx + S_yy + 2*G_x*S + 2*G*S_x - 2*F_y*S - 2*F*S_y",
}
EVOLUTION_CORRECTED = {
    # G_t = G_xx - G_yy + (F^2/4)_x - (G^2)_x - A_x + 2 S_y
    "G": "G_xx - G_yy + 1/2*F*F_x - 2*G*G_x - A_x + 2*S_y",
    # S_t = -S_xx + S_yy - 2 (G S)_x + (F S)_y
    "S": "-S_xx + S_yy - 2*G_x*S - 2*G*S_x + F_y*S + F*S_y",
}
EVOLUTION_PRETTY = {
    "G": {"printed": "G_t = G_xx - G_yy + (F^2)_x - (G^2)_x - A_x + 2 S_y",
          "corrected": "G_t = G_xx - G_yy + (F^2/4)_x - (G^2)_x - A_x + 2 S_y"},
    "S": {"printed": "S_t = -S_xx + S_yy + 2 (G S)_x - 2 (F S)_y",
          "corrected": "S_t = -S_xx + S_yy - 2 (G S)_x + (F S)_y"},
}

# (G, F, A, S) in terms of (c, u).
COLE_HOPF_RULES = {"G": "-c_x*c^-1", "F": "-2*c_y*c^-1", "A": "-2*u_x", "S": "-u_y"}


def L():
    return parse_operator(L_TEXT)


def H():
    return parse_operator(H_TEXT)


def H_printed():
    return parse_operator(H_PRINTED_TEXT)


def cole_hopf_rules() -> dict:
    return {k: parse_poly(v) for k, v in COLE_HOPF_RULES.items()}


def cu_system_printed() -> tuple:
    """Residual polynomials ``lhs - rhs`` of the (c, u) system as printed."""
    eq1 = parse_poly("(c_t - c_xx + c_yy)*c^-1").diff("x") - parse_poly("2*u_yy - 2*u_xx")
    eq2 = (parse_poly("u_t - u_yy + u_xx")
           - parse_poly("2*u_y*c_x*c^-1").diff("x")
           + parse_poly("2*u_y*c_y*c^-1").diff("y"))
    return eq1, eq2


def cole_hopf_1d() -> DiffPolynomial:
    """``[(c_t - c_xx)/c]_x``: the classical heat-equation linearization."""
    return parse_poly("(c_t - c_xx)*c^-1").diff("x")


# Complex coordinates: Dz = Dx - I Dy, Dzbar = Dx + I Dy, so Dz Dzbar = Laplacian.

def dz(p: DiffPolynomial) -> DiffPolynomial:
    return p.diff("x") - p.diff("y").scale(QI(0, 1))


def dzbar(p: DiffPolynomial) -> DiffPolynomial:
    return p.diff("x") + p.diff("y").scale(QI(0, 1))


def to_real_coordinates(p: DiffPolynomial, rotate_time: bool = True) -> DiffPolynomial:
    """Reinterpret formal x/y derivatives as Dz/Dzbar and expand in real x, y.

    With ``rotate_time`` the formal time is ``i*tau`` (``d/dt = -I d/dtau``),
    so t-symbols in the output refer to the real parameter tau.
    """
    def expand(s: Sym) -> DiffPolynomial:
        a, b = s.dx, s.dy
        out = DiffPolynomial()
        for j in range(a + 1):
            for l in range(b + 1):
                c = QI(comb(a, j) * comb(b, l)) * _ipow(-1, a - j) * _ipow(1, b - l)
                out = out + DiffPolynomial.sym(Sym(s.name, s.dt, j + l, a - j + b - l)).scale(c)
        if rotate_time and s.dt:
            out = out.scale(_ipow(-1, s.dt))
        return out

    return p.map_symbols(expand)


def _ipow(sign: int, n: int):
    """``(sign*I)**n`` exactly."""
    out = QI(1)
    for _ in range(n):
        out = out * QI(0, sign)
    return out


def selfadjoint_system_printed() -> tuple:
    """Both equations of the self-adjoint (z, zbar) system, transcribed literally.

    ``[(c_t - 4c_xy) c^-1]_z = 8 u_xy`` and
    ``(u + 4u_xy)_zbar = 2/i [(u_zbar c_z / c) - (u_zbar c_zbar / c)_zbar]``.
    """
    eq1 = dz(parse_poly("(c_t - 4*c_xy)*c^-1")) - parse_poly("8*u_xy")
    uzb = dzbar(parse_poly("u"))
    cz = dz(parse_poly("c"))
    czb = dzbar(parse_poly("c"))
    cinv = parse_poly("c^-1")
    bracket = uzb * cz * cinv - dzbar(uzb * czb * cinv)
    eq2 = dzbar(parse_poly("u + 4*u_xy")) - bracket.scale(QI(0, -2))
    return eq1, eq2


def selfadjoint_system_variants() -> dict:
    """Readings of the printed system that repair its apparent typos."""
    uzb = dzbar(parse_poly("u"))
    cz = dz(parse_poly("c"))
    czb = dzbar(parse_poly("c"))
    cinv = parse_poly("c^-1")
    out = {}
    out["eq1: RHS sign flipped"] = dz(parse_poly("(c_t - 4*c_xy)*c^-1")) + parse_poly("8*u_xy")
    for label, first in (("as printed", uzb * cz * cinv), ("first bracket differentiated", dz(uzb * cz * cinv))):
        bracket = first - dzbar(uzb * czb * cinv)
        for sign_label, sign in (("2/i", QI(0, -2)), ("-2/i", QI(0, 2))):
            out[f"eq2: u -> u_t, {label}, {sign_label}"] = (
                dzbar(parse_poly("u_t + 4*u_xy")) - bracket.scale(sign))
    return out
