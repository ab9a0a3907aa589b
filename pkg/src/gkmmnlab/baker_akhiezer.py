"""Genus-0 Baker-Akhiezer functions glued to heat-equation data.

On the rational curve with local parameter ``k``::

    psi'(k; x, y, t) = exp(k y + k^2 t) (c + sum_m a_m / (k - p_m))

and ``(c, a_1..a_k)`` are fixed by ``psi'(Q_s) = psi''_s(x, t)`` at the
marked points, where each ``psi''_s`` solves ``psi_t = psi_xx``.  The
interpolation matrix factors as ``diag(exp(Q_s y + Q_s^2 t)) @ M0`` with
``M0`` constant, so every space-time derivative of ``(c, a)`` is obtained
exactly by re-solving against differentiated right-hand sides.  Quotients
(``G``, ``F``, ``A``) go through truncated Taylor jets.

Potentials: ``G = -(log c)_x``, ``S = 0``, ``F = -2 (log c)_y`` and
``A = [c_t - c_xx - c_yy + 2 c_y^2 / c] / c - 2 xi_y`` with ``xi = sum(a) / c``,
so that ``psi_t = (Dx^2 + Dy^2 + F Dy + A) psi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .jets import Jet


class DegenerateConfigurationError(ValueError):
    def __init__(self, message: str, pair: tuple[str, str], cond: float):
        super().__init__(message)
        self.pair = pair
        self.cond = cond


class SingularConfigurationError(ValueError):
    def __init__(self, message: str, location):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class HeatDatum:
    """``psi''(x, t) = sum_j alpha_j exp(kappa_j x + kappa_j^2 t)``."""

    alpha: tuple
    kappa: tuple

    def __post_init__(self):
        if len(self.alpha) != len(self.kappa):
            raise ValueError("alpha and kappa must have equal length")

    def __call__(self, x: float, t: float, dx: int = 0, dt: int = 0) -> complex:
        a = np.asarray(self.alpha, dtype=np.complex128)
        k = np.asarray(self.kappa, dtype=np.complex128)
        return complex(np.sum(a * k ** dx * (k * k) ** dt * np.exp(k * x + k * k * t)))

    def heat_defect(self, x: float, t: float) -> float:
        return abs(self(x, t, dt=1) - self(x, t, dx=2))

    def scaled(self, lam: complex) -> "HeatDatum":
        return HeatDatum(tuple(lam * a for a in self.alpha), self.kappa)

    @classmethod
    def random(cls, rng: np.random.Generator, terms: int = 2, kappa_scale: float = 1.0) -> "HeatDatum":
        a = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
        k = kappa_scale * (rng.uniform(-1, 1, terms) + 1j * rng.uniform(-1, 1, terms))
        return cls(tuple(complex(v) for v in a), tuple(complex(v) for v in k))


def _distinct_points(rng: np.random.Generator, count: int, radius: float, sep: float) -> list:
    pts: list = []
    while len(pts) < count:
        z = complex(radius * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)))
        if all(abs(z - w) >= sep for w in pts):
            pts.append(z)
    return pts


@dataclass(frozen=True)
class BAData:
    """Marked points ``Q_0..Q_k``, poles ``p_1..p_k`` and one heat datum per marked point.

    ``sigma`` permutes the assignment: condition ``s`` uses ``heat[sigma[s]]``.
    """

    Q: tuple
    p: tuple
    heat: tuple
    sigma: tuple | None = None

    def __post_init__(self):
        k = len(self.p)
        if k < 1:
            raise ValueError("need at least one pole (k >= 1)")
        if len(self.Q) != k + 1 or len(self.heat) != k + 1:
            raise ValueError("need k+1 marked points and k+1 heat data for k poles")
        pts = list(self.Q) + list(self.p)
        for (i, a), (j, b) in combinations(enumerate(pts), 2):
            if a == b:
                raise ValueError(f"{self._label(i)} and {self._label(j)} coincide")
        if self.sigma is not None and sorted(self.sigma) != list(range(k + 1)):
            raise ValueError("sigma must be a permutation of 0..k")

    @property
    def k(self) -> int:
        return len(self.p)

    def _label(self, i: int) -> str:
        return f"Q_{i}" if i <= self.k else f"p_{i - self.k}"

    def datum(self, s: int) -> HeatDatum:
        return self.heat[s if self.sigma is None else self.sigma[s]]

    def nearest_pair(self) -> tuple[str, str, float]:
        pts = list(self.Q) + list(self.p)
        best = min(combinations(range(len(pts)), 2), key=lambda ij: abs(pts[ij[0]] - pts[ij[1]]))
        return self._label(best[0]), self._label(best[1]), abs(pts[best[0]] - pts[best[1]])

    def M0(self) -> np.ndarray:
        Q = np.asarray(self.Q, dtype=np.complex128)
        p = np.asarray(self.p, dtype=np.complex128)
        return np.hstack([np.ones((len(Q), 1)), 1.0 / (Q[:, None] - p[None, :])])

    def matrix(self, y: float, t: float) -> np.ndarray:
        Q = np.asarray(self.Q, dtype=np.complex128)
        return np.exp(Q * y + Q * Q * t)[:, None] * self.M0()

    def scaled(self, lam: complex) -> "BAData":
        return BAData(self.Q, self.p, tuple(h.scaled(lam) for h in self.heat), self.sigma)

    @classmethod
    def random(cls, rng: np.random.Generator, k: int, terms: int = 2, radius: float = 1.5,
               sep: float = 0.4) -> "BAData":
        pts = _distinct_points(rng, 2 * k + 1, radius, sep)
        heat = tuple(HeatDatum.random(rng, terms) for _ in range(k + 1))
        return cls(tuple(pts[:k + 1]), tuple(pts[k + 1:]), heat)


@dataclass
class BAFunction:
    data: BAData
    x: float
    y: float
    t: float
    c: complex
    a: np.ndarray
    cond: float
    coeff_jets: list | None = field(default=None, repr=False)

    def rational(self, khat: complex) -> np.ndarray:
        return np.concatenate([[1.0], 1.0 / (khat - np.asarray(self.data.p, dtype=np.complex128))])

    def __call__(self, khat: complex) -> complex:
        w = np.concatenate([[self.c], self.a])
        return complex(np.exp(khat * self.y + khat ** 2 * self.t) * (self.rational(khat) @ w))

    def interpolation_residual(self) -> float:
        """Max relative defect of ``M (c, a) = psi''`` at the marked points."""
        M = self.data.matrix(self.y, self.t)
        rhs = np.array([self.data.datum(s)(self.x, self.t) for s in range(self.data.k + 1)])
        w = np.concatenate([[self.c], self.a])
        scale = max(np.max(np.abs(rhs)), np.max(np.abs(M) @ np.abs(w)), 1e-300)
        return float(np.max(np.abs(M @ w - rhs)) / scale)


DEFAULT_ORDER = 5
COND_LIMIT = 1e12


def _check_conditioning(data: BAData, M: np.ndarray) -> float:
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        a, b, dist = data.nearest_pair()
        raise DegenerateConfigurationError(
            f"interpolation matrix is degenerate (cond {cond:.3e}); nearest pair {a}, {b} "
            f"at distance {dist:.3e}", (a, b), cond)
    return cond


def _rho_jet(data: BAData, x: float, y: float, t: float, order: int) -> list:
    """Jets of ``rho_s = exp(-Q_s y - Q_s^2 t) psi''_s(x, t)`` for every ``s``."""
    out = []
    for s, Q in enumerate(data.Q):
        h = data.datum(s)
        acc = Jet.constant(0.0, order)
        for alpha, kap in zip(h.alpha, h.kappa):
            v = alpha * np.exp(kap * x + kap * kap * t - Q * y - Q * Q * t)
            acc = acc + Jet.exp_linear(v, (kap, -Q, kap * kap - Q * Q), order)
        out.append(acc)
    return out


def coefficient_jets(data: BAData, x: float, y: float, t: float, order: int = DEFAULT_ORDER) -> list:
    """Jets of ``(c, a_1..a_k)`` around ``(x, y, t)``."""
    rho = _rho_jet(data, x, y, t, order)
    Minv = np.linalg.inv(data.M0())
    stack = np.stack([r.coef for r in rho])
    w = np.tensordot(Minv, stack, axes=(1, 0))
    return [Jet(w[i], order) for i in range(data.k + 1)]


def build_psi(data: BAData, x: float, y: float, t: float, order: int = 0) -> BAFunction:
    """Solve the interpolation conditions at ``(x, y, t)``.

    With ``order > 0`` the returned function carries coefficient jets for
    exact derivatives.
    """
    M = data.matrix(y, t)
    cond = _check_conditioning(data, M)
    rhs = np.array([data.datum(s)(x, t) for s in range(data.k + 1)], dtype=np.complex128)
    w = np.linalg.solve(M, rhs)
    jets = None
    if order > 0:
        jets = coefficient_jets(data, x, y, t, order)
    return BAFunction(data, x, y, t, complex(w[0]), w[1:], cond, jets)


@dataclass
class Potentials:
    c: Jet
    xi: Jet
    G: Jet
    F: Jet
    A: Jet

    @property
    def f(self) -> Jet:
        return 2 * self.G.d("x") - self.F.d("y")


def potentials_at(data: BAData, x: float, y: float, t: float, order: int = DEFAULT_ORDER,
                  threshold: float = 1e-12) -> Potentials:
    w = coefficient_jets(data, x, y, t, order)
    c = w[0]
    if abs(c.value) < threshold:
        raise SingularConfigurationError(f"leading coefficient vanishes at (x, y, t) = {(x, y, t)}",
                                         (x, y, t))
    inv = c.reciprocal()
    total = w[1]
    for a in w[2:]:
        total = total + a
    xi = total * inv
    G = -(c.d("x") * inv)
    F = -2 * (c.d("y") * inv)
    cy = c.d("y")
    num = c.d("t") - c.d("x").d("x") - cy.d("y") + 2 * cy * cy * inv
    A = num * inv - 2 * xi.d("y")
    return Potentials(c, xi, G, F, A)


def extract_potentials(data: BAData, points: Sequence[tuple], threshold: float = 1e-12) -> dict:
    """Samples of ``c``, ``G = -(log c)_x`` and ``u = sum(a)/c`` at space-time points."""
    out = {"c": [], "G": [], "u": [], "F": [], "A": []}
    for (x, y, t) in points:
        P = potentials_at(data, x, y, t, order=2, threshold=threshold)
        out["c"].append(P.c.value)
        out["G"].append(P.G.value)
        out["u"].append(P.xi.value)
        out["F"].append(P.F.value)
        out["A"].append(P.A.value)
    return {k: np.array(v, dtype=np.complex128) for k, v in out.items()}


def psi_jet(data: BAData, khat: complex, x: float, y: float, t: float,
            order: int = DEFAULT_ORDER, coeffs: list | None = None) -> Jet:
    """Jet of ``psi'(khat)`` in ``(x, y, t)``."""
    p = np.asarray(data.p, dtype=np.complex128)
    if np.any(np.abs(khat - p) == 0):
        raise ValueError("spectral point coincides with a pole")
    w = coeffs if coeffs is not None else coefficient_jets(data, x, y, t, order)
    r = np.concatenate([[1.0], 1.0 / (khat - p)])
    phi = w[0] * r[0]
    for rm, am in zip(r[1:], w[1:]):
        phi = phi + am * rm
    e = Jet.exp_linear(np.exp(khat * y + khat * khat * t), (0.0, khat, khat * khat), phi.size)
    return e * phi


def _apply_L(psi: Jet, G: Jet) -> Jet:
    return psi.d("x").d("y") + G * psi.d("y")


def _apply_H(psi: Jet, P: Potentials) -> Jet:
    return psi.d("x").d("x") + psi.d("y").d("y") + P.F * psi.d("y") + P.A * psi


def random_spectral_points(data: BAData, rng: np.random.Generator, count: int = 10,
                           radius: float = 2.0, sep: float = 0.2) -> list:
    avoid = list(data.p) + list(data.Q)
    pts: list = []
    while len(pts) < count:
        z = complex(radius * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)))
        if all(abs(z - w) >= sep for w in avoid + pts):
            pts.append(z)
    return pts


def richardson_dt(func, t: float, h: float = 1e-3, levels: int = 2):
    """Richardson-extrapolated central difference of ``func`` at ``t``."""
    table = []
    for lev in range(levels):
        hh = h / 2 ** lev
        table.append((func(t + hh) - func(t - hh)) / (2 * hh))
    for m in range(1, levels):
        fac = 4 ** m
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
    return table[0]


@dataclass
class LReport:
    residual: float
    spread: float
    G_mismatch: float
    count: int

    def as_dict(self) -> dict:
        return {"L_residual": self.residual, "khat_spread": self.spread,
                "G_mismatch": self.G_mismatch, "count": self.count}


def verify_L(data: BAData, khats: Sequence[complex], points: Sequence[tuple],
             G_offset: complex = 0.0) -> LReport:
    """``L psi = psi_xy + G psi_y`` at every spectral/space-time point.

    ``G_offset`` perturbs ``G`` (a negative control).  The spread is the
    relative standard deviation of ``-psi_xy / psi_y`` over the spectral points.
    """
    worst = spread = mism = 0.0
    n = 0
    for (x, y, t) in points:
        w = coefficient_jets(data, x, y, t, order=2)
        if all(not np.any(j.coef) for j in w):
            # psi vanishes identically; L psi = 0 holds vacuously
            n += len(khats)
            continue
        c = w[0]
        G = -(c.d("x") * c.reciprocal()) + G_offset
        ratios = []
        for kh in khats:
            psi = psi_jet(data, kh, x, y, t, coeffs=w)
            lp = _apply_L(psi, G).value
            scale = max(abs(psi.deriv(1, 1)), abs(G.value * psi.deriv(0, 1)), 1e-300)
            if scale > 1e-300:
                worst = max(worst, abs(lp) / scale)
            ratios.append(-psi.deriv(1, 1) / psi.deriv(0, 1))
            n += 1
        ratios = np.array(ratios)
        mean = ratios.mean()
        if abs(mean) > 0:
            spread = max(spread, float(np.std(ratios) / abs(mean)))
            mism = max(mism, float(np.max(np.abs(ratios - (G.value - G_offset))) / abs(mean)))
        elif np.max(np.abs(ratios)) > 0:
            spread = max(spread, float(np.std(ratios)))
    return LReport(worst, spread, mism, n)


@dataclass
class TFlowReport:
    psi_t_residual: float
    psi_t_residual_analytic: float
    triple_residual: float
    max_abs_A: float
    count: int

    def as_dict(self) -> dict:
        return {"psi_t_residual": self.psi_t_residual,
                "psi_t_residual_analytic": self.psi_t_residual_analytic,
                "triple_residual": self.triple_residual, "max_abs_A": self.max_abs_A,
                "count": self.count}


def verify_t_flow(data: BAData, khats: Sequence[complex], points: Sequence[tuple],
                  h: float = 1e-3) -> TFlowReport:
    """Check ``psi_t = H psi`` and the full triple identity.

    ``psi_t`` is taken both analytically and by Richardson differences in
    ``t``; the triple residual ``(L_t - [H, L] + f L) psi`` uses a Richardson
    difference for ``G_t``.
    """
    r_fd = r_an = r_tri = amax = 0.0
    n = 0
    for (x, y, t) in points:
        P = potentials_at(data, x, y, t, order=4)
        amax = max(amax, abs(P.A.value))
        Gt = richardson_dt(lambda tt: potentials_at(data, x, y, tt, order=1).G.value, t, h)
        for kh in khats:
            psi = psi_jet(data, kh, x, y, t, order=4, coeffs=None)
            Hpsi = _apply_H(psi, P)
            scale = max(abs(psi.deriv(0, 0, 1)), abs(psi.deriv(2)), abs(psi.deriv(0, 2)),
                        abs(P.F.value * psi.deriv(0, 1)), 1e-300)
            pt_fd = richardson_dt(lambda tt: build_psi(data, x, y, tt)(kh), t, h)
            r_fd = max(r_fd, abs(pt_fd - Hpsi.value) / scale)
            r_an = max(r_an, abs(psi.deriv(0, 0, 1) - Hpsi.value) / scale)
            # L psi = 0, so the triple residual reduces to G_t psi_y + L(H psi)
            lh = _apply_L(Hpsi, P.G)
            tri = Gt * psi.deriv(0, 1) + lh.value
            tscale = max(abs(Gt * psi.deriv(0, 1)), abs(Hpsi.deriv(1, 1)), 1e-300)
            r_tri = max(r_tri, abs(tri) / tscale)
            n += 1
    return TFlowReport(r_fd, r_an, r_tri, amax, n)


def heat_defects(data: BAData, points: Sequence[tuple]) -> float:
    worst = 0.0
    for s in range(data.k + 1):
        h = data.heat[s]
        for (x, _, t) in points:
            scale = max(abs(h(x, t, dt=1)), 1e-300)
            worst = max(worst, h.heat_defect(x, t) / scale)
    return worst


def lattice_fields(data: BAData, xs: np.ndarray, ys: np.ndarray, t: float,
                   threshold: float = 1e-12) -> tuple[np.ndarray, np.ndarray, float]:
    """``c`` and ``G = -c_x/c`` on the tensor lattice ``xs x ys`` at time ``t``.

    Returns ``(c, G, worst condition number)``.
    """
    X, Y = np.meshgrid(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), indexing="ij")
    row = np.linalg.inv(data.M0())[0]
    c = np.zeros(X.shape, dtype=np.complex128)
    cx = np.zeros_like(c)
    for s, Q in enumerate(data.Q):
        h = data.datum(s)
        for alpha, kap in zip(h.alpha, h.kappa):
            e = alpha * np.exp(kap * X + kap * kap * t - Q * Y - Q * Q * t)
            c += row[s] * e
            cx += row[s] * kap * e
    cond = max(_check_conditioning(data, data.matrix(float(y), t)) for y in (np.min(ys), np.max(ys)))
    small = np.abs(c) < threshold
    if small.any():
        loc = tuple(int(i) for i in np.argwhere(small)[0])
        raise SingularConfigurationError(f"leading coefficient vanishes at lattice index {loc}", loc)
    return c, -cx / c, cond
