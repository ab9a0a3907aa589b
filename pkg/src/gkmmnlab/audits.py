"""Seeded numeric audits shared by the command line and the acceptance suite.

Each audit returns plain dictionaries of measured values so callers can
attach tolerances and pass/fail flags.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .burgers2d import (SeparablePotential, SeparableSolver, TrigSeries, fd_weights, separability_check,
                        verify_b2)
from .diffpoly.numeric import evaluate
from .diffpoly.systems import gkmmn
from .gkmmn import GkmmnState, close_constraints, rhs_gkmmn, step_guarded
from .grid import Domain, Field, deriv, max_abs, random_bandlimited, rel, rms


# triple identity on the grid

def _trig_field(domain: Domain, rng: np.random.Generator, kmax: int, amplitude: float,
                fx, fy) -> Field:
    X, Y = domain.mesh()
    wx, wy = 2 * np.pi / domain.Lx, 2 * np.pi / domain.Ly
    vals = np.zeros(domain.shape)
    for m in range(1, kmax + 1):
        for n in range(0 if fy is np.cos else 1, kmax + 1):
            vals += rng.standard_normal() * fx(m * wx * X) * fy(n * wy * Y)
    return Field(domain, vals * amplitude / max(np.max(np.abs(vals)), 1e-300))


def random_constrained_state(domain: Domain, rng: np.random.Generator, kmax: int = 3,
                             amplitude: float = 0.2) -> GkmmnState:
    """Random band-limited state in the parity class
    ``G`` odd in x / even in y, ``S`` odd in both, gauge of ``F`` odd in y,
    gauge of ``A`` even in x.

    The flow preserves this class, and inside it the x-means of ``G_y`` and
    the y-means of ``S_x`` vanish for all time, so the periodic constraints
    stay solvable along the trajectory.  Generic periodic data lose
    solvability immediately (``d/dt mean_x G = 2 d_y mean_x S``).
    """
    G = _trig_field(domain, rng, kmax, amplitude, np.sin, np.cos)
    S = _trig_field(domain, rng, kmax, amplitude, np.sin, np.sin)
    x, y = domain.coords()
    wx, wy = 2 * np.pi / domain.Lx, 2 * np.pi / domain.Ly
    gF = sum(rng.standard_normal() * np.sin(n * wy * y) for n in range(1, kmax + 1)) * amplitude / kmax
    gA = sum(rng.standard_normal() * np.cos(m * wx * x) for m in range(0, kmax + 1)) * amplitude / kmax
    return close_constraints(G, S, gF, gA)


def apply_L(st: GkmmnState, psi: Field) -> Field:
    return deriv(deriv(psi, "x"), "y") + st.G * deriv(psi, "y") + st.S * psi


def apply_H(st: GkmmnState, psi: Field) -> Field:
    return deriv(psi, "x", 2) + deriv(psi, "y", 2) + st.F * deriv(psi, "y") + st.A * psi


def triple_residual(st: GkmmnState, Gdot: Field, Sdot: Field, psi: Field) -> float:
    """Relative RMS of ``(L_t - [H, L] + f L) psi``."""
    Lp = apply_L(st, psi)
    Hp = apply_H(st, psi)
    Lt = Gdot * deriv(psi, "y") + Sdot * psi
    HL = apply_H(st, Lp)
    LH = apply_L(st, Hp)
    fL = st.f * Lp
    r = Lt - (HL - LH) + fL
    return rel(rms(r), rms(Lt), rms(HL), rms(LH), rms(fL))


def symbolic_rates(st: GkmmnState) -> tuple[Field, Field]:
    """Evolution right-hand sides from the derivation engine, evaluated on the grid."""
    r = gkmmn()
    env = {"G": st.G, "S": st.S, "F": st.F, "A": st.A}
    return evaluate(r.evolution_for("G").rhs, env), evaluate(r.evolution_for("S").rhs, env)


_FORWARD5 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def fd_rates(st: GkmmnState, h: float) -> tuple[Field, Field]:
    """One-sided five-point time derivative at ``t = 0`` along the integrator trajectory."""
    traj = [st]
    for _ in range(4):
        traj.append(step_guarded(traj[-1], h, 1))
    Gd = sum(w * s.G.values for w, s in zip(_FORWARD5, traj)) / h
    Sd = sum(w * s.S.values for w, s in zip(_FORWARD5, traj)) / h
    return Field(st.domain, Gd), Field(st.domain, Sd)


def triple_audit(domain: Domain, seed: int, states: int = 5, psis: int = 3, h: float = 1e-3,
                 kmax: int = 3, amplitude: float = 0.2) -> list:
    """Per-state triple residuals with FD and symbolic rates, and the cross-layer gap."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(states):
        st = random_constrained_state(domain, rng, kmax, amplitude)
        Gfd, Sfd = fd_rates(st, h)
        Gsy, Ssy = symbolic_rates(st)
        nG, nS = rhs_gkmmn(st)
        cross = rel(max(rms(Gsy - nG), rms(Ssy - nS)), rms(Gsy), rms(Ssy))
        ps = [random_bandlimited(domain, rng, kmax, 1.0, real=False) for _ in range(psis)]
        out.append({
            "state": i,
            "triple_fd": max(triple_residual(st, Gfd, Sfd, p) for p in ps),
            "triple_symbolic": max(triple_residual(st, Gsy, Ssy, p) for p in ps),
            "cross_layer": cross,
            "constraint_defect": max(st.constraint_defects()),
        })
    return out


# 1D Cole-Hopf

def cole_hopf_1d_audit(domain: Domain, t: float = 0.1, modes: tuple = ((1, 0.5), (2, 0.3))) -> dict:
    """``c = 2 + sum a_n e^{-n^2 t} cos(n x)``: ``G = -c_x/c`` against ``G_t = G_xx - (G^2)_x``.

    ``G_t`` is obtained in closed form from ``c_t``; no grid time stepping.
    """
    w = 2 * np.pi / domain.Lx

    def c_parts(t):
        def c(X, Y):
            return 2.0 + sum(a * np.exp(-(n * w) ** 2 * t) * np.cos(n * w * X) for n, a in modes) + 0 * Y

        def ct(X, Y):
            return sum(-(n * w) ** 2 * a * np.exp(-(n * w) ** 2 * t) * np.cos(n * w * X) for n, a in modes) + 0 * Y
        return Field.from_function(domain, c), Field.from_function(domain, ct)

    c, ct = c_parts(t)
    G = -deriv(c, "x") / c
    Gt = -deriv(ct / c, "x")
    st = close_constraints(G, Field.zeros(domain))
    rG, rS = rhs_gkmmn(st, dealias_products=False)
    res = Gt - rG
    return {"residual": rms(res), "max_residual": max_abs(res),
            "relative": rel(rms(res), rms(Gt), rms(deriv(G, "x", 2))),
            "S_residual": rms(rS)}


# B2 pipeline

@dataclass
class B2Case:
    pot: SeparablePotential
    c0: Field
    solver: SeparableSolver


def b2_case(domain: Domain, rng: np.random.Generator, degree: int = 3, amplitude: float = 1.0,
            c_mean: float = 3.0, c_amplitude: float = 1.0, c_kmax: int = 3, modal_cap: int = 15,
            strict: bool = False, truncation_tol: float = 1e-8) -> B2Case:
    pot = SeparablePotential(domain, TrigSeries.random(rng, degree, amplitude),
                             TrigSeries.random(rng, degree, amplitude))
    c0 = c_mean + random_bandlimited(domain, rng, c_kmax, c_amplitude)
    return B2Case(pot, c0, SeparableSolver(pot, modal_cap, strict, truncation_tol))


def b2_audit(case: B2Case, times: list, fd_step: float = 5e-4) -> list:
    """Residual of the mapped nonlinear system and the separability certificate at each time.

    The residual uses the exact modal rate; the finite-difference rate from a
    five-point stencil around each time is reported alongside.
    """
    out = []
    s = case.solver
    for t in times:
        c, frac = s.evolve(case.c0, t)
        nodes = [t + j * fd_step for j in (range(-2, 3) if t >= 2 * fd_step else range(0, 5))]
        traj = [s.propagate(case.c0, tt) for tt in nodes]
        i = nodes.index(t)
        exact = verify_b2(nodes, traj, case.pot, rates=[s.rate(f) for f in traj], at=[i])
        fd = verify_b2(nodes, traj, case.pot, at=[i])
        out.append({"t": t, "discarded": frac, "residual": exact.residual_G[0],
                    "residual_S": exact.residual_S[0], "residual_fd": fd.residual_G[0],
                    "separability": exact.separability[0], "separability_fd": fd.separability[0],
                    "min_c": exact.min_c[0]})
    return out


def trajectory_rate(solver: SeparableSolver, c0: Field, nodes: list, t: float) -> Field:
    """Finite-difference ``c_t`` at ``t`` from modal solutions at ``nodes``."""
    w = fd_weights(nodes, t)
    return Field(c0.domain, sum(wj * solver.propagate(c0, tt).values for wj, tt in zip(w, nodes)))


def nonseparable_control(case: B2Case, t: float = 0.05, eps: float = 0.3) -> float:
    """Certificate for ``c`` from the solver paired with a rate that carries an extra
    non-separable potential ``eps sin(x) sin(y)``; must be far from zero."""
    d = case.c0.domain
    c, _ = case.solver.evolve(case.c0, t)
    W = Field.from_function(d, lambda X, Y: eps * np.sin(2 * np.pi * X / d.Lx) * np.sin(2 * np.pi * Y / d.Ly))
    return separability_check(c, case.solver.rate(c) + W * c)
