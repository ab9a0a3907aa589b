
import numpy as np
import pytest

from gkmmnlab.audits import random_constrained_state, symbolic_rates
from gkmmnlab.gkmmn import (BlowUpError, ConstraintError, StepConfigError, TransformedState,
                            close_constraints, rates_from_cu, residual_gkmmn, residual_cu,
                            rhs_gkmmn, step_guarded, transform_from_cu)
from gkmmnlab.grid import (Domain, Field, SingularFieldError, deriv, max_abs, random_bandlimited,
                           rel, rms)


def _trig(d, f):
    return Field.from_function(d, f)


def test_close_constraints_zero_fields(dom32):
    gF = np.sin(np.arange(dom32.Ny) * dom32.Ly / dom32.Ny)
    gA = 0.5 * np.ones(dom32.Nx)
    st = close_constraints(Field.zeros(dom32), Field.zeros(dom32), gF, gA)
    assert np.allclose(st.F.values, gF[None, :])
    assert np.allclose(st.A.values, 0.5)
    assert np.allclose(st.f.values, -np.cos(np.arange(dom32.Ny) * dom32.Ly / dom32.Ny)[None, :], atol=1e-12)


def test_close_constraints_closed_form():
    # oracle: F = 2 * int_x d_y(sin(ax) cos(by)) = 2 (b/a) cos(ax) sin(by)
    d = Domain(3.0, 5.0, 32, 32)
    a, b = 2 * np.pi / d.Lx, 2 * np.pi / d.Ly
    G = _trig(d, lambda X, Y: np.sin(a * X) * np.cos(b * Y))
    st = close_constraints(G, Field.zeros(d))
    F = _trig(d, lambda X, Y: 2 * (b / a) * np.cos(a * X) * np.sin(b * Y))
    assert max_abs(st.F - F) <= 1e-12
    assert max(st.constraint_defects()) <= 1e-12


def test_close_constraints_rejects_unsolvable(dom32):
    G = _trig(dom32, lambda X, Y: np.cos(Y))
    with pytest.raises(ConstraintError, match="x-mean of G must be y-independent"):
        close_constraints(G, Field.zeros(dom32))


def test_residual_zero_state(dom32):
    z = Field.zeros(dom32)
    rG, rS = residual_gkmmn(close_constraints(z, z), z, z)
    assert rms(rG) == 0.0 and rms(rS) == 0.0


def test_residual_1d_burgers(dom64):
    G = _trig(dom64, lambda X, Y: 0.3 * np.sin(X) + 0.1 * np.cos(2 * X))
    st = close_constraints(G, Field.zeros(dom64))
    Gdot = deriv(G, "x", 2) - deriv(G * G, "x")
    rG, rS = residual_gkmmn(st, Gdot, Field.zeros(dom64))
    assert max_abs(rG) <= 1e-10 and max_abs(rS) <= 1e-10


def test_residual_with_symbolic_rates(dom64, rng):
    st = random_constrained_state(dom64, rng)
    Gd, Sd = symbolic_rates(st)
    rG, rS = residual_gkmmn(st, Gd, Sd)
    assert rel(max(rms(rG), rms(rS)), rms(Gd), rms(Sd)) <= 1e-9


def test_cross_layer_agreement(dom64):
    rng = np.random.default_rng(99)
    for _ in range(3):
        st = random_constrained_state(dom64, rng, amplitude=0.5)
        Gs, Ss = symbolic_rates(st)
        Gn, Sn = rhs_gkmmn(st)
        assert rel(max(rms(Gs - Gn), rms(Ss - Sn)), rms(Gs), rms(Ss)) <= 1e-9


def test_transform_trivial(dom32):
    st = transform_from_cu(TransformedState(Field.constant(dom32, 1.0), Field.zeros(dom32)))
    assert all(max_abs(f) == 0.0 for f in (st.G, st.S, st.F, st.A, st.f))


def test_transform_closed_form(dom64):
    c = _trig(dom64, lambda X, Y: 2 + np.cos(X))
    st = transform_from_cu(TransformedState(c, Field.zeros(dom64)))
    G = _trig(dom64, lambda X, Y: np.sin(X) / (2 + np.cos(X)))
    assert max_abs(st.G - G) <= 1e-12
    assert max(st.constraint_defects()) <= 1e-9


def test_transform_random_satisfies_constraints(dom64, rng):
    c = 3 + random_bandlimited(dom64, rng, 3)
    u = random_bandlimited(dom64, rng, 3)
    st = transform_from_cu(TransformedState(c, u))
    assert max(st.constraint_defects()) <= 1e-9


def test_transform_singular(dom32):
    c = _trig(dom32, lambda X, Y: np.cos(X))
    with pytest.raises(SingularFieldError):
        TransformedState(c, Field.zeros(dom32))


def test_residual_cu_trivial(dom32):
    z = Field.zeros(dom32)
    r1, r2 = residual_cu(TransformedState(Field.constant(dom32, 1.0), z), z, z)
    assert rms(r1) == 0.0 and rms(r2) == 0.0


def test_residual_cu_b2_case(dom64, rng):
    from gkmmnlab.burgers2d import SeparablePotential, SeparableSolver, TrigSeries
    from gkmmnlab.grid import antideriv
    Useries = TrigSeries.random(rng, 3)
    Useries = TrigSeries(0.0, Useries.cos, Useries.sin)
    for U in (TrigSeries(0.0, [], []), Useries):
        pot = SeparablePotential(dom64, U, TrigSeries.random(rng, 3))
        solver = SeparableSolver(pot, modal_cap=15)
        c = solver.propagate(3 + random_bandlimited(dom64, rng, 3), 0.05)
        # u = 0 when U vanishes; otherwise A = -2u_x = U
        u = antideriv(Field(dom64, np.broadcast_to(-0.5 * pot.U[:, None], dom64.shape)), "x")
        r1, _ = residual_cu(TransformedState(c, u), solver.rate(c), Field.zeros(dom64))
        assert max_abs(r1) <= 1e-8


def test_cross_system_equivalence(dom64, rng):
    # residual of the (G, S) system with chain-rule rates equals minus the (c, u) residual
    c = 3 + random_bandlimited(dom64, rng, 2)
    u = random_bandlimited(dom64, rng, 2, 0.5)
    cd, ud = random_bandlimited(dom64, rng, 2), random_bandlimited(dom64, rng, 2)
    ts = TransformedState(c, u)
    rG, rS = residual_gkmmn(transform_from_cu(ts), *rates_from_cu(ts, cd, ud), dealias_products=False)
    r1, r2 = residual_cu(ts, cd, ud)
    assert rms(rG + r1) <= 1e-7 * rms(r1)
    assert rms(rS + r2) <= 1e-7 * rms(r2)


def test_step_zero_state(dom32):
    z = Field.zeros(dom32)
    out = step_guarded(close_constraints(z, z), 1e-3, 10)
    assert max_abs(out.G) == 0.0 and max_abs(out.S) == 0.0


def test_step_cole_hopf_1d(dom64):
    # oracle: c = 2 + 0.5 e^{-t} cos x solves c_t = c_xx; G = -(log c)_x
    def G_at(t):
        return _trig(dom64, lambda X, Y: 0.5 * np.exp(-t) * np.sin(X) / (2 + 0.5 * np.exp(-t) * np.cos(X)))
    st = close_constraints(G_at(0.0), Field.zeros(dom64))
    out = step_guarded(st, 1e-3, 50)
    assert max_abs(out.G - G_at(0.05)) <= 1e-4


def test_step_residual_is_second_order(dom64):
    st = random_constrained_state(dom64, np.random.default_rng(5))
    res = []
    for dt in (2e-3, 1e-3):
        s1 = step_guarded(st, dt, 1)
        s2 = step_guarded(s1, dt, 1)
        Gd = (s2.G - st.G) * (1 / (2 * dt))
        Sd = (s2.S - st.S) * (1 / (2 * dt))
        rG, rS = residual_gkmmn(s1, Gd, Sd)
        res.append(max(rms(rG), rms(rS)))
    assert res[1] < res[0] / 3.0


def test_step_preserves_constraints_and_reality(dom64):
    st = random_constrained_state(dom64, np.random.default_rng(8))
    out = step_guarded(st, 1e-3, 20)
    assert max(out.constraint_defects()) <= 1e-8
    assert max(out.G.max_imag(), out.S.max_imag(), out.F.max_imag(), out.A.max_imag()) <= 1e-10


def test_step_cfl_and_band_checks(dom64):
    z = Field.zeros(dom64)
    st = close_constraints(z, z)
    with pytest.raises(StepConfigError):
        step_guarded(st, 0.1, 1)
    hi = _trig(dom64, lambda X, Y: np.sin(30 * X))
    with pytest.raises(StepConfigError):
        step_guarded(close_constraints(hi, z), 1e-4, 1)


def test_step_blowup_guard(dom64):
    # -S_xx is anti-diffusive: a high x-mode grows like e^{k^2 t}
    S = _trig(dom64, lambda X, Y: 1e-3 * np.sin(20 * X) * np.sin(Y))
    with pytest.raises(BlowUpError) as e:
        step_guarded(close_constraints(Field.zeros(dom64), S), 2e-3, 20)
    assert 1 <= e.value.step <= 20
