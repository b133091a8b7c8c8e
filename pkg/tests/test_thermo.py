import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evoflow.thermo import (
    DomainError,
    GasParams,
    ThermoPath,
    ThermoState,
    adiabatic_path,
    carnot_cycle,
    clausius,
    eos,
    first_law_residual,
    gasdyn_entropy,
    heat_form_commutator,
    integrating_factor_check,
    isothermal_path,
    sound_speed,
)

AIR = GasParams(1.4, 1.0)
positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


class TestGasParams:
    def test_cv_exact(self):
        assert AIR.c_v == 1.0 / (1.4 - 1.0)
        assert AIR.c_v == pytest.approx(2.5, rel=1e-15)
        assert GasParams(5 / 3, 2.0).c_v == 2.0 / (5 / 3 - 1.0)

    @pytest.mark.parametrize("gamma,R", [(1.0, 1.0), (0.9, 1.0), (1.4, 0.0), (1.4, -1.0)])
    def test_rejects(self, gamma, R):
        with pytest.raises(DomainError):
            GasParams(gamma, R)


class TestEos:
    def test_reference_state(self):
        s = eos(1.0, 1.0, AIR)
        assert (s.p, s.S) == (1.0, 0.0)
        assert s.E == pytest.approx(2.5, rel=1e-15)

    def test_volume_doubling(self):
        s = eos(2.0, 1.0, AIR)
        assert s.p == 0.5
        assert s.S == pytest.approx(0.6931471805599453, abs=1e-15)

    def test_temperature_doubling(self):
        s = eos(1.0, 2.0, AIR)
        assert s.p == 2.0
        assert s.E == pytest.approx(5.0, rel=1e-15)

    @pytest.mark.parametrize("V,T", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, float("nan"))])
    def test_domain(self, V, T):
        with pytest.raises(DomainError):
            eos(V, T, AIR)

    @given(V=positive, T=positive, R=st.floats(0.1, 10.0))
    def test_state_equation(self, V, T, R):
        params = GasParams(1.4, R)
        s = eos(V, T, params)
        assert s.p * s.V - params.R * s.T == pytest.approx(0.0, abs=1e-12 * params.R * T)
        assert s.E == pytest.approx(params.c_v * T, rel=1e-15)


class TestFirstLaw:
    def test_isotherm_residual_converges(self):
        res = [abs(first_law_residual(isothermal_path(AIR, 1.0, 1.0, 2.0, n))) for n in (10, 20, 40)]
        assert res[0] > res[1] > res[2]
        assert res[1] / res[2] == pytest.approx(4.0, rel=0.05)

    def test_isotherm_total_heat(self):
        path = isothermal_path(AIR, 1.0, 1.0, 2.0, 200)
        assert path.dQ.sum() == pytest.approx(math.log(2.0), rel=1e-14)

    def test_adiabat(self):
        path = adiabatic_path(AIR, 1.0, 1.0, 2.0, 400)
        assert abs(first_law_residual(path)) < 1e-5
        coarse = adiabatic_path(AIR, 1.0, 1.0, 2.0, 200)
        assert abs(first_law_residual(path)) < abs(first_law_residual(coarse))

    def test_injected_heat(self):
        path = adiabatic_path(AIR, 1.0, 1.0, 2.0, 400)
        dQ = path.dQ.copy()
        dQ[7] = 0.1
        bumped = ThermoPath(path.states, dQ)
        assert first_law_residual(bumped) - first_law_residual(path) == pytest.approx(-0.1, abs=1e-14)

    def test_step_arrays_checked(self):
        path = adiabatic_path(AIR, 1.0, 1.0, 2.0, 4)
        with pytest.raises(ValueError):
            ThermoPath(path.states, np.zeros(3))
        with pytest.raises(ValueError):
            ThermoPath(path.states[:1], np.zeros(0))

    def test_cyclic_must_close(self):
        path = isothermal_path(AIR, 1.0, 1.0, 2.0, 4)
        with pytest.raises(ValueError):
            ThermoPath(path.states, path.dQ, cyclic=True)


class TestHeatForm:
    @pytest.mark.parametrize("R,V,expected", [(1.0, 2.0, 0.5), (1.0, 1.0, 1.0), (2.0, 4.0, 0.5)])
    def test_commutator_values(self, R, V, expected):
        params = GasParams(1.4, R)
        for T in (0.5, 1.0, 7.0):
            assert heat_form_commutator(params, T, V) == expected

    def test_commutator_domain(self):
        with pytest.raises(DomainError):
            heat_form_commutator(AIR, -1.0, 1.0)

    def test_integrating_factor_closes(self):
        rep = integrating_factor_check(AIR, n=64)
        assert rep.defect < 1e-10

    def test_undivided_matches_R_over_Vmin(self):
        rep = integrating_factor_check(AIR, (1.0, 2.0), (0.5, 3.0), n=64)
        # interior nodes start one spacing above V_min
        V_first = 0.5 + 2.5 / 63
        assert rep.undivided_max == pytest.approx(AIR.R / V_first, rel=1e-9)

    def test_undivided_converges_to_R_over_V(self):
        errs = [integrating_factor_check(AIR, (1.0, 2.0), (1.0, 2.0), n=n).undivided_max_error
                for n in (16, 32)]
        # the coefficients are linear in T, so the error is at rounding level
        assert max(errs) < 1e-10


class TestClausius:
    def test_carnot_reversible(self):
        res = clausius(carnot_cycle(AIR, 2.0, 1.0, steps=4000))
        assert res.delta_S == 0.0
        assert abs(res.heat_integral) < 1e-10
        assert res.classification == "reversible"

    def test_isothermal_expansion(self):
        res = clausius(isothermal_path(AIR, 1.0, 1.0, 2.0, 100))
        assert res.delta_S == pytest.approx(math.log(2.0), rel=1e-14)
        assert res.heat_integral == pytest.approx(math.log(2.0), rel=1e-14)
        assert res.classification == "reversible"

    def test_friction_is_irreversible(self):
        res = clausius(isothermal_path(AIR, 1.0, 1.0, 2.0, 100, friction=0.2))
        assert res.delta_S > res.heat_integral
        assert res.production == pytest.approx(0.2, rel=1e-12)
        assert res.classification == "irreversible-consistent"

    def test_violation(self):
        path = isothermal_path(AIR, 1.0, 1.0, 2.0, 100)
        cheat = ThermoPath(path.states, path.dQ + 0.01)
        assert clausius(cheat).classification == "violates-second-law"

    def test_cycle_residue_bounded_by_h2(self):
        # heat rebuilt from the first law with a trapezoidal p dV
        def loop(steps):
            cyc = carnot_cycle(AIR, 2.0, 1.0, steps=steps)
            E, V, p = cyc.column("E"), cyc.column("V"), cyc.column("p")
            dQ = np.diff(E) + 0.5 * (p[:-1] + p[1:]) * np.diff(V)
            return abs(clausius(ThermoPath(cyc.states, dQ, cyclic=True)).heat_integral), cyc.max_step
        for steps in (40, 400, 4000):
            err, h = loop(steps)
            assert err <= h**2

    @given(factor=st.floats(1e-3, 1e3), friction=st.sampled_from([0.0, 0.2]),
           extra=st.sampled_from([0.0, 0.05]))
    @settings(max_examples=40, deadline=None)
    def test_classification_scale_invariant(self, factor, friction, extra):
        base = isothermal_path(AIR, 1.5, 1.0, 2.0, 64, friction=friction)
        base = ThermoPath(base.states, base.dQ + extra / 64, base.dW)
        assert clausius(base.scaled(factor)).classification == clausius(base).classification

    def test_domain(self):
        path = isothermal_path(AIR, 1.0, 1.0, 2.0, 4)
        bad = list(path.states)
        bad[2] = ThermoState(-1.0, bad[2].V, bad[2].p, bad[2].E, bad[2].S)
        with pytest.raises(DomainError):
            clausius(ThermoPath(bad, path.dQ))


class TestGasdynamic:
    @pytest.mark.parametrize("p,rho,s", [(1.0, 1.0, 1.0), (2.0, 1.0, 2.0)])
    def test_entropy_trivial(self, p, rho, s):
        assert gasdyn_entropy(p, rho, AIR) == s

    def test_entropy_sod_right(self):
        assert float(gasdyn_entropy(0.1, 0.125, AIR)) == pytest.approx(1.8379, abs=5e-5)

    @pytest.mark.parametrize("p,rho,a", [(1.0, 1.0, 1.183216), (1.0, 1.4, 1.0), (4.0, 1.0, 2.366432)])
    def test_sound_speed(self, p, rho, a):
        assert float(sound_speed(p, rho, AIR)) == pytest.approx(a, abs=1e-6)

    @pytest.mark.parametrize("p,rho", [(0.0, 1.0), (1.0, -1.0)])
    def test_domain(self, p, rho):
        with pytest.raises(DomainError):
            gasdyn_entropy(p, rho, AIR)
        with pytest.raises(DomainError):
            sound_speed(p, rho, AIR)

    @given(s=st.floats(0.1, 10.0), rho=st.lists(st.floats(0.01, 100.0), min_size=2, max_size=20))
    def test_constant_on_adiabat(self, s, rho):
        rho = np.array(rho)
        vals = gasdyn_entropy(s * rho**AIR.gamma, rho, AIR)
        np.testing.assert_allclose(vals, s, rtol=1e-14)
