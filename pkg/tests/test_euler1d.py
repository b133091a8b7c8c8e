import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evoflow.euler1d import (
    CFLError,
    FlowSetup,
    PositivityError,
    PrimState,
    VacuumError,
    conservation_defect,
    entropy_along_trajectory,
    entropy_field,
    exact_riemann,
    l1_error,
    run,
    shock_flags,
    step,
    step_conservative,
    uniform_grid,
)
from evoflow.scenarios import entropy_wave_state
from evoflow.thermo import GasParams, gasdyn_entropy

from oracles import pressure_oracle

AIR = GasParams()
SOD_L = PrimState(1.0, 0.0, 1.0)
SOD_R = PrimState(0.125, 0.0, 0.1)


def sod(N, t_end=0.25, seeds=()):
    x = uniform_grid(N)
    init = PrimState(np.where(x < 0.5, 1.0, 0.125), np.zeros(N), np.where(x < 0.5, 1.0, 0.1))
    return run(FlowSetup(x, init, AIR, t_end, seeds=seeds))


@pytest.fixture(scope="module")
def sod400():
    return sod(400, seeds=(0.3, 0.6))


states = st.builds(
    PrimState,
    st.floats(0.05, 10.0),
    st.floats(-2.0, 2.0),
    st.floats(0.05, 10.0),
)


class TestRiemann:
    def test_sod_star(self):
        fan = exact_riemann(SOD_L, SOD_R, AIR)
        assert fan.pstar == pytest.approx(0.30313, abs=5e-6)
        assert fan.ustar == pytest.approx(0.92745, abs=5e-6)
        assert (fan.left_wave, fan.right_wave) == ("rarefaction", "shock")
        rl, rr = fan.star_densities()
        assert rl == pytest.approx(0.42632, abs=5e-6)
        assert rr == pytest.approx(0.26557, abs=5e-6)

    def test_equal_states(self):
        s = PrimState(0.7, 0.3, 2.0)
        fan = exact_riemann(s, s, AIR)
        assert fan.pstar == pytest.approx(2.0, rel=1e-14)
        assert fan.ustar == pytest.approx(0.3, rel=1e-14)
        assert (fan.left_wave, fan.right_wave) == ("none", "none")

    def test_mirrored_compression(self):
        fan = exact_riemann(PrimState(1.0, 1.0, 1.0), PrimState(1.0, -1.0, 1.0), AIR)
        assert abs(fan.ustar) < 1e-14
        assert (fan.left_wave, fan.right_wave) == ("shock", "shock")

    def test_vacuum(self):
        with pytest.raises(VacuumError):
            exact_riemann(PrimState(1.0, -5.0, 0.01), PrimState(1.0, 5.0, 0.01), AIR)

    @given(L=states, R=states)
    @settings(max_examples=200, deadline=None)
    def test_pstar_against_bracketing_oracle(self, L, R):
        a_sum = math.sqrt(1.4 * L.p / L.rho) + math.sqrt(1.4 * R.p / R.rho)
        if 5.0 * a_sum <= (R.u - L.u) * 1.01:
            return
        fan = exact_riemann(L, R, AIR)
        p, u = pressure_oracle(L, R, 1.4)
        assert fan.pstar == pytest.approx(p, rel=1e-10)
        assert fan.ustar == pytest.approx(u, rel=1e-9, abs=1e-10)

    def test_sampling_far_field(self):
        fan = exact_riemann(SOD_L, SOD_R, AIR)
        left, right = fan.sample(-10.0), fan.sample(10.0)
        assert (left.rho, left.u, left.p) == (1.0, 0.0, 1.0)
        assert (right.rho, right.u, right.p) == (0.125, 0.0, 0.1)

    @given(L=states, R=states, shift=st.floats(-3.0, 3.0))
    @settings(max_examples=100, deadline=None)
    def test_galilean_shift(self, L, R, shift):
        a_sum = math.sqrt(1.4 * L.p / L.rho) + math.sqrt(1.4 * R.p / R.rho)
        if 5.0 * a_sum <= (R.u - L.u) * 1.01:
            return
        xi = np.linspace(-4.0, 4.0, 81)
        base = exact_riemann(L, R, AIR).sample(xi)
        moved = exact_riemann(PrimState(L.rho, L.u + shift, L.p),
                              PrimState(R.rho, R.u + shift, R.p), AIR).sample(xi + shift)
        # compare away from wave fronts, where sampling is discontinuous
        keep = np.abs(np.asarray(moved.rho) - np.asarray(base.rho)) < 1e-6
        assert keep.mean() > 0.9
        np.testing.assert_allclose(np.asarray(moved.p)[keep], np.asarray(base.p)[keep], rtol=1e-10)
        np.testing.assert_allclose(np.asarray(moved.u) - shift, base.u, atol=1e-9)


class TestStep:
    def test_uniform_unchanged(self):
        s = PrimState(np.full(32, 1.2), np.full(32, -0.4), np.full(32, 0.9))
        for boundary in ("periodic", "transmissive"):
            out = step(s, 0.01, 1 / 32, AIR, boundary)
            np.testing.assert_array_equal(out.rho, s.rho)
            np.testing.assert_array_equal(out.p, s.p)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_periodic_conservation(self, seed):
        rng = np.random.default_rng(seed)
        N = 64
        prim = PrimState(rng.uniform(0.5, 2.0, N), rng.uniform(-0.5, 0.5, N), rng.uniform(0.5, 2.0, N))
        U = prim.to_conservative(AIR)
        dx = 1.0 / N
        dt = 0.8 * dx / float(np.max(np.abs(prim.u) + prim.sound_speed(AIR)))
        totals = U.sum(axis=1)
        for _ in range(10):
            U = step_conservative(U, dt, dx, AIR, "periodic")
            np.testing.assert_allclose(U.sum(axis=1), totals, rtol=1e-13, atol=1e-13 * np.abs(totals).max())

    def test_cfl_violation(self):
        s = PrimState(np.ones(16), np.zeros(16), np.ones(16))
        with pytest.raises(CFLError):
            step(s, 1.0, 1 / 16, AIR)

    def test_setup_rejects_cfl(self):
        with pytest.raises(CFLError):
            FlowSetup(uniform_grid(16), PrimState(1.0, 0.0, 1.0), AIR, 1.0, cfl=0.95)

    def test_positivity_loss_names_cell(self):
        x = uniform_grid(20)
        prim = PrimState(np.ones(20), np.where(x < 0.5, -1.0, 1.0), np.ones(20))
        with pytest.raises(PositivityError) as err:
            step_conservative(prim.to_conservative(AIR), 0.2, 0.05, AIR)
        assert err.value.cell in (9, 10)


class TestRun:
    def test_rest_state_constant(self):
        x = uniform_grid(32)
        sol = run(FlowSetup(x, PrimState(np.ones(32), np.zeros(32), np.ones(32)), AIR, 0.3))
        assert np.all(sol.rho == 1.0) and np.all(sol.u == 0.0) and np.all(sol.p == 1.0)

    def test_output_times_hit(self):
        x = uniform_grid(32)
        sol = run(FlowSetup(x, PrimState(1.0, 0.5, 1.0), AIR, 0.3, output_times=(0.1, 0.2, 0.3)))
        assert sol.times[-1] == 0.3
        assert [sol.times[i] for i in sol.output_indices] == [0.1, 0.2, 0.3]
        assert sol.cfl_max <= 0.8 + 1e-12

    def test_advected_pulse(self):
        N = 200
        x = uniform_grid(N)
        rho = 1.0 + 0.2 * np.exp(-(((x - 0.5 + 0.5) % 1 - 0.5) / 0.1) ** 2)
        sol = run(FlowSetup(x, PrimState(rho, np.ones(N), np.ones(N)), AIR, 1.0, boundary="periodic"))
        # one full period: the pulse is back where it started
        assert l1_error(sol.rho[-1], rho, sol.dx) < 0.01
        np.testing.assert_allclose(sol.p[-1], 1.0, atol=1e-10)
        np.testing.assert_allclose(sol.u[-1], 1.0, atol=1e-10)

    def test_galilean_uniform(self):
        N = 32
        x = uniform_grid(N)
        a = run(FlowSetup(x, PrimState(np.ones(N), np.zeros(N), np.ones(N)), AIR, 0.5, boundary="periodic"))
        b = run(FlowSetup(x, PrimState(np.ones(N), np.full(N, 0.7), np.ones(N)), AIR, 0.5, boundary="periodic"))
        np.testing.assert_allclose(b.rho[-1], a.rho[-1], atol=1e-10)
        np.testing.assert_allclose(b.p[-1], a.p[-1], atol=1e-10)

    @pytest.mark.xfail(strict=True, reason="the grid stays fixed, so the numerical diffusion of a "
                                          "moving contact differs from a resting one (about 1e-2 in rho)")
    def test_galilean_smooth(self):
        N = 128
        x = uniform_grid(N)
        a = run(FlowSetup(x, entropy_wave_state(x, 0.2, 0.15, 0.0, 1.0), AIR, 0.5, boundary="periodic"))
        b = run(FlowSetup(x, entropy_wave_state(x, 0.2, 0.15, 0.5, 1.0), AIR, 0.5, boundary="periodic"))
        # sample the moving run in a frame travelling with it
        shifted = np.interp(x + 0.5 * 0.5, x, b.rho[-1], period=1.0)
        np.testing.assert_allclose(shifted, a.rho[-1], atol=1e-10)
        np.testing.assert_allclose(b.p[-1], a.p[-1], atol=1e-10)

    def test_sod_three_waves(self, sod400):
        fan = exact_riemann(SOD_L, SOD_R, AIR)
        exact = fan.sample((sod400.x - 0.5) / 0.25)
        assert l1_error(sod400.rho[-1], exact.rho, sod400.dx) <= 2e-2
        assert l1_error(sod400.p[-1], exact.p, sod400.dx) <= 2e-2
        assert l1_error(sod400.u[-1], exact.u, sod400.dx) <= 3e-2

    def test_transmissive_conservation_budget(self, sod400):
        assert np.all(conservation_defect(sod400) < 1e-13)


class TestConvergence:
    @pytest.fixture(scope="class")
    @classmethod
    def errors(cls):
        fan = exact_riemann(SOD_L, SOD_R, AIR)
        Ns = (100, 200, 400, 800)
        errs = []
        for N in Ns:
            s = sod(N)
            errs.append(l1_error(s.rho[-1], fan.sample((s.x - 0.5) / 0.25).rho, s.dx))
        return np.array(errs)

    def test_monotone(self, errors):
        assert np.all(np.diff(errors) < 0)

    def test_observed_order_at_least_half(self, errors):
        # the contact discontinuity limits a first-order scheme to about h^(1/2) .. h^(2/3)
        assert np.log2(errors[:-1] / errors[1:]).min() >= 0.5

    @pytest.mark.xfail(strict=True, reason="first-order Godunov smears the contact at O(h^(1/2)); "
                                          "observed L1 order in density is about 0.6")
    def test_observed_order_at_least_0_8(self, errors):
        assert np.log2(errors[:-1] / errors[1:]).min() >= 0.8


class TestEntropy:
    def test_entropy_field(self):
        s = entropy_field(PrimState(np.array([1.0, 0.125]), 0.0, np.array([1.0, 0.1])), AIR)
        np.testing.assert_allclose(s, [1.0, 0.1 / 0.125**1.4])

    def test_sod_crossing_raises_entropy(self, sod400):
        fan = exact_riemann(SOD_L, SOD_R, AIR)
        post = fan.pstar / fan.star_densities()[1] ** AIR.gamma
        tr = entropy_along_trajectory(sod400, 0.6)
        assert len(tr.crossings) == 1
        c = tr.crossings[0]
        assert c.s_after > c.s_before
        assert c.s_before == pytest.approx(float(gasdyn_entropy(0.1, 0.125, AIR)), rel=1e-3)
        assert c.s_after == pytest.approx(post, rel=5e-3)

    def test_left_particle_misses_shock(self, sod400):
        tr = entropy_along_trajectory(sod400, 0.3)
        assert tr.crossings == ()
        assert not tr.truncated

    def test_shock_cells_never_lower_entropy(self, sod400):
        checked = 0
        for n in range(1, sod400.times.size, 10):
            if sod400.times[n] < 0.1:   # contact and shock still close together
                continue
            idx = np.flatnonzero(shock_flags(sod400.slice(n), AIR))
            if idx.size == 0:
                continue
            # rightmost cluster is the shock; upstream is on its right
            lo = idx[-1]
            while lo - 1 in idx:
                lo -= 1
            s = sod400.entropy()[n]
            assert s[lo - 1] >= s[idx[-1] + 1]
            checked += 1
        assert checked > 10

    def test_uniform_flow_exact(self):
        N = 32
        x = uniform_grid(N)
        sol = run(FlowSetup(x, PrimState(np.ones(N), np.full(N, 0.3), np.ones(N)), AIR, 0.5,
                            boundary="periodic", seeds=(0.2, 0.7)))
        for seed in (0.2, 0.7):
            tr = entropy_along_trajectory(sol, seed)
            assert tr.drift == 0.0

    def test_smooth_drift_shrinks(self):
        def drift(N):
            x = uniform_grid(N)
            rho = 1.0 + 0.2 * np.exp(-(((x - 0.5 + 0.5) % 1 - 0.5) / 0.15) ** 2)
            seeds = tuple((np.arange(8) + 0.5) / 8)
            sol = run(FlowSetup(x, PrimState(rho, np.ones(N), np.ones(N)), AIR, 0.5,
                                boundary="periodic", seeds=seeds))
            return max(entropy_along_trajectory(sol, k, by_index=True).drift for k in range(8))
        d = [drift(N) for N in (50, 100, 200)]
        assert d[0] > d[1] > d[2]

    def test_exit_truncates(self):
        N = 32
        x = uniform_grid(N)
        sol = run(FlowSetup(x, PrimState(np.ones(N), np.ones(N), np.ones(N)), AIR, 0.5, seeds=(0.9,)))
        tr = entropy_along_trajectory(sol, 0.9)
        assert tr.truncated
        assert tr.x[-1] <= sol.x_right

    def test_unknown_seed(self, sod400):
        with pytest.raises(KeyError):
            entropy_along_trajectory(sod400, 0.123)


class TestShockFlags:
    def test_sod_flags_at_shock(self, sod400):
        flags = shock_flags(sod400.slice(-1), AIR)
        xs = sod400.x[flags]
        shock_x = 0.5 + 1.7522 * 0.25
        assert xs.size > 0
        assert np.min(np.abs(xs - shock_x)) < 3 * sod400.dx

    def test_uniform_no_flags(self):
        s = PrimState(np.ones(16), np.zeros(16), np.ones(16))
        assert not shock_flags(s, AIR).any()
        assert not shock_flags(s, AIR, relative_to="range").any()

    def test_range_needs_real_wave(self):
        p = 1.0 + 1e-9 * np.arange(16)
        s = PrimState(np.ones(16), -np.arange(16.0), p)
        assert not shock_flags(s, AIR, relative_to="range").any()
