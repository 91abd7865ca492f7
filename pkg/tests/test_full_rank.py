import numpy as np
import pytest

from ac2d.config import RunConfig
from ac2d.diagnostics import l2h_error, mass, modified_energy
from ac2d.full_rank import FullState, fr_run, fr_strang_step, ssp_rk2_nonlinear
from ac2d.linalg import make_propagator, weighted_inner
from ac2d.mesh import build_tensor_grid, interpolate_initial
from ac2d.nonlinearity import IdentityNonlinearity, Nonlinearity, ZeroNonlinearity


def sine_config(**overrides):
    base = dict(variant="classical", domain=(0.0, 1.0, 0.0, 1.0), epsilon=0.01,
                degree=1, elements=(8, 8), tau=0.01, final_time=0.05,
                ic="sin(pi*x)*sin(pi*y)", solver="full")
    base.update(overrides)
    return RunConfig(**base).validate()


class TestSspRk2:
    def test_identity_hook_scalar(self, unit_grid):
        w = np.ones(unit_grid.shape)
        out = ssp_rk2_nonlinear(w, 0.1, IdentityNonlinearity())
        np.testing.assert_allclose(out, 1.105, atol=1e-15)  # 1 + tau + tau^2/2

    def test_zero_state_classical(self, unit_grid):
        nl = Nonlinearity("classical", unit_grid)
        out = ssp_rk2_nonlinear(np.zeros(unit_grid.shape), 0.1, nl)
        assert np.all(out == 0.0)

    def test_conservative_mass_preserved(self, unit_grid, rng):
        w = 0.5 * rng.standard_normal(unit_grid.shape)
        ones = np.ones(unit_grid.shape)
        gx, gy = unit_grid.gx, unit_grid.gy
        for variant in ("rslm", "bblm"):
            out = ssp_rk2_nonlinear(w, 0.05, Nonlinearity(variant, unit_grid))
            before = weighted_inner(w, ones, gx, gy)
            after = weighted_inner(out, ones, gx, gy)
            assert after == pytest.approx(before, rel=1e-12, abs=1e-13)


class TestStrangStep:
    def test_linear_only_matches_exact_heat_step(self, unit_grid, rng):
        # with the reaction disabled the two half steps compose exactly
        eps, tau = 0.1, 0.3
        w = rng.standard_normal(unit_grid.shape)
        state, _ = fr_strang_step(FullState(w.copy()), tau, eps, ZeroNonlinearity(), unit_grid)
        px = make_propagator(unit_grid.gx, tau * eps * eps)
        py = make_propagator(unit_grid.gy, tau * eps * eps)
        exact = py.apply_right(px.apply(w))
        assert np.abs(state.w - exact).max() <= 1e-11 * (1 + np.abs(w).max())

    def test_linear_only_tau_independent(self, unit_grid, rng):
        eps = 0.1
        w = rng.standard_normal(unit_grid.shape)
        fine = FullState(w.copy())
        for _ in range(4):
            fine, _ = fr_strang_step(fine, 0.1, eps, ZeroNonlinearity(), unit_grid)
        coarse, _ = fr_strang_step(FullState(w.copy()), 0.4, eps, ZeroNonlinearity(), unit_grid)
        assert np.abs(fine.w - coarse.w).max() <= 1e-10 * (1 + np.abs(w).max())

    @pytest.mark.parametrize("variant", ["rslm", "bblm"])
    def test_conservative_mass_drift_per_step(self, variant, unit_grid, rng):
        nl = Nonlinearity(variant, unit_grid)
        w = 0.4 * rng.standard_normal(unit_grid.shape)
        state = FullState(w)
        m0 = mass(state.w, unit_grid)
        for _ in range(20):
            state, _ = fr_strang_step(state, 0.05, 0.02, nl, unit_grid)
        assert abs(mass(state.w, unit_grid) - m0) <= 1e-11 * (1 + abs(m0))

    def test_modified_energy_monotone_short_run(self):
        grids = build_tensor_grid(1, 16, 16, (0.0, 2 * np.pi, 0.0, 2 * np.pi))
        w = interpolate_initial(grids, lambda x, y: 0.05 * np.sin(x) * np.sin(y))
        nl = Nonlinearity("classical", grids)
        state = FullState(w)
        tau, eps = 0.5, 0.01
        energies = []
        for _ in range(40):
            state, w1 = fr_strang_step(state, tau, eps, nl, grids)
            energies.append(modified_energy(w1, tau, eps, grids))
        diffs = np.diff(energies)
        assert np.all(diffs <= 1e-10 * (1.0 + np.abs(energies[:-1])))

    def test_second_order_self_convergence(self):
        cfg = sine_config(elements=(16, 16), final_time=0.2, tau=0.05)
        grids = cfg.build_grids()
        nl = Nonlinearity("classical", grids)

        def advance(tau, steps):
            st = FullState(cfg.build_initial(grids))
            for _ in range(steps):
                st, _ = fr_strang_step(st, tau, cfg.epsilon, nl, grids)
            return st.w

        ref = advance(0.05 / 8, 32)
        errs = [l2h_error(advance(0.05 / 2 ** i, 4 * 2 ** i), ref, grids) for i in range(3)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 1.8)


class TestFrRun:
    def test_time_zero_echoes_initial(self):
        cfg = sine_config(final_time=0.0)
        res = fr_run(cfg)
        assert len(res.records) == 1
        assert res.records[0].step == 0
        assert len(res.snapshots) == 1
        grids = cfg.build_grids()
        np.testing.assert_array_equal(res.snapshots[0].w, cfg.build_initial(grids))

    def test_final_time_hit_exactly_with_partial_step(self):
        cfg = sine_config(tau=0.02, final_time=0.05)
        res = fr_run(cfg)
        assert res.final.t == pytest.approx(0.05, abs=1e-12)
        assert res.records[-1].step == 3  # two full steps plus the remainder

    def test_cadence_thins_records(self):
        cfg = sine_config(tau=0.01, final_time=0.1, cadence=5)
        res = fr_run(cfg)
        assert [r.step for r in res.records] == [0, 5, 10]

    def test_large_step_warns(self):
        cfg = sine_config(tau=2.5, final_time=5.0)
        with pytest.warns(RuntimeWarning):
            fr_run(cfg)

    def test_snapshot_schedule(self):
        cfg = sine_config(tau=0.01, final_time=0.04, snapshots=(0.0, 0.02, 0.04))
        res = fr_run(cfg)
        assert [s.label for s in res.snapshots] == ["0", "0.02", "0.04"]
        assert res.snapshots[1].time == pytest.approx(0.02)
