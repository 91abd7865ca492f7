import numpy as np
import pytest

from ac2d.errors import PropagatorOverflowError
from ac2d.linalg import (LowRankState, RankPolicy, apply_linear_step, gqr,
                         make_propagator, truncate_s, weighted_inner,
                         weighted_truncated_svd)
from ac2d.mesh import build_grid, build_tensor_grid

from conftest import random_low_rank, weighted_inner_oracle


class TestWeightedInner:
    def test_constant_gives_area(self, unit_grid):
        ones = np.ones(unit_grid.shape)
        assert weighted_inner(ones, ones, unit_grid.gx, unit_grid.gy) == pytest.approx(1.0, rel=1e-13)

    def test_symmetry(self, mixed_grid, rng):
        a = rng.standard_normal(mixed_grid.shape)
        b = rng.standard_normal(mixed_grid.shape)
        gx, gy = mixed_grid.gx, mixed_grid.gy
        assert weighted_inner(a, b, gx, gy) == pytest.approx(weighted_inner(b, a, gx, gy), rel=1e-14)

    def test_corner_indicator_from_sum_oracle(self):
        grids = build_tensor_grid(1, 1, 1, (0.0, 1.0, 0.0, 1.0))
        a = np.zeros((2, 2))
        a[0, 0] = 1.0
        expected = weighted_inner_oracle(a, a, grids.gx, grids.gy)
        got = weighted_inner(a, a, grids.gx, grids.gy)
        assert got == pytest.approx(expected, rel=1e-15)
        assert got == pytest.approx(0.25, rel=1e-15)  # product of the corner weights

    def test_random_matches_sum_oracle(self, mixed_grid, rng):
        a = rng.standard_normal(mixed_grid.shape)
        b = rng.standard_normal(mixed_grid.shape)
        expected = weighted_inner_oracle(a, b, mixed_grid.gx, mixed_grid.gy)
        assert weighted_inner(a, b, mixed_grid.gx, mixed_grid.gy) == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self, unit_grid, rng):
        with pytest.raises(ValueError):
            weighted_inner(rng.standard_normal((3, 3)), rng.standard_normal((3, 3)),
                           unit_grid.gx, unit_grid.gy)


class TestGqr:
    def test_identity_mass_is_plain_qr(self, rng):
        a = rng.standard_normal((10, 4))
        q, r = gqr(a, np.ones(10))
        np.testing.assert_allclose(q.T @ q, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(q @ r, a, atol=1e-12)
        assert np.allclose(r, np.triu(r))

    def test_orthonormal_input_returned(self, unit_grid, rng):
        d = unit_grid.gx.mass_diag
        q0, _ = gqr(rng.standard_normal((unit_grid.gx.size, 3)), d)
        q, r = gqr(q0, d)
        np.testing.assert_allclose(q, q0, atol=1e-12)
        np.testing.assert_allclose(r, np.eye(3), atol=1e-12)

    def test_rank_deficient_pair(self, unit_grid, rng):
        d = unit_grid.gx.mass_diag
        v = rng.standard_normal(unit_grid.gx.size)
        a = np.column_stack([v, 2 * v])
        q, r = gqr(a, d)
        np.testing.assert_allclose(r[1], 0.0, atol=1e-12)
        np.testing.assert_allclose(q.T @ (d[:, None] * q), np.eye(2), atol=1e-10)
        np.testing.assert_allclose(q @ r, a, atol=1e-12)

    def test_hundred_random_diagonal_masses(self, rng):
        for _ in range(100):
            p = int(rng.integers(4, 20))
            cols = int(rng.integers(1, p + 1))
            d = rng.uniform(0.1, 3.0, p)
            a = rng.standard_normal((p, cols))
            q, r = gqr(a, d)
            assert np.abs(q.T @ (d[:, None] * q) - np.eye(cols)).max() < 1e-10
            assert np.abs(q @ r - a).max() < 1e-10 * (1 + np.abs(a).max())

    def test_more_columns_than_rows(self, rng):
        d = np.full(4, 0.25)
        a = rng.standard_normal((4, 7))
        q, r = gqr(a, d)
        assert q.shape == (4, 4) and r.shape == (4, 7)
        np.testing.assert_allclose(q.T @ (d[:, None] * q), np.eye(4), atol=1e-12)
        np.testing.assert_allclose(q @ r, a, atol=1e-12)

    def test_nonpositive_mass_rejected(self, rng):
        with pytest.raises(ValueError):
            gqr(rng.standard_normal((4, 2)), np.array([1.0, 0.0, 1.0, 1.0]))


class TestPropagator:
    def test_zero_step_is_identity(self, rng):
        g = build_grid(2, 4, 0.0, 1.0)
        p = make_propagator(g, 0.0)
        x = rng.standard_normal((g.size, 3))
        np.testing.assert_allclose(p.apply(x), x, atol=1e-13)

    def test_preserves_ones(self):
        g = build_grid(1, 16, 0.0, 2.0)
        p = make_propagator(g, 0.37)
        np.testing.assert_allclose(p.apply(np.ones(g.size)), 1.0, rtol=1e-12)

    def test_matches_truncated_series_oracle(self):
        # dense series sum s^l L^l / l! truncated at l = 30
        g = build_grid(1, 2, 0.0, 1.0)
        s = -0.1
        lmat = -np.diag(1.0 / g.mass_diag) @ g.stiffness
        series = np.zeros((3, 3))
        term = np.eye(3)
        for l in range(31):
            series += term
            term = term @ (s * lmat) / (l + 1)
        p = make_propagator(g, s)
        np.testing.assert_allclose(p.factor, series, atol=1e-12)

    def test_inverse_property(self, rng):
        g = build_grid(1, 8, 0.0, 1.0)
        s = 2e-3
        fwd, bwd = make_propagator(g, s), make_propagator(g, -s)
        x = rng.standard_normal(g.size)
        np.testing.assert_allclose(bwd.apply(fwd.apply(x)), x, atol=1e-10 * np.abs(x).max())

    def test_semigroup(self, rng):
        g = build_grid(2, 4, 0.0, 1.0)
        p1, p2, p3 = make_propagator(g, 0.01), make_propagator(g, 0.02), make_propagator(g, 0.03)
        x = rng.standard_normal(g.size)
        np.testing.assert_allclose(p1.apply(p2.apply(x)), p3.apply(x), atol=1e-10)

    def test_cache_reuses_instances(self):
        g = build_grid(1, 4, 0.0, 1.0)
        assert make_propagator(g, 0.5) is make_propagator(g, 0.5)

    def test_negative_step_overflow_flagged(self):
        g = build_grid(1, 64, 0.0, 1.0)
        with pytest.raises(PropagatorOverflowError):
            make_propagator(g, -1e6)


class TestApplyLinearStep:
    def test_zero_step_identity_both_paths(self, unit_grid, rng):
        px = make_propagator(unit_grid.gx, 0.0)
        py = make_propagator(unit_grid.gy, 0.0)
        w = rng.standard_normal(unit_grid.shape)
        np.testing.assert_allclose(apply_linear_step(w, px, py), w, atol=1e-13)
        u, s, v = random_low_rank(unit_grid, 3, rng)
        out = apply_linear_step(LowRankState(u, s, v), px, py)
        np.testing.assert_allclose(out.densify(), u @ s @ v.T, atol=1e-13)

    def test_low_rank_matches_dense(self, mixed_grid, rng):
        px = make_propagator(mixed_grid.gx, 0.05)
        py = make_propagator(mixed_grid.gy, 0.05)
        u, s, v = random_low_rank(mixed_grid, 3, rng)
        dense = apply_linear_step(u @ s @ v.T, px, py)
        low = apply_linear_step(LowRankState(u, s, v), px, py)
        diff = low.densify() - dense
        err = np.sqrt(weighted_inner(diff, diff, mixed_grid.gx, mixed_grid.gy))
        assert err <= 1e-10
        assert low.rank == 3
        assert low.orthonormality_defect(mixed_grid.gx, mixed_grid.gy) < 1e-10

    def test_mass_invariance(self, unit_grid, rng):
        px = make_propagator(unit_grid.gx, 0.2)
        py = make_propagator(unit_grid.gy, 0.2)
        ones = np.ones(unit_grid.shape)
        w = rng.standard_normal(unit_grid.shape)
        before = weighted_inner(w, ones, unit_grid.gx, unit_grid.gy)
        after = weighted_inner(apply_linear_step(w, px, py), ones, unit_grid.gx, unit_grid.gy)
        assert after == pytest.approx(before, rel=1e-11, abs=1e-13)
        u, s, v = random_low_rank(unit_grid, 4, rng)
        low = apply_linear_step(LowRankState(u, s, v), px, py)
        lr_before = weighted_inner(u @ s @ v.T, ones, unit_grid.gx, unit_grid.gy)
        lr_after = weighted_inner(low.densify(), ones, unit_grid.gx, unit_grid.gy)
        assert lr_after == pytest.approx(lr_before, rel=1e-11, abs=1e-13)

    def test_grid_mismatch(self, unit_grid, rng):
        other = build_grid(1, 5, 0.0, 1.0)
        px = make_propagator(unit_grid.gx, 0.1)
        py = make_propagator(other, 0.1)
        with pytest.raises(ValueError):
            apply_linear_step(rng.standard_normal(unit_grid.shape), px, py)


class TestTruncateS:
    def test_tiny_tail_dropped(self):
        t = truncate_s(np.diag([1.0, 1e-20]), RankPolicy.adaptive_absolute(1e-8))
        assert t.rank == 1

    def test_fixed_rank_tail(self):
        t = truncate_s(np.diag([3.0, 2.0, 1.0]), RankPolicy.fixed(2))
        assert t.rank == 2
        assert t.tail == pytest.approx(1.0, rel=1e-14)

    def test_relative_rule(self):
        # eta = 0.1 * sigma_1; the tail past rank 2 is sqrt(0.01^2 + 0.001^2)
        t = truncate_s(np.diag([1.0, 0.5, 0.01, 0.001]), RankPolicy.adaptive_relative(0.1))
        assert t.rank == 2

    def test_rank_floor_and_cap(self):
        t = truncate_s(np.diag([1e-30, 1e-31]), RankPolicy.adaptive_absolute(1.0))
        assert t.rank == 1
        t = truncate_s(np.diag([3.0, 2.0, 1.0]), RankPolicy.adaptive_absolute(0.0, r_max=2))
        assert t.rank == 2 and t.clamped

    def test_reconstruction_error_equals_tail(self, rng):
        sbar = rng.standard_normal((6, 6))
        t = truncate_s(sbar, RankPolicy.fixed(3))
        recon = t.left @ t.s_matrix @ t.right.T
        assert np.linalg.norm(sbar - recon) == pytest.approx(t.tail, rel=1e-12)


class TestWeightedTruncatedSvd:
    def test_outer_product_rank_one(self, unit_grid, rng):
        m, n = unit_grid.shape
        w = np.outer(rng.standard_normal(m), rng.standard_normal(n))
        st = weighted_truncated_svd(w, unit_grid.gx, unit_grid.gy, RankPolicy.adaptive_absolute(1e-12))
        assert st.rank == 1
        np.testing.assert_allclose(st.densify(), w, atol=1e-12 * np.abs(w).max())

    def test_separable_field_rank_one(self, unit_grid):
        gx, gy = unit_grid.gx, unit_grid.gy
        w = np.outer(np.sin(np.pi * gx.nodes), np.sin(np.pi * gy.nodes))
        st = weighted_truncated_svd(w, gx, gy, RankPolicy.adaptive_relative(1e-10))
        assert st.rank == 1

    def test_full_rank_exact(self, rng):
        grids = build_tensor_grid(1, 7, 7, (0.0, 1.0, 0.0, 1.0))
        w = rng.standard_normal(grids.shape)
        st = weighted_truncated_svd(w, grids.gx, grids.gy, RankPolicy.fixed(8))
        np.testing.assert_allclose(st.densify(), w, atol=1e-11)
        assert st.orthonormality_defect(grids.gx, grids.gy) < 1e-10

    def test_reconstruction_error_is_tail(self, mixed_grid, rng):
        w = rng.standard_normal(mixed_grid.shape)
        gx, gy = mixed_grid.gx, mixed_grid.gy
        scaled = np.sqrt(gx.mass_diag)[:, None] * w * np.sqrt(gy.mass_diag)[None, :]
        sv = np.linalg.svd(scaled, compute_uv=False)
        st = weighted_truncated_svd(w, gx, gy, RankPolicy.fixed(3))
        diff = st.densify() - w
        err = np.sqrt(weighted_inner(diff, diff, gx, gy))
        assert err == pytest.approx(np.linalg.norm(sv[3:]), rel=1e-10)
