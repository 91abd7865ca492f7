import pytest

from ac2d.config import RunConfig
from ac2d.nonlinearity import ZeroNonlinearity
from ac2d.study import run_convergence_study


def base_config(**overrides):
    base = dict(variant="classical", domain=(0.0, 1.0, 0.0, 1.0), epsilon=0.05,
                degree=1, elements=(4, 4), tau=0.02, final_time=0.08,
                ic="sin(pi*x)*sin(pi*y)", solver="full")
    base.update(overrides)
    return RunConfig(**base).validate()


class TestSpatialStudy:
    def test_second_order_for_linear_elements(self):
        # cosine data satisfies the Neumann compatibility condition, so the
        # spatial rate is clean even over a short horizon
        cfg = base_config(tau=1e-3, ic="0.8*cos(pi*x)*cos(pi*y)")
        res = run_convergence_study(cfg, "spatial", 3)
        assert not res.exact
        assert res.slope == pytest.approx(2.0, abs=0.35)
        assert len(res.params) == 3 and len(res.pairwise_orders) == 2

    def test_linear_only_hook_is_exact_in_time(self):
        # disabling the reaction makes the stepping exact; temporal errors
        # collapse to machine noise and the study reports exact agreement
        res = run_convergence_study(base_config(), "temporal", 3,
                                    nonlinearity=ZeroNonlinearity())
        assert res.exact
        assert res.slope is None


class TestTemporalStudy:
    def test_second_order_full_solver(self):
        res = run_convergence_study(base_config(elements=(8, 8), tau=0.02,
                                                final_time=0.2, epsilon=0.1),
                                    "temporal", 3)
        assert not res.exact
        assert res.slope == pytest.approx(2.0, abs=0.3)

    def test_level_minimum(self):
        with pytest.raises(ValueError):
            run_convergence_study(base_config(), "spatial", 2)

    def test_unknown_axis(self):
        with pytest.raises(ValueError):
            run_convergence_study(base_config(), "sideways", 3)
