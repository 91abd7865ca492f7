"""Self-convergence studies: refine the mesh or the step and fit the order.

Spatial studies double the element counts per level against a reference one
refinement finer, comparing at the coarse nodes through finite element
evaluation of the reference.  Temporal studies halve the step on a fixed
grid against a reference run at one eighth of the smallest step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .diagnostics import convergence_order, fe_values_matrix, l2h_error, _dense
from .dlr import dlr_run
from .full_rank import fr_run

# Below this relative size the study reports machine-noise errors as exact
# agreement instead of fitting a slope.
_EXACT_FLOOR = 1e-11


@dataclass
class StudyResult:
    axis: str
    params: list[float]
    errors: list[float]
    pairwise_orders: list[float]
    slope: float | None
    exact: bool


def _run(cfg: RunConfig, nonlinearity=None):
    runner = fr_run if cfg.solver == "full" else dlr_run
    return runner(cfg, nonlinearity=nonlinearity)


def run_convergence_study(cfg: RunConfig, axis: str, levels: int,
                          nonlinearity=None) -> StudyResult:
    if levels < 3:
        raise ValueError("need at least 3 refinement levels")
    if axis == "spatial":
        params, errors = _spatial_errors(cfg, levels, nonlinearity)
    elif axis == "temporal":
        params, errors = _temporal_errors(cfg, levels, nonlinearity)
    else:
        raise ValueError(f"axis must be 'spatial' or 'temporal', got {axis!r}")

    scale = 1.0 + max(abs(e) for e in errors)
    if max(errors) <= _EXACT_FLOOR * scale:
        return StudyResult(axis=axis, params=params, errors=errors,
                           pairwise_orders=[], slope=None, exact=True)
    slope, pairwise = convergence_order(params, errors)
    return StudyResult(axis=axis, params=params, errors=errors,
                       pairwise_orders=pairwise, slope=slope, exact=False)


def _spatial_errors(cfg: RunConfig, levels: int, nonlinearity):
    mx0, ny0 = cfg.elements
    ref_cfg = replace(cfg, elements=(mx0 * 2 ** levels, ny0 * 2 ** levels))
    ref = _run(ref_cfg, nonlinearity)
    ref_grids = ref_cfg.build_grids()
    ref_w = _dense(getattr(ref.final, "w", ref.final))

    params, errors = [], []
    for lvl in range(levels):
        level_cfg = replace(cfg, elements=(mx0 * 2 ** lvl, ny0 * 2 ** lvl))
        res = _run(level_cfg, nonlinearity)
        grids = level_cfg.build_grids()
        ex = fe_values_matrix(ref_grids.gx, grids.gx.nodes)
        ey = fe_values_matrix(ref_grids.gy, grids.gy.nodes)
        ref_at_nodes = ex @ ref_w @ ey.T
        errors.append(l2h_error(getattr(res.final, "w", res.final), ref_at_nodes, grids))
        params.append(grids.gx.h)
    return params, errors


def _temporal_errors(cfg: RunConfig, levels: int, nonlinearity):
    taus = [cfg.tau / 2 ** lvl for lvl in range(levels)]
    ref_cfg = replace(cfg, tau=taus[-1] / 8.0)
    ref = _run(ref_cfg, nonlinearity)
    grids = cfg.build_grids()
    ref_w = _dense(getattr(ref.final, "w", ref.final))

    params, errors = [], []
    for tau in taus:
        res = _run(replace(cfg, tau=tau), nonlinearity)
        errors.append(l2h_error(getattr(res.final, "w", res.final), ref_w, grids))
        params.append(tau)
    return params, errors
