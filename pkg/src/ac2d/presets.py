"""Named experiment presets.

Each preset is a complete run configuration for one of the benchmark
experiments: convergence studies on a smooth field, energy-dissipation
monitoring, mass conservation with the two-bubble profile, and long-time
odd-symmetry preservation.  Durations are desk-scaled; grid sizes quoted as
node counts use ``elements = (nodes - 1) / degree``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .errors import ConfigError


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    config: RunConfig


def _presets() -> dict[str, Preset]:
    two_pi = 2.0 * np.pi
    items = [
        Preset(
            "convergence-space-k1",
            "Spatial self-convergence base (linear elements, smooth sine data); "
            "refine with: study --axis spatial",
            RunConfig(variant="classical", domain=(0.0, 1.0, 0.0, 1.0), epsilon=0.01,
                      degree=1, elements=(16, 16), tau=1e-3, final_time=0.1,
                      ic="sin(pi*x)*sin(pi*y)", solver="full")),
        Preset(
            "convergence-space-k2",
            "Spatial self-convergence base (quadratic elements)",
            RunConfig(variant="classical", domain=(0.0, 1.0, 0.0, 1.0), epsilon=0.01,
                      degree=2, elements=(16, 16), tau=1e-3, final_time=0.1,
                      ic="sin(pi*x)*sin(pi*y)", solver="full")),
        Preset(
            "convergence-time",
            "Temporal self-convergence base for the second-order low-rank solver "
            "at fixed rank 8; refine with: study --axis temporal",
            RunConfig(variant="classical", domain=(0.0, 1.0, 0.0, 1.0), epsilon=0.01,
                      degree=1, elements=(64, 64), tau=0.04, final_time=1.0,
                      ic="sin(pi*x)*sin(pi*y)", solver="dlr2", rank="fixed:8")),
        Preset(
            "modified-energy",
            "Energy and modified-energy histories on a small-amplitude sine field, "
            "adaptive low-rank solver",
            RunConfig(variant="classical", domain=(0.0, two_pi, 0.0, two_pi),
                      epsilon=0.01, degree=1, elements=(128, 128), tau=0.1,
                      final_time=50.0, ic="0.05*sin(x)*sin(y)", solver="dlr2",
                      rank="adaptive-rel:0.01")),
        Preset(
            "modified-energy-tau2",
            "Demo of the oscillatory modified energy at the largest admissible step "
            "(full-rank solver); not asserted by tests",
            RunConfig(variant="classical", domain=(0.0, two_pi, 0.0, two_pi),
                      epsilon=0.01, degree=1, elements=(128, 128), tau=2.0,
                      final_time=50.0, ic="0.05*sin(x)*sin(y)", solver="full")),
        Preset(
            "kiss-bubble-classical",
            "Two tangent bubbles without mass control: coalescence, shrinkage and "
            "disappearance",
            RunConfig(variant="classical", domain=(-0.5, 0.5, -0.5, 0.5), epsilon=0.01,
                      degree=1, elements=(255, 255), tau=0.5, final_time=400.0,
                      ic="kiss_bubble(radius=0.19, x1=0.0, y1=-0.2, x2=0.0, y2=0.2)",
                      solver="dlr2", rank="adaptive-rel:0.01",
                      snapshots=(0.0, 20.0, 120.0, 250.0, 400.0))),
        Preset(
            "kiss-bubble-rslm",
            "Two tangent bubbles with the constant mass multiplier: persistent "
            "rounding bubble",
            RunConfig(variant="rslm", domain=(-0.5, 0.5, -0.5, 0.5), epsilon=0.01,
                      degree=1, elements=(255, 255), tau=0.5, final_time=400.0,
                      ic="kiss_bubble(radius=0.19, x1=0.0, y1=-0.2, x2=0.0, y2=0.2)",
                      solver="dlr2", rank="adaptive-rel:0.001",
                      snapshots=(0.0, 20.0, 120.0, 250.0, 400.0))),
        Preset(
            "kiss-bubble-bblm",
            "Two tangent bubbles with the space-dependent mass multiplier",
            RunConfig(variant="bblm", domain=(-0.5, 0.5, -0.5, 0.5), epsilon=0.01,
                      degree=1, elements=(255, 255), tau=0.5, final_time=120.0,
                      ic="kiss_bubble(radius=0.19, x1=0.0, y1=-0.2, x2=0.0, y2=0.2)",
                      solver="dlr2", rank="adaptive-rel:0.001",
                      snapshots=(0.0, 20.0, 120.0))),
        Preset(
            "symmetry-u1",
            "Long-run odd-symmetry preservation, doubly periodic sine cells",
            RunConfig(variant="classical", domain=(-0.5, 0.5, -0.5, 0.5), epsilon=0.01,
                      degree=1, elements=(128, 128), tau=0.5, final_time=100.0,
                      ic="sin(2*pi*x)*sin(2*pi*y)", solver="dlr2",
                      rank="adaptive-rel:0.01", snapshots=(0.0, 20.0, 50.0, 100.0))),
        Preset(
            "symmetry-u2",
            "Long-run odd-symmetry preservation, anisotropic sine cells",
            RunConfig(variant="classical", domain=(-0.5, 0.5, -0.5, 0.5), epsilon=0.01,
                      degree=1, elements=(128, 128), tau=0.5, final_time=100.0,
                      ic="sin(2*pi*x)*sin(4*pi*y)", solver="dlr2",
                      rank="adaptive-rel:0.01", snapshots=(0.0, 20.0, 50.0, 100.0))),
        Preset(
            "symmetry-u3",
            "Long-run behavior for shifted (non-odd) sine data",
            RunConfig(variant="classical", domain=(-0.5, 0.5, -0.5, 0.5), epsilon=0.01,
                      degree=1, elements=(128, 128), tau=0.5, final_time=100.0,
                      ic="sin(2*pi*(x+pi/8))*sin(4*pi*(y+pi/8))", solver="dlr2",
                      rank="adaptive-rel:0.01", snapshots=(0.0, 20.0, 50.0, 100.0))),
    ]
    return {p.name: p for p in items}


PRESETS = _presets()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}; available: {known}") from None
