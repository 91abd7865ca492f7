"""Shared time-loop plumbing for the two solvers."""

from __future__ import annotations

import numpy as np


def step_sizes(final_time: float, tau: float) -> list[float]:
    """Fixed steps covering [0, T], with a shortened final step if needed."""
    if final_time <= 0:
        return []
    n_full = int(np.floor(final_time / tau + 1e-9))
    sizes = [tau] * n_full
    rest = final_time - n_full * tau
    if rest > 1e-12 * max(tau, 1.0):
        sizes.append(rest)
    return sizes


class SnapshotSchedule:
    """Emits each requested snapshot at the first step boundary reaching it."""

    def __init__(self, times, tau):
        self.pending = sorted(set(times))
        self.tol = 1e-9 * max(tau, 1.0)

    def due(self, t_now: float) -> list[float]:
        out = []
        while self.pending and self.pending[0] <= t_now + self.tol:
            out.append(self.pending.pop(0))
        return out


def format_time(t: float) -> str:
    return format(t, "g")
