"""Delimited output files for runs and studies, plus their readers.

Formats are deliberately plain: every file is CSV with a fixed header, and
snapshots carry a single ``#``-prefixed metadata line so external tools can
reconstruct the grid without the config.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .config import RunConfig
from .diagnostics import DiagnosticsRecord, RunResult, Snapshot

DIAGNOSTICS_HEADER = ["step", "time", "mass", "energy", "modified_energy",
                      "rank", "odd_symmetry_error", "wall_ms"]
TRACE_HEADER = ["step", "r_in", "r_hat", "r_bar", "r_tilde", "trunc_tail", "wall_ms"]
RATES_HEADER = ["param", "error", "pairwise_order"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_diagnostics(records: list[DiagnosticsRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DIAGNOSTICS_HEADER)
        for r in records:
            writer.writerow([r.step, _fmt(r.time), _fmt(r.mass), _fmt(r.energy),
                             _fmt(r.modified_energy), r.rank,
                             _fmt(r.odd_symmetry_error), _fmt(r.wall_ms)])


def write_trace(traces, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for t in traces:
            writer.writerow([t.step, t.r_in, t.r_hat, t.r_bar, t.r_tilde,
                             _fmt(t.trunc_tail), _fmt(t.wall_ms)])


def snapshot_filename(label: str) -> str:
    return f"snap_t{label}.csv"


def write_snapshot(snap: Snapshot, cfg: RunConfig, path: Path) -> None:
    m, n = snap.w.shape
    a, b, c, d = cfg.domain
    header = (f"# AC2D k={cfg.degree} m={m} n={n} "
              f"domain={_fmt(float(a))},{_fmt(float(b))},{_fmt(float(c))},{_fmt(float(d))} "
              f"time={_fmt(float(snap.time))}")
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for i in range(m):
            fh.write(",".join(repr(float(v)) for v in snap.w[i]) + "\n")


def read_snapshot(path: Path) -> tuple[dict, np.ndarray]:
    with open(path, "r") as fh:
        header = fh.readline().strip()
        if not header.startswith("# AC2D"):
            raise ValueError(f"{path} is not a snapshot file")
        meta = {}
        for tok in header[1:].split()[1:]:
            key, _, val = tok.partition("=")
            meta[key] = val
        w = np.loadtxt(fh, delimiter=",", ndmin=2)
    return meta, w


def write_rates(params, errors, pairwise, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RATES_HEADER)
        for i, (p, e) in enumerate(zip(params, errors)):
            order = _fmt(pairwise[i - 1]) if 0 < i <= len(pairwise) else ""
            writer.writerow([_fmt(float(p)), _fmt(float(e)), order])


def read_csv_columns(path: Path) -> dict[str, list[str]]:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {name: [] for name in header}
        for row in reader:
            for name, val in zip(header, row):
                cols[name].append(val)
    return cols


def write_run_outputs(result: RunResult, cfg: RunConfig, out_dir) -> list[Path]:
    """Write diagnostics, per-step trace (low-rank runs) and snapshots."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    diag_path = out / "diagnostics.csv"
    write_diagnostics(result.records, diag_path)
    written.append(diag_path)
    if result.traces is not None:
        trace_path = out / "trace.csv"
        write_trace(result.traces, trace_path)
        written.append(trace_path)
    for snap in result.snapshots:
        snap_path = out / snapshot_filename(snap.label)
        write_snapshot(snap, cfg, snap_path)
        written.append(snap_path)
    return written
