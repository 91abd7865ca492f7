"""Report figures rendered from a completed run directory.

Reads the delimited outputs (``diagnostics.csv``, ``trace.csv`` and any
``snap_t*.csv``) and writes PNG files next to them: time histories of the
energy, mass error and rank, plus one heatmap per snapshot.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fileio import read_csv_columns, read_snapshot


def _floats(col: list[str]) -> np.ndarray:
    return np.array([float(v) if v else np.nan for v in col])


def render_run_report(run_dir) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    run_dir = Path(run_dir)
    diag_path = run_dir / "diagnostics.csv"
    if not diag_path.exists():
        raise FileNotFoundError(f"no diagnostics.csv in {run_dir}")
    cols = read_csv_columns(diag_path)
    t = _floats(cols["time"])
    written: list[Path] = []

    fig, axes = plt.subplots(1, 3, figsize=(12.5, 3.6))
    ax = axes[0]
    ax.plot(t, _floats(cols["energy"]), label="energy", color="tab:blue")
    me = _floats(cols["modified_energy"])
    if np.any(np.isfinite(me)):
        ax.plot(t, me, label="modified energy", color="tab:orange", ls="--")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend(frameon=False)

    ax = axes[1]
    mass_vals = _floats(cols["mass"])
    ax.semilogy(t, np.abs(mass_vals - mass_vals[0]) + 1e-18, color="tab:green")
    ax.set_xlabel("t")
    ax.set_ylabel("|mass - mass(0)|")

    ax = axes[2]
    ax.step(t, _floats(cols["rank"]), where="post", color="tab:red")
    ax.set_xlabel("t")
    ax.set_ylabel("rank")
    fig.tight_layout()
    hist_path = run_dir / "history.png"
    fig.savefig(hist_path, dpi=150)
    plt.close(fig)
    written.append(hist_path)

    sym = _floats(cols["odd_symmetry_error"])
    if np.any(np.isfinite(sym)):
        fig, ax = plt.subplots(figsize=(4.5, 3.4))
        ax.semilogy(t, sym + 1e-18, color="tab:purple")
        ax.set_xlabel("t")
        ax.set_ylabel("odd symmetry defect")
        fig.tight_layout()
        sym_path = run_dir / "symmetry.png"
        fig.savefig(sym_path, dpi=150)
        plt.close(fig)
        written.append(sym_path)

    for snap_path in sorted(run_dir.glob("snap_t*.csv")):
        meta, w = read_snapshot(snap_path)
        a, b, c, d = (float(v) for v in meta["domain"].split(","))
        fig, ax = plt.subplots(figsize=(4.2, 3.6))
        im = ax.imshow(w.T, origin="lower", extent=(a, b, c, d), cmap="coolwarm",
                       vmin=-1.1, vmax=1.1, aspect="equal")
        ax.set_title(f"t = {meta['time']}")
        fig.colorbar(im, ax=ax, shrink=0.85)
        fig.tight_layout()
        png = snap_path.with_suffix(".png")
        fig.savefig(png, dpi=150)
        plt.close(fig)
        written.append(png)
    return written
