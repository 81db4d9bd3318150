"""Figure rendering for the report path. Every function writes a PNG and
returns its path; nothing is shown interactively."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

BAND_LABELS = ("HH", "LH", "SO", "CB")
RC = {
    "font.size": 9,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_bands(result, path: Path) -> Path:
    """Band energies (SSVQE markers over exact lines) with a log-error panel."""
    x = np.array([p.k.path_coord for p in result.points])
    exact = np.array([p.exact for p in result.points])
    ssvqe = np.array([p.energies for p in result.points])
    errors = result.errors
    with plt.rc_context(RC):
        fig, (top, bottom) = plt.subplots(
            2, 1, figsize=(4.5, 5.0), sharex=True, gridspec_kw={"height_ratios": [3, 1.4]}
        )
        for b in range(exact.shape[1]):
            top.plot(x, exact[:, b], color=f"C{b}", label=BAND_LABELS[b] if b < 4 else None)
            top.plot(x, ssvqe[:, b], "o", color=f"C{b}", ms=3, mfc="none")
            err = np.where(errors[:, b] > 0, errors[:, b], np.nan)
            bottom.semilogy(x, 1000 * err, ".-", color=f"C{b}", ms=3, lw=0.6)
        gamma = x[np.argmin([np.linalg.norm(p.k.vector) for p in result.points])]
        for ax in (top, bottom):
            ax.axvline(gamma, color="0.6", lw=0.5)
        top.set_ylabel("E (eV)")
        top.set_title(f"{result.material}  L={result.n_layers}  {result.optimizer}  {result.mode}")
        top.legend(frameon=False, ncol=2, fontsize=7, loc="center right")
        bottom.set_ylabel("|error| (meV)")
        bottom.set_xlabel("path coordinate  (X, Gamma at grey line, L)")
        fig.align_ylabels()
        return _save(fig, path)


def plot_spectrum(photon_energies: np.ndarray, alpha: np.ndarray, path: Path, title: str = "", reference=None) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        ax.plot(photon_energies, alpha, color="C3", label="circuit")
        if reference is not None:
            ax.plot(photon_energies, reference, "--", color="0.3", lw=0.8, label="dense")
            ax.legend(frameon=False)
        ax.set_xlabel("photon energy (eV)")
        ax.set_ylabel("alpha (normalized)")
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_benchmark(rows: Sequence, path: Path, title: str = "") -> Path:
    """Mean cycles and seconds per cycle against layer count, one line per optimizer."""
    names = sorted({r.optimizer for r in rows}, key=lambda s: [r.optimizer for r in rows].index(s))
    with plt.rc_context(RC):
        fig, (left, right) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        for i, name in enumerate(names):
            sel = sorted((r for r in rows if r.optimizer == name), key=lambda r: r.layers)
            layers = [r.layers for r in sel]
            left.plot(layers, [r.mean_cycles for r in sel], "o-", color=f"C{i}", label=name, ms=3)
            right.plot(layers, [1000 * r.mean_seconds_per_cycle for r in sel], "o-", color=f"C{i}", ms=3)
        left.set_xlabel("layers")
        left.set_ylabel("mean cycles per k-point")
        left.legend(frameon=False)
        right.set_xlabel("layers")
        right.set_ylabel("ms per cycle")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        return _save(fig, path)
