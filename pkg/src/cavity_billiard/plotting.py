"""PNG figures written next to the CSV files the CLI emits."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_energy(n, t, E, path, fit=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, E, "o-", ms=3, label="E(t)")
    if fit is not None:
        ax.plot(t, fit, "--", lw=1, label="fit")
    if np.all(np.asarray(E) > 0) and np.max(E) / np.min(E) > 100:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("E")
    ax.legend()
    return _save(fig, path)


def plot_density(snapshots, path):
    """``snapshots`` is a list of ``(t, x, T00)``."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for t, x, y in snapshots:
        ax.plot(x, y, lw=1, label=f"t = {t:.4g}")
    ax.set_xlabel("x")
    ax.set_ylabel("T00")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_band(detuning, exponent, has, dL_over_L, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    detuning = np.asarray(detuning)
    has = np.asarray(has, dtype=bool)
    ax.plot(detuning, exponent, "-", lw=1)
    ax.plot(detuning[has], np.asarray(exponent)[has], ".", ms=3)
    for s in (-1, 1):
        ax.axvline(s * dL_over_L, color="grey", ls=":", lw=1)
    ax.set_xlabel("d_omega / omega")
    ax.set_ylabel("log D_1 per period")
    return _save(fig, path)


def plot_bounces(k, D, A, path):
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    a1.semilogy(k, D, ".-", ms=3)
    a1.set_ylabel("D_k")
    a2.plot(k, A, ".-", ms=3)
    a2.set_ylabel("A_k")
    a2.set_xlabel("k")
    return _save(fig, path)
