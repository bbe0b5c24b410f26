"""Optional figures for CLI reports. Needs the ``plot`` extra (matplotlib)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise ConfigError("--plot needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def energy_curve(x, energies, path, xlabel="nu", reference=None):
    """Scatter bound energies against a scan parameter; ``reference`` is an (x, y) curve."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for xs, es in zip(x, energies):
        if es:
            ax.plot([xs] * len(es), es, "o", ms=2.5, color="C0")
    if reference is not None:
        ax.plot(*reference, "-", lw=1, color="C1", label="closed form")
        ax.legend(frameon=False)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("energy")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def wavefunctions(x, states, path):
    """|psi_m(x)|^2 per component for each state."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for k, (energy, psi) in enumerate(states):
        dens = np.abs(psi) ** 2
        for m, row in enumerate(dens):
            ax.plot(x, row, color=f"C{k % 10}", ls=["-", "--", ":", "-."][m % 4],
                    label=f"E={energy:.6g}, m={m}")
    ax.set_xlabel("x")
    ax.set_ylabel("|psi_m(x)|^2")
    if states:
        ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def bands(p, energies, path, windows=()):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(p, energies, color="k", lw=1)
    for lo, hi in windows:
        ax.axhspan(lo, hi, color="C2", alpha=0.15)
    ax.set_xlabel("p")
    ax.set_ylabel("energy")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
