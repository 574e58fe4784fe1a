"""Post-hoc figures written next to the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DECAY_COLUMNS = ("V", "sup_ux", "sup_uxx", "flock_residual")


def _positive(t, y):
    t, y = np.asarray(t), np.asarray(y)
    keep = y > 0
    return t[keep], y[keep]


def plot_hydro(table: dict, path, title: str | None = None):
    """Two panels: decaying amplitudes on a log axis, density bounds on a linear one."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    t = table["t"]
    for name in DECAY_COLUMNS:
        ax1.semilogy(*_positive(t, table[name]), label=name)
    ax1.set_ylabel("amplitude")
    ax1.legend(loc="upper right", fontsize="small")
    ax1.grid(True, which="both", alpha=0.3)

    ax2.plot(t, table["rho_min"], label="min rho")
    ax2.plot(t, table["rho_max"], label="max rho")
    ax2.plot(t, table["sup_rhox"], label="|rho'|_inf", ls="--")
    ax2.set_xlabel("t")
    ax2.legend(loc="best", fontsize="small")
    ax2.grid(True, alpha=0.3)
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_particles(table: dict, path, title: str | None = None):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    t = table["t"]
    ax1.semilogy(*_positive(t, table["velocity_diameter"]), label="velocity diameter")
    ax1.set_ylabel("max v - min v")
    ax1.grid(True, which="both", alpha=0.3)
    ax2.plot(t, table["position_diameter"], label="position diameter")
    ax2.plot(t, table["mean_velocity"], label="mean velocity")
    ax2.set_xlabel("t")
    ax2.legend(loc="best", fontsize="small")
    ax2.grid(True, alpha=0.3)
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_fits(table: dict, fits: dict, path):
    """Series with their fitted ``C exp(-delta t)`` lines over each fit window."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    t = table["t"]
    for name, fit in fits.items():
        if name not in table:
            continue
        line, = ax.semilogy(*_positive(t, table[name]), label=name)
        if fit is None:
            continue
        tt = np.linspace(fit.window[0], fit.window[1], 50)
        ax.semilogy(tt, fit.prefactor * np.exp(-fit.rate * tt), ls="--", color=line.get_color(),
                    label=f"{name} fit: delta={fit.rate:.4g}, R2={fit.r_squared:.4f}")
    ax.set_xlabel("t")
    ax.legend(loc="best", fontsize="x-small")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
