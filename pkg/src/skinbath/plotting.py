"""Matplotlib rendering of run reports.

Figures are written next to the delimited output as PNG; the CSV files stay
the canonical interface and every figure can be regenerated from them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_trajectories(path: Path, curves, log_y: bool = False, title: str = "") -> str:
    """Overlay population curves; ``curves`` is a list of
    (label, times, linear_P, log10_P) tuples."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, times, linear, log10 in curves:
        if log_y:
            ax.plot(times, log10, lw=1.4, label=label)
        else:
            ax.plot(times, linear, lw=1.4, label=label)
    ax.set_xlabel("t (units of 1/g)")
    ax.set_ylabel("log10 P" if log_y else "P")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path.name


def save_spectrum(path: Path, loops, title: str = "") -> str:
    """Complex-plane spectrum loops; ``loops`` is a list of (label, energies)."""
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    for label, energies in loops:
        ax.plot(np.real(energies), np.imag(energies), lw=1.4, label=label)
    ax.axhline(0.0, color="k", lw=0.6, alpha=0.5)
    ax.set_xlabel("Re E")
    ax.set_ylabel("Im E")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path.name


def save_profiles(path: Path, profiles, coupling_sites=(), title: str = "") -> str:
    """Semilog bound-state profiles; ``profiles`` is a list of (label, |psi_n|)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, absprofile in profiles:
        absprofile = np.asarray(absprofile)
        shown = np.where(absprofile > 0, absprofile, np.nan)
        ax.semilogy(np.arange(absprofile.size), shown, lw=1.0, label=label)
    for site in coupling_sites:
        ax.axvline(site, color="gray", lw=0.8, ls="--", alpha=0.7)
    ax.set_xlabel("site n")
    ax.set_ylabel("|psi_n|")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path.name


def save_fields(path: Path, times, log10_intensity, title: str = "") -> str:
    """Space-time map of log10 I_n(t)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    data = np.asarray(log10_intensity)
    finite = data[np.isfinite(data)]
    vmax = finite.max() if finite.size else 1.0
    vmin = max(finite.min() if finite.size else -1.0, vmax - 30)
    mesh = ax.pcolormesh(
        np.arange(data.shape[1]),
        times,
        np.clip(data, vmin, vmax),
        shading="nearest",
        cmap="magma",
        vmin=vmin,
        vmax=vmax,
    )
    fig.colorbar(mesh, ax=ax, label="log10 I_n")
    ax.set_xlabel("site n")
    ax.set_ylabel("t")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path.name


def save_surface(path: Path, sample, title: str = "") -> str:
    """Two-branch pseudosphere point cloud in 3D."""
    fig = plt.figure(figsize=(5.6, 5.2))
    ax = fig.add_subplot(projection="3d")
    for branch, color in ((1, "tab:blue"), (-1, "tab:orange")):
        mask = sample.branch == branch
        ax.plot_trisurf(
            sample.v[mask],
            sample.w[mask],
            sample.u[mask],
            color=color,
            alpha=0.6,
            linewidth=0.1,
        )
    ax.set_xlabel("v")
    ax.set_ylabel("w")
    ax.set_zlabel("u")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path.name
