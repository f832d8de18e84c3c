"""Matplotlib figure rendering for the CLI report paths.

Every function writes one PNG next to the delimited output it illustrates:
PDAP heatmaps, cluster scatter maps, metric CDFs, path-loss fits, and the
characteristics correlation heatmap.  The Agg backend is forced so rendering
works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import CiFit, fspl  # noqa: E402
from .clustering import ClusterSet  # noqa: E402
from .pdap import PdapGrid  # noqa: E402


def save_pdap_heatmap(grid: PdapGrid, path, title: str = "PDAP", vmin=None) -> None:
    """Delay-azimuth heatmap of the dBm view."""
    dbm = grid.to_dbm()
    fig, ax = plt.subplots(figsize=(7, 4.2))
    extent = [0, np.degrees(grid.spec.n_theta * grid.spec.delta_theta),
              grid.spec.n_tau * grid.spec.delta_tau * 1e9, 0]
    im = ax.imshow(dbm, aspect="auto", extent=extent, cmap="viridis",
                   vmin=vmin if vmin is not None else grid.spec.noise_floor_dbm)
    ax.set_xlabel("azimuth AoA (deg)")
    ax.set_ylabel("delay (ns)")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="power (dBm)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_cluster_scatter(cset: ClusterSet, path, title: str = "MPC clusters") -> None:
    """ToA/AoA scatter with clusters colored, matched clusters circled, and
    outliers drawn as small gray dots."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    cmap = plt.get_cmap("tab20")
    for k, c in enumerate(cset.clusters):
        t = cset.toa_ns[c.members]
        a = np.degrees(cset.aoa[c.members])
        ax.scatter(a, t, s=14, color=cmap(k % 20), marker="x",
                   label=None if k > 9 else f"cluster {k}")
        if c.match_status == "matched":
            ax.scatter([np.degrees(c.centroid_aoa)], [c.centroid_toa_ns], s=220,
                       facecolors="none", edgecolors="red", linewidths=1.2)
    if cset.outliers.size:
        ax.scatter(np.degrees(cset.aoa[cset.outliers]), cset.toa_ns[cset.outliers],
                   s=6, color="0.6", marker="o", label="outliers")
    ax.set_xlabel("azimuth AoA (deg)")
    ax.set_ylabel("ToA (ns)")
    ax.set_title(title)
    ax.set_xlim(0, 360)
    if len(cset.clusters) <= 10 or cset.outliers.size:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_cdf(series: dict[str, np.ndarray], path, xlabel: str, title: str = "") -> None:
    """Empirical CDFs, one curve per labeled series."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, vals in series.items():
        v = np.sort(np.asarray(vals, dtype=float))
        q = np.arange(1, v.size + 1) / v.size
        ax.step(v, q, where="post", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("empirical CDF")
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pathloss_fit(d: np.ndarray, pl_db: np.ndarray, fit: CiFit, frequency_hz: float,
                      path, title: str = "Close-in path-loss fit") -> None:
    """Scatter of measured path loss with the fitted close-in model and FSPL."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(d, pl_db, s=18, label="samples")
    dd = np.linspace(min(d) * 0.9, max(d) * 1.1, 100)
    ci = 10.0 * fit.ple * np.log10(dd / fit.d0) + fspl(fit.d0, frequency_hz)
    fs = np.array([fspl(x, frequency_hz) for x in dd])
    ax.plot(dd, ci, "r-", label=f"CI fit (PLE={fit.ple:.2f}, sigma={fit.sigma_sf_db:.2f} dB)")
    ax.plot(dd, fs, "k--", label="free space")
    ax.set_xscale("log")
    ax.set_xlabel("Tx-Rx distance (m)")
    ax.set_ylabel("path loss (dB)")
    ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_correlation_heatmap(matrix: np.ndarray, labels, path,
                             title: str = "Characteristic correlations") -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(matrix, vmin=-1, vmax=1, cmap="RdBu_r")
    ax.set_xticks(range(len(labels)), labels)
    ax.set_yticks(range(len(labels)), labels)
    for i in range(len(labels)):
        for j in range(len(labels)):
            v = matrix[i, j]
            ax.text(j, i, "-" if np.isnan(v) else f"{v:.2f}",
                    ha="center", va="center", fontsize=8)
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
