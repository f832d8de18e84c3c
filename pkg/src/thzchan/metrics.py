"""PDAP-level model-validation metrics: RMSE and SSIM on dB-scaled grids.

Both metrics compare a simulated grid against a reference on the dBm view with
noise-floor fill, where the reported error magnitudes (a few dB) are
meaningful.  SSIM uses the canonical 11x11 Gaussian window (sigma 1.5) with
K1=0.01/K2=0.03 constants scaled by the joint dynamic range; windows wrap
around the azimuth axis (a full circle) and clamp at the delay edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .pdap import PdapGrid


@dataclass(frozen=True)
class MetricReport:
    rmse_db: float
    ssim: float
    grid_shape: tuple[int, int]
    dynamic_range_db: float


def _check_shapes(a: PdapGrid, b: PdapGrid) -> None:
    if a.shape != b.shape:
        raise ValueError(f"grid shapes differ: {a.shape} vs {b.shape}")
    if not (np.isclose(a.spec.delta_tau, b.spec.delta_tau)
            and np.isclose(a.spec.delta_theta, b.spec.delta_theta)):
        raise ValueError("grid resolutions differ")


def rmse_pdap(measured: PdapGrid, simulated: PdapGrid) -> float:
    """Root-mean-square cell difference of the two dBm views, in dB."""
    _check_shapes(measured, simulated)
    diff = measured.to_dbm() - simulated.to_dbm()
    return float(np.sqrt(np.mean(diff ** 2)))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return w / w.sum()


def _local_mean(img: np.ndarray, win: np.ndarray) -> np.ndarray:
    # Delay axis clamps at the edges, azimuth axis wraps (full circle).
    out = correlate1d(img, win, axis=0, mode="nearest")
    return correlate1d(out, win, axis=1, mode="wrap")


def ssim_pdap(
    measured: PdapGrid,
    simulated: PdapGrid,
    window_size: int = 11,
    window_sigma: float = 1.5,
    k1: float = 0.01,
    k2: float = 0.03,
) -> float:
    """Mean local structural similarity of the two grids, in [0, 1].

    Grids are shifted to non-negative values by subtracting the common noise
    floor; the SSIM constants scale with the joint dynamic range (max over
    both grids minus the floor).
    """
    _check_shapes(measured, simulated)
    floor = min(measured.spec.noise_floor_dbm, simulated.spec.noise_floor_dbm)
    x = measured.to_dbm() - floor
    y = simulated.to_dbm() - floor
    dyn = float(max(x.max(), y.max()))
    if dyn <= 0:
        if np.array_equal(x, y):
            return 1.0
        raise ValueError("zero dynamic range with unequal grids")

    c1 = (k1 * dyn) ** 2
    c2 = (k2 * dyn) ** 2
    win = _gaussian_window(window_size, window_sigma)
    mu_x = _local_mean(x, win)
    mu_y = _local_mean(y, win)
    var_x = _local_mean(x * x, win) - mu_x ** 2
    var_y = _local_mean(y * y, win) - mu_y ** 2
    cov = _local_mean(x * y, win) - mu_x * mu_y
    ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2))
    return float(min(max(np.mean(ssim_map), 0.0), 1.0))


def metric_report(measured: PdapGrid, simulated: PdapGrid, **ssim_kwargs) -> MetricReport:
    """RMSE and SSIM for one grid pair."""
    floor = min(measured.spec.noise_floor_dbm, simulated.spec.noise_floor_dbm)
    dyn = float(max(measured.to_dbm().max(), simulated.to_dbm().max()) - floor)
    return MetricReport(
        rmse_db=rmse_pdap(measured, simulated),
        ssim=ssim_pdap(measured, simulated, **ssim_kwargs),
        grid_shape=measured.shape,
        dynamic_range_db=dyn,
    )


def empirical_cdf(values) -> list[tuple[float, float]]:
    """Sorted (value, empirical quantile) pairs for CDF tables."""
    v = np.sort(np.asarray(list(values), dtype=float))
    n = v.size
    if n == 0:
        return []
    return [(float(x), (k + 1) / n) for k, x in enumerate(v)]
