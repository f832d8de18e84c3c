"""Channel-characteristic extraction and statistical fitting.

Covers the close-in path-loss model, free-space path loss, K-factor, RMS delay
spread, angular spread, per-cluster spreads, the wall-reflection power ratio,
log-normal fitting, and the correlation matrix across characteristics rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import ClusterSet
from .hybrid import LOS, RT_CENTER, ChannelRealization
from .units import (
    DEFAULT_CARRIER_HZ,
    DEFAULT_MPC_THRESHOLD_DBM,
    SPEED_OF_LIGHT,
    dbm_to_watts,
    wrap_pi,
)

CHARACTERISTIC_LABELS = ("d", "N", "K", "DS", "AS", "Rw")


@dataclass(frozen=True)
class CiFit:
    """Close-in path-loss fit: PL = 10*ple*log10(d/d0) + FSPL(d0) + shadowing."""

    ple: float
    sigma_sf_db: float
    d0: float = 1.0


@dataclass(frozen=True)
class CharacteristicsRow:
    """Per-receiver channel characteristics (one row of a survey table)."""

    d: float                # Tx-Rx separation, m
    n_clusters: int
    k_factor: float         # linear ratio
    ds_ns: float
    as_deg: float
    r_w: float              # wall/obstacle cluster power ratio, linear
    rx_id: str = ""

    def values(self) -> np.ndarray:
        return np.array([self.d, self.n_clusters, self.k_factor,
                         self.ds_ns, self.as_deg, self.r_w])


def fspl(d: float, f: float = DEFAULT_CARRIER_HZ) -> float:
    """Free-space path loss in dB at distance d (m) and frequency f (Hz)."""
    if d <= 0 or f <= 0:
        raise ValueError("distance and frequency must be positive")
    return -20.0 * math.log10(SPEED_OF_LIGHT / (4.0 * math.pi * f * d))


def fit_ci(samples, frequency_hz: float = DEFAULT_CARRIER_HZ, d0: float = 1.0) -> CiFit:
    """Least-squares close-in fit of (distance, path loss dB) samples.

    The intercept is pinned to FSPL(d0), so the exponent is the zero-intercept
    regression of the excess loss on 10*log10(d/d0); sigma is the RMS residual,
    which this estimator minimizes.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    d = np.array([s[0] for s in samples], dtype=float)
    pl = np.array([s[1] for s in samples], dtype=float)
    if np.unique(d).size < 2:
        raise ValueError("degenerate fit: all distances are equal")
    x = 10.0 * np.log10(d / d0)
    y = pl - fspl(d0, frequency_hz)
    ple = float((x * y).sum() / (x * x).sum())
    resid = y - ple * x
    return CiFit(ple=ple, sigma_sf_db=float(np.sqrt(np.mean(resid ** 2))), d0=d0)


def weighted_delay_spread(toa_ns: np.ndarray, power: np.ndarray) -> float:
    """Power-weighted RMS spread of arrival times, in the unit of ``toa_ns``."""
    p = np.asarray(power, dtype=float)
    t = np.asarray(toa_ns, dtype=float)
    total = p.sum()
    if total <= 0:
        raise ValueError("total power must be positive")
    mean = (t * p).sum() / total
    return float(np.sqrt((((t - mean) ** 2) * p).sum() / total))


def rms_delay_spread(pdp: np.ndarray, delta_tau_s: float) -> float:
    """RMS delay spread (ns) of a binned power-delay profile A_c(i)."""
    pdp = np.asarray(pdp, dtype=float)
    delays_ns = np.arange(pdp.size) * delta_tau_s * 1e9
    return weighted_delay_spread(delays_ns, pdp)


def weighted_angular_spread(aoa: np.ndarray, power: np.ndarray) -> float:
    """Power-weighted angular spread in degrees.

    Angles are unwrapped about the power-weighted circular mean and the spread
    is the weighted standard deviation of the unwrapped offsets, which bounds
    the result near 104 degrees for power spread uniformly over the circle.
    """
    p = np.asarray(power, dtype=float)
    th = np.asarray(aoa, dtype=float)
    total = p.sum()
    if total <= 0:
        raise ValueError("total power must be positive")
    mu = math.atan2((np.sin(th) * p).sum(), (np.cos(th) * p).sum())
    offsets = wrap_pi(th - mu)
    centered = offsets - (offsets * p).sum() / total
    return float(np.degrees(np.sqrt(((centered ** 2) * p).sum() / total)))


def angular_spread(pap: np.ndarray, delta_theta_rad: float) -> float:
    """Angular spread (degrees) of a binned power-angle profile."""
    pap = np.asarray(pap, dtype=float)
    return weighted_angular_spread(np.arange(pap.size) * delta_theta_rad, pap)


def _los_cluster_index(cset: ClusterSet) -> int:
    # The LoS cluster holds the global peak MPC; in well-formed channels it is
    # also the earliest-ToA matched cluster.
    if not cset.clusters:
        raise ValueError("cluster set has no clusters")
    peak = int(np.argmax(cset.power))
    cid = int(cset.assignment[peak])
    if cid >= 0:
        return cid
    powers = [cset.cluster_power(k) for k in range(len(cset.clusters))]
    return int(np.argmax(powers))


def k_factor(cset: ClusterSet) -> float:
    """LoS-cluster power over the summed power of all other clusters.

    Outlier power is excluded; returns inf when no NLoS cluster exists.
    """
    los = _los_cluster_index(cset)
    p_los = cset.cluster_power(los)
    p_nlos = sum(cset.cluster_power(k) for k in range(len(cset.clusters)) if k != los)
    return p_los / p_nlos if p_nlos > 0 else math.inf


def wall_reflection_ratio(cset: ClusterSet) -> float:
    """Matched (wall-reflection) over non-matched (obstacle) cluster power.

    The LoS cluster is excluded from both sides; returns inf when there is no
    obstacle power and 0 when there are no matched NLoS clusters.
    """
    los = _los_cluster_index(cset)
    p_wall = p_obst = 0.0
    for k, c in enumerate(cset.clusters):
        if k == los:
            continue
        if c.match_status == "matched":
            p_wall += cset.cluster_power(k)
        else:
            p_obst += cset.cluster_power(k)
    if p_obst == 0.0:
        return math.inf if p_wall > 0 else 0.0
    return p_wall / p_obst


def intra_cluster_spreads(cset: ClusterSet) -> list[tuple[float, float]]:
    """Per-cluster (delay spread ns, angular spread deg); singletons give (0, 0)."""
    out = []
    for c in cset.clusters:
        if c.size < 2:
            out.append((0.0, 0.0))
            continue
        out.append((
            weighted_delay_spread(cset.toa_ns[c.members], cset.power[c.members]),
            weighted_angular_spread(cset.aoa[c.members], cset.power[c.members]),
        ))
    return out


def fit_lognormal(samples) -> tuple[float, float]:
    """Maximum-likelihood (mu, sigma) of ln(samples); requires positive samples."""
    x = np.asarray(list(samples), dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    if np.any(x <= 0):
        raise ValueError("log-normal fit requires positive samples")
    logs = np.log(x)
    return float(logs.mean()), float(logs.std())


@dataclass
class CorrelationResult:
    """Pearson correlation matrix over characteristics rows.

    Rows containing non-finite values in either column of a pair are excluded
    pairwise; zero-variance columns yield NaN off-diagonals.
    """

    matrix: np.ndarray
    labels: tuple[str, ...]
    n_rows: int
    n_excluded: int


def correlation_matrix(rows) -> CorrelationResult:
    """Pairwise Pearson correlations of (d, N, K, DS, AS, Rw) across rows."""
    rows = list(rows)
    if len(rows) < 3:
        raise ValueError("need at least three rows")
    data = np.array([r.values() for r in rows], dtype=float)
    n_cols = data.shape[1]
    excluded = 0
    m = np.eye(n_cols)
    for i in range(n_cols):
        for j in range(i + 1, n_cols):
            finite = np.isfinite(data[:, i]) & np.isfinite(data[:, j])
            excluded += int((~finite).sum())
            x, y = data[finite, i], data[finite, j]
            if x.size < 3 or np.std(x) == 0 or np.std(y) == 0:
                m[i, j] = m[j, i] = np.nan
                continue
            cov = np.mean((x - x.mean()) * (y - y.mean()))
            m[i, j] = m[j, i] = cov / (x.std() * y.std())
    return CorrelationResult(m, CHARACTERISTIC_LABELS, len(rows), excluded)


def characteristics_from_clusters(cset: ClusterSet, d: float, rx_id: str = "") -> CharacteristicsRow:
    """Characteristics row from a clustered (and matched) MPC set.

    Spreads are computed over clustered MPCs only; outliers are excluded from
    the analysis throughout.
    """
    member_mask = cset.assignment >= 0
    if not member_mask.any():
        raise ValueError("no clustered MPCs to analyze")
    return CharacteristicsRow(
        d=d,
        n_clusters=len(cset.clusters),
        k_factor=k_factor(cset),
        ds_ns=weighted_delay_spread(cset.toa_ns[member_mask], cset.power[member_mask]),
        as_deg=weighted_angular_spread(cset.aoa[member_mask], cset.power[member_mask]),
        r_w=wall_reflection_ratio(cset),
        rx_id=rx_id,
    )


def analyze_realization(
    realization: ChannelRealization,
    threshold_dbm: float = DEFAULT_MPC_THRESHOLD_DBM,
    max_toa_s: float | None = None,
    rx_id: str = "",
) -> CharacteristicsRow:
    """Characteristics row using the realization's ground-truth cluster labels.

    Mirrors the measured pipeline's conventions: MPCs below the detection
    threshold (or beyond the observable delay window) are ignored; the LoS
    cluster is the K-factor numerator; ray-seeded clusters count as
    wall-reflection power and purely statistical clusters as obstacle power.
    """
    thr_w = dbm_to_watts(threshold_dbm)
    keep = realization.power >= thr_w
    if max_toa_s is not None:
        keep &= realization.toa < max_toa_s
    keep &= realization.toa >= 0
    if not keep.any():
        raise ValueError("no MPCs above threshold")
    toa_ns = realization.toa[keep] * 1e9
    aoa = realization.aoa[keep]
    power = realization.power[keep]
    cid = realization.cluster_id[keep]
    label = realization.label[keep]

    los_ids = np.unique(cid[label == LOS])
    los_cid = int(los_ids[0]) if los_ids.size else int(cid[np.argmax(power)])
    p_los = power[cid == los_cid].sum()
    p_nlos = power[cid != los_cid].sum()
    # Wall-reflection side = clusters seeded by a traced ray (rt_center label);
    # everything else non-LoS counts as obstacle-like statistical power.
    wall_ids = np.unique(cid[label == RT_CENTER])
    wall_mask = np.isin(cid, wall_ids) & (cid != los_cid)
    p_wall = power[wall_mask].sum()
    p_obst = power[~np.isin(cid, wall_ids) & (cid != los_cid)].sum()
    if p_obst > 0:
        r_w = p_wall / p_obst
    else:
        r_w = math.inf if p_wall > 0 else 0.0
    return CharacteristicsRow(
        d=realization.scene.tx_rx_distance,
        n_clusters=int(np.unique(cid).size),
        k_factor=p_los / p_nlos if p_nlos > 0 else math.inf,
        ds_ns=weighted_delay_spread(toa_ns, power),
        as_deg=weighted_angular_spread(aoa, power),
        r_w=r_w,
        rx_id=rx_id,
    )


def characteristics_to_csv(rows, path) -> None:
    """Export rows as CSV: rx_id,d_m,n_clusters,k_factor,ds_ns,as_deg,r_w."""
    with open(path, "w") as fh:
        fh.write("rx_id,d_m,n_clusters,k_factor,ds_ns,as_deg,r_w\n")
        for r in rows:
            fh.write(
                f"{r.rx_id},{r.d:.4f},{r.n_clusters},{r.k_factor:.6g},"
                f"{r.ds_ns:.6g},{r.as_deg:.6g},{r.r_w:.6g}\n"
            )


def characteristics_from_csv(path) -> list[CharacteristicsRow]:
    """Read rows written by :func:`characteristics_to_csv`."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "rx_id,d_m,n_clusters,k_factor,ds_ns,as_deg,r_w":
            raise ValueError(f"{path}: unexpected characteristics header {header!r}")
        for line in fh:
            if not line.strip():
                continue
            rx_id, d, n, k, ds, asp, rw = line.strip().split(",")
            rows.append(CharacteristicsRow(
                d=float(d), n_clusters=int(n), k_factor=float(k),
                ds_ns=float(ds), as_deg=float(asp), r_w=float(rw), rx_id=rx_id,
            ))
    return rows
