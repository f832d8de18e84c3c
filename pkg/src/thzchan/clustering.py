"""MPC clustering with a multipath-component distance (MCD) metric.

The MCD combines a chord distance between AoA unit vectors with a scaled delay
difference, making it suitable for the circular angle domain where plain
Euclidean DBSCAN fails.  Clusters found by MCD-based DBSCAN are then labeled
against a list of ray-traced paths: a cluster is *matched* when at least one
traced path lies within the neighborhood radius of any member, otherwise it is
*non-matched* (obstacle-like); low-density points are outliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pdap import Mpc
from .units import wrap_azimuth

OUTLIER = -1


@dataclass(frozen=True)
class McdConfig:
    """MCD scaling: MCD = sqrt(MCD_AoA^2 + zeta * MCD_tau^2).

    MCD_tau = tau_std / delta_tau_max^2 * |t1 - t2| with everything in ns;
    ``recompute_tau_std`` switches both scale constants to per-dataset values
    (std of the ToAs and their max spread) instead of the fixed defaults.
    """

    zeta: float = 1.0
    tau_std_ns: float = 20.0
    delta_tau_max_ns: float = 100.0
    recompute_tau_std: bool = False

    def __post_init__(self):
        if self.zeta < 0 or self.delta_tau_max_ns <= 0 or self.tau_std_ns < 0:
            raise ValueError("zeta/tau_std must be >= 0 and delta_tau_max > 0")

    def delay_scale(self) -> float:
        """Per-ns factor applied to ToA differences."""
        return self.tau_std_ns / self.delta_tau_max_ns ** 2


@dataclass
class Cluster:
    """One cluster: member indices plus a power-weighted centroid."""

    members: np.ndarray                     # indices into the MPC arrays
    centroid_toa_ns: float
    centroid_aoa: float                     # circular mean, radians
    match_status: str | None = None         # 'matched' | 'non_matched' | None
    matched_path_ids: list[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.members.size


@dataclass
class ClusterSet:
    """Clustering result over a fixed MPC list.

    Every MPC index appears exactly once: either in one cluster's members or
    in ``outliers``.  ``assignment`` holds the per-MPC cluster index with -1
    for outliers.
    """

    toa_ns: np.ndarray
    aoa: np.ndarray
    power: np.ndarray
    clusters: list[Cluster]
    outliers: np.ndarray
    assignment: np.ndarray
    unmatched_path_ids: list[int] = field(default_factory=list)

    @property
    def n_mpcs(self) -> int:
        return self.toa_ns.size

    def cluster_power(self, k: int) -> float:
        return float(self.power[self.clusters[k].members].sum())


def mcd(a: Mpc, b: Mpc, cfg: McdConfig) -> float:
    """MCD between two MPCs (symmetric, zero iff equal ToA and AoA)."""
    aoa_term = abs(np.sin(0.5 * (a.aoa_azimuth - b.aoa_azimuth)))
    tau_term = cfg.delay_scale() * abs(a.toa - b.toa) * 1e9
    return float(np.sqrt(aoa_term ** 2 + cfg.zeta * tau_term ** 2))


def _centroid(toa_ns, aoa, power, members):
    w = power[members]
    t = float((toa_ns[members] * w).sum() / w.sum())
    th = float(wrap_azimuth(np.arctan2((np.sin(aoa[members]) * w).sum(),
                                       (np.cos(aoa[members]) * w).sum())))
    return t, th


def dbscan_mcd(mpcs, eps: float, min_points: int, cfg: McdConfig) -> ClusterSet:
    """Standard DBSCAN with MCD as the metric.

    Core points have at least ``min_points`` neighbors (self included) within
    ``eps``; clusters are maximal density-connected sets and everything else
    is an outlier.  Border points reachable from several clusters go to the
    first-discovered cluster, so the result is deterministic in input order.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_points < 1:
        raise ValueError("min_points must be >= 1")
    mpcs = list(mpcs)
    toa_ns = np.array([m.toa for m in mpcs]) * 1e9
    aoa = np.array([m.aoa_azimuth for m in mpcs])
    power = np.array([m.power for m in mpcs])
    return dbscan_mcd_arrays(toa_ns, aoa, power, eps, min_points, cfg)


def _neighbor_lists(toa_ns, aoa, cfg: McdConfig, eps: float, block: int = 2048):
    """Per-point neighbor index lists within eps, computed in row blocks so the
    full n x n distance matrix is never materialized for large inputs."""
    if cfg.recompute_tau_std and toa_ns.size > 1:
        span = float(toa_ns.max() - toa_ns.min())
        cfg = McdConfig(cfg.zeta, float(np.std(toa_ns)), max(span, 1e-12))
    scale = cfg.delay_scale()
    eps2 = eps * eps
    n = toa_ns.size
    neighbors = []
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        aoa_term = np.sin(0.5 * (aoa[lo:hi, None] - aoa[None, :]))
        tau_term = scale * (toa_ns[lo:hi, None] - toa_ns[None, :])
        within = aoa_term ** 2 + cfg.zeta * tau_term ** 2 <= eps2
        neighbors.extend(np.nonzero(row)[0] for row in within)
    return neighbors


def dbscan_mcd_arrays(toa_ns: np.ndarray, aoa: np.ndarray, power: np.ndarray,
                      eps: float, min_points: int, cfg: McdConfig) -> ClusterSet:
    """Array-based DBSCAN core (see :func:`dbscan_mcd`)."""
    n = toa_ns.size
    assignment = np.full(n, OUTLIER, dtype=np.int64)
    if n == 0:
        return ClusterSet(toa_ns, aoa, power, [], np.empty(0, dtype=np.int64), assignment)

    neighbors = _neighbor_lists(toa_ns, aoa, cfg, eps)
    is_core = np.array([nb.size >= min_points for nb in neighbors])

    visited = np.zeros(n, dtype=bool)
    clusters: list[Cluster] = []
    for start in range(n):
        if visited[start] or not is_core[start]:
            continue
        # Breadth-first expansion over density-reachable points.
        cid = len(clusters)
        queue = [start]
        visited[start] = True
        head = 0
        while head < len(queue):
            p = queue[head]
            head += 1
            assignment[p] = cid
            if not is_core[p]:
                continue
            for q in neighbors[p]:
                if not visited[q]:
                    visited[q] = True
                    queue.append(q)
        members = np.array(sorted(queue), dtype=np.int64)
        t, th = _centroid(toa_ns, aoa, power, members)
        clusters.append(Cluster(members, t, th))
    outliers = np.nonzero(assignment == OUTLIER)[0]
    return ClusterSet(toa_ns, aoa, power, clusters, outliers, assignment)


def match_clusters(cset: ClusterSet, rt_paths, cfg: McdConfig, eps: float) -> ClusterSet:
    """Label clusters as matched/non-matched against ray-traced paths.

    A cluster is matched when any traced path lies within ``eps`` (MCD) of any
    of its members; paths matching no cluster are reported in
    ``unmatched_path_ids``.
    """
    path_toa_ns = np.array([p.toa for p in rt_paths]) * 1e9
    path_aoa = np.array([p.aoa_azimuth for p in rt_paths])
    scale = cfg.delay_scale()
    matched_any = np.zeros(len(rt_paths), dtype=bool)
    for cluster in cset.clusters:
        if len(rt_paths) == 0:
            cluster.match_status = "non_matched"
            cluster.matched_path_ids = []
            continue
        aoa_term = np.sin(0.5 * (cset.aoa[cluster.members][:, None] - path_aoa[None, :]))
        tau_term = scale * (cset.toa_ns[cluster.members][:, None] - path_toa_ns[None, :])
        d2 = aoa_term ** 2 + cfg.zeta * tau_term ** 2
        hit = np.nonzero((d2 <= eps * eps).any(axis=0))[0]
        if hit.size:
            cluster.match_status = "matched"
            cluster.matched_path_ids = hit.tolist()
            matched_any[hit] = True
        else:
            cluster.match_status = "non_matched"
            cluster.matched_path_ids = []
    cset.unmatched_path_ids = np.nonzero(~matched_any)[0].tolist()
    return cset


def cluster_report_csv(cset: ClusterSet, path) -> None:
    """Export per-MPC rows: mpc_index,toa_ns,aoa_deg,power_dbm,cluster_id,status."""
    status = {}
    for k, c in enumerate(cset.clusters):
        status[k] = c.match_status or "unlabeled"
    with open(path, "w") as fh:
        fh.write("mpc_index,toa_ns,aoa_deg,power_dbm,cluster_id,status\n")
        for i in range(cset.n_mpcs):
            cid = int(cset.assignment[i])
            st = "outlier" if cid == OUTLIER else status[cid]
            fh.write(
                f"{i},{cset.toa_ns[i]:.6f},{np.degrees(cset.aoa[i]):.4f},"
                f"{10.0 * np.log10(cset.power[i] * 1e3):.4f},{cid},{st}\n"
            )
