"""Hybrid ray-tracing/statistical channel generator.

A channel realization combines a deterministic part (the LoS path and wall
reflections from the image-method tracer, each seeding a cluster) with a
statistical part: log-normally counted pre/post-cursor subpaths around every
cluster center, plus extra purely statistical clusters whose count falls
linearly with the Tx-Rx distance.  Arrival gaps are exponential (Poisson
arrivals), angles of arrival are Von Mises, and amplitudes follow a power law
in the delay offset from the anchor path.

A ``statistical_baseline`` mode replaces the ray-traced cluster centers with
statistically generated ones using the same parameter set, which serves as the
conventional fully stochastic reference model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raytrace import RoomScene, antenna_gain, default_tx_beam, enumerate_images
from .units import DEFAULT_TX_POWER_W, SPEED_OF_LIGHT, wrap_azimuth

# MPC labels
LOS = 0
RT_CENTER = 1
RT_SUBPATH = 2
NONRT_CENTER = 3
NONRT_SUBPATH = 4
LABEL_NAMES = ("los", "rt_center", "rt_subpath", "nonrt_center", "nonrt_subpath")

MIN_DELTA_TOA_NS = 1e-3     # clamp for the power-law singularity at zero offset

MODES = ("hybrid", "statistical_baseline")


@dataclass(frozen=True)
class SubpathParams:
    """Intra-cluster statistics for one cursor side of one cluster family."""

    count_log_mu: float         # mu of ln(subpath count)
    count_log_sigma: float      # sigma of ln(subpath count)
    arrival_rate: float         # exponential arrival rate, 1/ns
    aoa_mu: float               # Von Mises location of the AoA offset, rad
    aoa_kappa: float            # Von Mises concentration (0 = uniform)
    amp_coeff: float            # a in  amp = anchor * a * |dt_ns|^b
    amp_exponent: float         # b

    def __post_init__(self):
        if self.arrival_rate <= 0 or self.count_log_sigma < 0:
            raise ValueError("rates must be positive and sigmas non-negative")
        if self.aoa_kappa < 0 or self.amp_coeff <= 0:
            raise ValueError("kappa must be >= 0 and amplitude coefficient > 0")


@dataclass(frozen=True)
class ClusterFamilyParams:
    """Inter-cluster AoA and amplitude statistics for one cluster family."""

    inter_aoa_mu: float
    inter_aoa_kappa: float
    inter_amp_coeff: float
    inter_amp_exponent: float

    def __post_init__(self):
        if self.inter_aoa_kappa < 0 or self.inter_amp_coeff <= 0:
            raise ValueError("kappa must be >= 0 and amplitude coefficient > 0")


@dataclass(frozen=True)
class HybridModelParams:
    """Full statistical parameter set plus the ray-tracing configuration.

    Defaults are the values fitted from a 140 GHz meeting-room measurement
    campaign.  Arrival rates are stored in 1/ns; the fitted exponential scales
    were 0.0918/0.0593/0.102/0.1417 ns intra and 13.12 ns inter-cluster.
    """

    rt_pre: SubpathParams = SubpathParams(2.09, 1.20, 1.0 / 0.0918, 0.0, 33.0, 0.41, -0.51)
    rt_post: SubpathParams = SubpathParams(4.00, 1.59, 1.0 / 0.0593, 0.5, 3.5, 0.42, -0.45)
    nonrt_pre: SubpathParams = SubpathParams(1.76, 1.33, 1.0 / 0.102, 0.0, 16.0, 0.39, -0.21)
    nonrt_post: SubpathParams = SubpathParams(2.07, 1.03, 1.0 / 0.1417, 0.0, 16.0, 0.53, -0.06)
    rt_family: ClusterFamilyParams = ClusterFamilyParams(-2.6567, 0.0, 0.34, -0.65)
    nonrt_family: ClusterFamilyParams = ClusterFamilyParams(-1.23, 0.0, 0.36, -0.25)
    inter_arrival_rate: float = 1.0 / 13.12     # non-RT cluster arrivals, 1/ns
    cluster_count_slope: float = -1.056         # non-RT clusters per meter
    cluster_count_intercept: float = 9.776
    max_order: int = 3
    cap_to_paper: bool = True
    tx_peak_gain_db: float = 15.0
    tx_hpbw: float = math.radians(30.0)
    tx_power_w: float = DEFAULT_TX_POWER_W

    def __post_init__(self):
        if self.inter_arrival_rate <= 0:
            raise ValueError("inter-cluster arrival rate must be positive")

    def subpath_params(self, category: str) -> SubpathParams:
        try:
            return {"rt_pre": self.rt_pre, "rt_post": self.rt_post,
                    "nonrt_pre": self.nonrt_pre, "nonrt_post": self.nonrt_post}[category]
        except KeyError:
            raise ValueError(f"unknown subpath category {category!r}") from None


@dataclass
class ChannelRealization:
    """One synthesized channel: parallel per-MPC arrays plus labels.

    ``cluster_id`` ties every subpath to its generating cluster center;
    ``label`` distinguishes the LoS path, ray-traced centers and their
    subpaths, and purely statistical centers/subpaths.
    """

    toa: np.ndarray             # seconds
    aoa: np.ndarray             # radians in [0, 2*pi)
    power: np.ndarray           # linear watts
    cluster_id: np.ndarray      # int
    label: np.ndarray           # int, see LABEL_NAMES
    seed: int
    mode: str
    scene: RoomScene
    n_rt_clusters: int          # cluster ids < n_rt_clusters are RT-seeded (incl. LoS)

    @property
    def n_mpcs(self) -> int:
        return self.toa.size

    def total_power(self) -> float:
        return float(self.power.sum())


def sample_cluster_count(d: float, slope: float = -1.056, intercept: float = 9.776) -> int:
    """Number of non-RT clusters at Tx-Rx distance d: ceil(slope*d + intercept), >= 0."""
    if d <= 0:
        raise ValueError("distance must be positive")
    return max(math.ceil(slope * d + intercept), 0)


def sample_subpath_count(params: SubpathParams, rng: np.random.Generator) -> int:
    """Rounded log-normal subpath count (can be zero)."""
    return max(int(np.rint(rng.lognormal(params.count_log_mu, params.count_log_sigma))), 0)


def sample_arrival_offsets(rate: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. exponential gaps (ns) with the given arrival rate (1/ns).

    Cumulative sums give arrival times relative to the anchor; pre-cursor
    callers apply a negative sign.
    """
    if rate <= 0:
        raise ValueError("arrival rate must be positive")
    if n < 0:
        raise ValueError("n must be >= 0")
    return rng.exponential(1.0 / rate, size=n)


def sample_von_mises(mu: float, kappa: float, rng: np.random.Generator, size=None):
    """Von Mises draw(s) in [0, 2*pi) by Best-Fisher rejection sampling.

    kappa = 0 degenerates to the uniform circular distribution.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    scalar = size is None
    n = 1 if scalar else int(size)
    if kappa == 0:
        out = rng.uniform(0.0, 2.0 * np.pi, size=n)
        return float(out[0]) if scalar else out

    a = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    b = (a - math.sqrt(2.0 * a)) / (2.0 * kappa)
    r = (1.0 + b * b) / (2.0 * b)

    out = np.empty(n)
    need = np.arange(n)
    while need.size:
        u1, u2, u3 = rng.uniform(size=(3, need.size))
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        accept = (c * (2.0 - c) - u2 > 0.0) | (np.log(c / u2) + 1.0 - c >= 0.0)
        idx = need[accept]
        out[idx] = np.sign(u3[accept] - 0.5) * np.arccos(f[accept]) + mu
        need = need[~accept]
    out = wrap_azimuth(out)
    return float(out[0]) if scalar else out


def amplitude_from_law(anchor_amplitude, a: float, b: float, delta_toa_ns):
    """Power-law amplitude: anchor * a * |dt|^b with dt in ns.

    Offsets below 1e-3 ns are clamped to avoid the b < 0 singularity.
    """
    if a <= 0:
        raise ValueError("amplitude coefficient must be positive")
    dt = np.maximum(np.abs(delta_toa_ns), MIN_DELTA_TOA_NS)
    return anchor_amplitude * a * dt ** b


@dataclass(frozen=True)
class _Cluster:
    toa_ns: float
    aoa: float
    amplitude: float        # sqrt-watt amplitude of the center MPC
    family: str             # 'rt' or 'nonrt'
    label: int


def _cluster_subpaths(center: _Cluster, params: HybridModelParams,
                      rng: np.random.Generator):
    """Pre- and post-cursor subpaths around one cluster center."""
    toas, aoas, amps = [], [], []
    for side, sign in (("pre", -1.0), ("post", 1.0)):
        sp = params.subpath_params(f"{center.family}_{side}")
        n = sample_subpath_count(sp, rng)
        if n == 0:
            continue
        offsets_ns = sign * np.cumsum(sample_arrival_offsets(sp.arrival_rate, n, rng))
        aoa = wrap_azimuth(center.aoa + sample_von_mises(sp.aoa_mu, sp.aoa_kappa, rng, size=n))
        amp = amplitude_from_law(center.amplitude, sp.amp_coeff, sp.amp_exponent,
                                 np.abs(offsets_ns))
        toas.append(center.toa_ns + offsets_ns)
        aoas.append(aoa)
        amps.append(amp)
    if not toas:
        return (np.empty(0),) * 3
    return np.concatenate(toas), np.concatenate(aoas), np.concatenate(amps)


def synthesize_channel(scene: RoomScene, params: HybridModelParams,
                       mode: str = "hybrid", seed: int = 0) -> ChannelRealization:
    """Generate one channel realization; deterministic given (seed, inputs).

    In ``hybrid`` mode the cluster centers are the ray-traced LoS and wall
    paths (Tx antenna pattern applied to these centers only); in
    ``statistical_baseline`` mode the ray-traced centers are replaced by
    statistically drawn ones using the RT-family statistics, anchored on the
    free-space LoS amplitude like every other statistical component.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    rng = np.random.default_rng(seed)
    d = scene.tx_rx_distance
    f = scene.carrier_frequency
    sqrt_pt = math.sqrt(params.tx_power_w)

    # Free-space LoS amplitude without the Tx pattern: the anchor for all
    # statistically generated cluster centers (the fitted amplitude laws
    # already absorb the measurement antenna).
    tau_los_ns = d / SPEED_OF_LIGHT * 1e9
    alpha_los = sqrt_pt * SPEED_OF_LIGHT / (4.0 * math.pi * f * d)
    tx_amp_boresight = 10.0 ** (params.tx_peak_gain_db / 20.0)

    centers: list[_Cluster] = []
    if mode == "hybrid":
        beam = default_tx_beam(scene, params.tx_peak_gain_db, params.tx_hpbw)
        paths = enumerate_images(scene, params.max_order, cap_to_paper=params.cap_to_paper)
        for p in paths:
            amp = sqrt_pt * math.sqrt(antenna_gain(beam, p.aod_azimuth)) * p.amplitude
            label = LOS if p.reflection_order == 0 else RT_CENTER
            centers.append(_Cluster(p.toa * 1e9, p.aoa_azimuth, amp, "rt", label))
    else:
        # LoS: ToA and power from the Tx-Rx separation only; with no geometry
        # available the arrival azimuth is drawn uniformly.
        los_aoa = rng.uniform(0.0, 2.0 * np.pi)
        centers.append(_Cluster(tau_los_ns, los_aoa, tx_amp_boresight * alpha_los, "rt", LOS))
        n_replaced = len(enumerate_images(scene, params.max_order,
                                          cap_to_paper=params.cap_to_paper)) - 1
        fam = params.rt_family
        t_ns = tau_los_ns
        for _ in range(n_replaced):
            t_ns += float(sample_arrival_offsets(params.inter_arrival_rate, 1, rng)[0])
            aoa = sample_von_mises(fam.inter_aoa_mu, fam.inter_aoa_kappa, rng)
            amp = float(amplitude_from_law(alpha_los, fam.inter_amp_coeff,
                                           fam.inter_amp_exponent, t_ns - tau_los_ns))
            centers.append(_Cluster(t_ns, aoa, amp, "rt", NONRT_CENTER))

    n_rt_clusters = len(centers)

    # Purely statistical clusters, chained from the LoS arrival.
    fam = params.nonrt_family
    n_s = sample_cluster_count(d, params.cluster_count_slope, params.cluster_count_intercept)
    t_ns = tau_los_ns
    for _ in range(n_s):
        t_ns += float(sample_arrival_offsets(params.inter_arrival_rate, 1, rng)[0])
        aoa = sample_von_mises(fam.inter_aoa_mu, fam.inter_aoa_kappa, rng)
        amp = float(amplitude_from_law(alpha_los, fam.inter_amp_coeff,
                                       fam.inter_amp_exponent, t_ns - tau_los_ns))
        centers.append(_Cluster(t_ns, aoa, amp, "nonrt", NONRT_CENTER))

    toa = [np.array([c.toa_ns for c in centers]) * 1e-9]
    aoa = [np.array([c.aoa for c in centers])]
    power = [np.array([c.amplitude for c in centers]) ** 2]
    cluster_id = [np.arange(len(centers))]
    label = [np.array([c.label for c in centers], dtype=np.int8)]

    rt_subpath_label = RT_SUBPATH if mode == "hybrid" else NONRT_SUBPATH
    for cid, c in enumerate(centers):
        sub_label = rt_subpath_label if c.family == "rt" else NONRT_SUBPATH
        t_ns, th, amp = _cluster_subpaths(c, params, rng)
        keep = t_ns >= 0.0     # arrivals before t=0 are unphysical and dropped
        n = int(keep.sum())
        if n == 0:
            continue
        toa.append(t_ns[keep] * 1e-9)
        aoa.append(th[keep])
        power.append(amp[keep] ** 2)
        cluster_id.append(np.full(n, cid))
        label.append(np.full(n, sub_label, dtype=np.int8))

    return ChannelRealization(
        toa=np.concatenate(toa),
        aoa=np.concatenate(aoa),
        power=np.concatenate(power),
        cluster_id=np.concatenate(cluster_id).astype(np.int32),
        label=np.concatenate(label),
        seed=seed,
        mode=mode,
        scene=scene,
        n_rt_clusters=n_rt_clusters,
    )


def materialize_phases(realization: ChannelRealization) -> np.ndarray:
    """Per-MPC uniform phases in [0, 2*pi), deterministic for the realization seed.

    Phases enter only on export; the PDAP rasterization is power-additive.
    """
    rng = np.random.default_rng([realization.seed, 0x9E3779B9])
    return rng.uniform(0.0, 2.0 * np.pi, size=realization.n_mpcs)


def realization_to_csv(realization: ChannelRealization, path) -> None:
    """Export as CSV: cluster_id,label,toa_ns,aoa_deg,power_dbm,phase_rad."""
    phases = materialize_phases(realization)
    with open(path, "w") as fh:
        fh.write("cluster_id,label,toa_ns,aoa_deg,power_dbm,phase_rad\n")
        for k in range(realization.n_mpcs):
            fh.write(
                f"{realization.cluster_id[k]},{LABEL_NAMES[realization.label[k]]},"
                f"{realization.toa[k] * 1e9:.6f},"
                f"{math.degrees(realization.aoa[k]):.4f},"
                f"{10.0 * math.log10(realization.power[k] * 1e3):.4f},"
                f"{phases[k]:.6f}\n"
            )
