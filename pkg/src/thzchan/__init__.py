"""thzchan: hybrid ray-tracing/statistical channel modeling for indoor THz links.

The toolkit synthesizes indoor channels by combining an image-method ray
tracer (LoS and wall reflections in a shoebox room) with measurement-fitted
statistical clusters and subpaths, rasterizes them onto power-delay-angular
profiles, clusters multipath components with an MCD-based DBSCAN matched
against the traced rays, extracts channel characteristics, and validates
simulated profiles against references with RMSE and SSIM.
"""

__version__ = "0.1.0"

from .analysis import (
    CharacteristicsRow,
    CiFit,
    analyze_realization,
    angular_spread,
    characteristics_from_clusters,
    correlation_matrix,
    fit_ci,
    fit_lognormal,
    fspl,
    intra_cluster_spreads,
    k_factor,
    rms_delay_spread,
    wall_reflection_ratio,
    weighted_angular_spread,
    weighted_delay_spread,
)
from .clustering import ClusterSet, McdConfig, dbscan_mcd, dbscan_mcd_arrays, match_clusters, mcd
from .config import ScenarioConfig, load_config
from .hybrid import (
    ChannelRealization,
    HybridModelParams,
    amplitude_from_law,
    materialize_phases,
    sample_arrival_offsets,
    sample_cluster_count,
    sample_subpath_count,
    sample_von_mises,
    synthesize_channel,
)
from .metrics import MetricReport, metric_report, rmse_pdap, ssim_pdap
from .pdap import (
    GridSpec,
    Mpc,
    PdapGrid,
    clip_below_floor,
    compose_elevation,
    extract_mpcs,
    rasterize,
    rasterize_arrays,
    read_pdap,
    write_pdap,
)
from .raytrace import (
    AntennaBeam,
    RoomScene,
    RtPath,
    antenna_gain,
    build_rt_cir,
    default_tx_beam,
    enumerate_images,
    fresnel_reflection_magnitude,
    rt_amplitude,
)

__all__ = [
    "AntennaBeam", "ChannelRealization", "CharacteristicsRow", "CiFit",
    "ClusterSet", "GridSpec", "HybridModelParams", "McdConfig", "MetricReport",
    "Mpc", "PdapGrid", "RoomScene", "RtPath", "ScenarioConfig",
    "amplitude_from_law", "analyze_realization", "angular_spread",
    "antenna_gain", "build_rt_cir", "characteristics_from_clusters",
    "clip_below_floor", "compose_elevation", "correlation_matrix", "dbscan_mcd",
    "dbscan_mcd_arrays", "default_tx_beam", "enumerate_images", "extract_mpcs",
    "fit_ci", "fit_lognormal", "fresnel_reflection_magnitude", "fspl",
    "intra_cluster_spreads", "k_factor", "load_config", "match_clusters",
    "materialize_phases", "mcd", "metric_report", "rasterize",
    "rasterize_arrays", "read_pdap", "rms_delay_spread", "rmse_pdap",
    "rt_amplitude", "sample_arrival_offsets", "sample_cluster_count",
    "sample_subpath_count", "sample_von_mises", "ssim_pdap",
    "synthesize_channel", "wall_reflection_ratio", "weighted_angular_spread",
    "weighted_delay_spread", "write_pdap",
]
