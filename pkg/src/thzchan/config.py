"""Scenario configuration: INI-style sectioned key-value files.

One config file describes a complete scenario: the room and terminals, the
channel-model settings (including overrides for every statistical parameter),
the clustering stage, the validation metrics, and output options.  Unknown
sections or keys are rejected so that typos fail loudly.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

from .clustering import McdConfig
from .hybrid import ClusterFamilyParams, HybridModelParams, SubpathParams
from .pdap import GridSpec
from .raytrace import RoomScene
from .units import (
    DEFAULT_MPC_THRESHOLD_DBM,
    DEFAULT_N_AZIMUTH_BINS,
    DEFAULT_NOISE_FLOOR_DBM,
)


class ConfigError(ValueError):
    """Invalid scenario configuration."""


@dataclass(frozen=True)
class ClusteringConfig:
    eps: float = 0.12               # MCD neighborhood radius
    min_points: int = 6
    zeta: float = 1.0
    threshold_dbm: float = DEFAULT_MPC_THRESHOLD_DBM
    tau_std_ns: float = 20.0
    delta_tau_max_ns: float = 100.0
    recompute_tau_std: bool = False

    def mcd(self) -> McdConfig:
        return McdConfig(self.zeta, self.tau_std_ns, self.delta_tau_max_ns,
                         self.recompute_tau_std)


@dataclass(frozen=True)
class MetricsConfig:
    noise_floor_dbm: float = DEFAULT_NOISE_FLOOR_DBM
    ssim_window: int = 11
    ssim_sigma: float = 1.5
    ssim_k1: float = 0.01
    ssim_k2: float = 0.03


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: str = "csv"
    plots: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    scene: RoomScene
    params: HybridModelParams
    mode: str = "hybrid"
    master_seed: int = 0
    grid: GridSpec = field(default_factory=GridSpec)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


# schema: section -> key -> (type, default or None when required)
_SUBPATH_KEYS = ("count_log_mu", "count_log_sigma", "arrival_rate",
                 "aoa_mu", "aoa_kappa", "amp_coeff", "amp_exponent")
_FAMILY_KEYS = ("inter_aoa_mu", "inter_aoa_kappa", "inter_amp_coeff", "inter_amp_exponent")

_SCHEMA: dict[str, dict[str, tuple]] = {
    "room": {
        "length": (float, None),
        "width": (float, None),
        "permittivity": (float, 6.4),
        "frequency_ghz": (float, 140.0),
    },
    "tx": {
        "x": (float, None),
        "y": (float, None),
        "gain_dbi": (float, 15.0),
        "hpbw_deg": (float, 30.0),
        "power_mw": (float, 1.0),
    },
    "rx": {
        "x": (float, None),
        "y": (float, None),
    },
    "model": {
        "mode": (str, "hybrid"),
        "max_order": (int, 3),
        "cap_to_paper": (bool, True),
        "seed": (int, 0),
        "inter_arrival_rate": (float, None),
        "cluster_count_slope": (float, None),
        "cluster_count_intercept": (float, None),
        **{f"{cat}_{key}": (float, None)
           for cat in ("rt_pre", "rt_post", "nonrt_pre", "nonrt_post")
           for key in _SUBPATH_KEYS},
        **{f"{fam}_{key}": (float, None)
           for fam in ("rt_family", "nonrt_family")
           for key in _FAMILY_KEYS},
    },
    "clustering": {
        "eps": (float, 0.12),
        "min_points": (int, 6),
        "zeta": (float, 1.0),
        "threshold_dbm": (float, DEFAULT_MPC_THRESHOLD_DBM),
        "tau_std_ns": (float, 20.0),
        "delta_tau_max_ns": (float, 100.0),
        "recompute_tau_std": (bool, False),
    },
    "metrics": {
        "noise_floor_dbm": (float, DEFAULT_NOISE_FLOOR_DBM),
        "ssim_window": (int, 11),
        "ssim_sigma": (float, 1.5),
        "ssim_k1": (float, 0.01),
        "ssim_k2": (float, 0.03),
    },
    "grid": {
        "delta_tau_ns": (float, 1e9 / 13e9),
        "n_tau": (int, 1301),
        "n_theta": (int, DEFAULT_N_AZIMUTH_BINS),
    },
    "output": {
        "directory": (str, "out"),
        "formats": (str, "csv"),
        "plots": (bool, False),
    },
}

_REQUIRED = {("room", "length"), ("room", "width"),
             ("tx", "x"), ("tx", "y"), ("rx", "x"), ("rx", "y")}

# [model] keys other than these override HybridModelParams fields when present.
_MODEL_STRUCTURAL = {"mode", "max_order", "cap_to_paper", "seed"}


def _parse_bool(raw: str, where: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


def _convert(raw: str, typ, where: str):
    if typ is bool:
        return _parse_bool(raw, where)
    try:
        return typ(raw)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario config file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    values: dict[str, dict[str, object]] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        values[section] = {}
        for key, raw in cp[section].items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            typ, _ = _SCHEMA[section][key]
            values[section][key] = _convert(raw, typ, f"[{section}] {key}")

    for section, key in _REQUIRED:
        if key not in values.get(section, {}):
            raise ConfigError(f"missing required key {key!r} in section [{section}]")

    def get(section, key):
        typ, default = _SCHEMA[section][key]
        return values.get(section, {}).get(key, default)

    scene = RoomScene(
        length=get("room", "length"),
        width=get("room", "width"),
        tx_position=(get("tx", "x"), get("tx", "y")),
        rx_position=(get("rx", "x"), get("rx", "y")),
        wall_permittivity=get("room", "permittivity"),
        carrier_frequency=get("room", "frequency_ghz") * 1e9,
    )

    params = HybridModelParams(
        max_order=get("model", "max_order"),
        cap_to_paper=get("model", "cap_to_paper"),
        tx_peak_gain_db=get("tx", "gain_dbi"),
        tx_hpbw=math.radians(get("tx", "hpbw_deg")),
        tx_power_w=get("tx", "power_mw") * 1e-3,
    )
    params = _apply_model_overrides(params, values.get("model", {}))

    mode = get("model", "mode")
    if mode not in ("hybrid", "statistical_baseline"):
        raise ConfigError(f"[model] mode must be hybrid or statistical_baseline, got {mode!r}")

    grid = GridSpec(
        delta_tau=get("grid", "delta_tau_ns") * 1e-9,
        delta_theta=2.0 * math.pi / get("grid", "n_theta"),
        n_tau=get("grid", "n_tau"),
        n_theta=get("grid", "n_theta"),
        noise_floor_dbm=get("metrics", "noise_floor_dbm"),
    )
    clustering = ClusteringConfig(
        eps=get("clustering", "eps"),
        min_points=get("clustering", "min_points"),
        zeta=get("clustering", "zeta"),
        threshold_dbm=get("clustering", "threshold_dbm"),
        tau_std_ns=get("clustering", "tau_std_ns"),
        delta_tau_max_ns=get("clustering", "delta_tau_max_ns"),
        recompute_tau_std=get("clustering", "recompute_tau_std"),
    )
    metrics = MetricsConfig(
        noise_floor_dbm=get("metrics", "noise_floor_dbm"),
        ssim_window=get("metrics", "ssim_window"),
        ssim_sigma=get("metrics", "ssim_sigma"),
        ssim_k1=get("metrics", "ssim_k1"),
        ssim_k2=get("metrics", "ssim_k2"),
    )
    output = OutputConfig(
        directory=get("output", "directory"),
        formats=get("output", "formats"),
        plots=get("output", "plots"),
    )
    return ScenarioConfig(scene=scene, params=params, mode=mode,
                          master_seed=get("model", "seed"), grid=grid,
                          clustering=clustering, metrics=metrics, output=output)


def _apply_model_overrides(params: HybridModelParams, model_values: dict) -> HybridModelParams:
    """Override individual statistical parameters from [model] keys like
    rt_post_arrival_rate or nonrt_family_inter_amp_coeff."""
    overrides = {k: v for k, v in model_values.items()
                 if k not in _MODEL_STRUCTURAL and v is not None}
    if not overrides:
        return params
    simple = {}
    for name in ("inter_arrival_rate", "cluster_count_slope", "cluster_count_intercept"):
        if name in overrides:
            simple[name] = overrides.pop(name)
    by_group: dict[str, dict[str, float]] = {}
    for key, val in overrides.items():
        for group in ("rt_pre", "rt_post", "nonrt_pre", "nonrt_post",
                      "rt_family", "nonrt_family"):
            prefix = group + "_"
            if key.startswith(prefix):
                by_group.setdefault(group, {})[key[len(prefix):]] = val
                break
        else:
            raise ConfigError(f"unrecognized model override {key!r}")
    changed = dict(simple)
    for group, fields in by_group.items():
        current = getattr(params, group)
        if isinstance(current, SubpathParams) or isinstance(current, ClusterFamilyParams):
            changed[group] = replace(current, **fields)
    return replace(params, **changed)


EXAMPLE_CONFIG = """\
# thzchan scenario: 10.15 m x 7.9 m meeting room at 140 GHz
[room]
length = 10.15
width = 7.9
permittivity = 6.4
frequency_ghz = 140

[tx]
x = 1.0
y = 1.0
gain_dbi = 15
hpbw_deg = 30

[rx]
x = 5.3
y = 4.2

[model]
mode = hybrid
max_order = 3
cap_to_paper = true
seed = 0

[clustering]
eps = 0.12
min_points = 6
threshold_dbm = -140

[output]
directory = out
plots = false
"""
