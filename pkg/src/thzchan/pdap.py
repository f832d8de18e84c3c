"""Power-delay-angular-profile (PDAP) data model.

A PDAP is a 2D grid of received power over (delay bin, azimuth bin).  It is the
common currency between the channel generator, the clustering stage, and the
model-validation metrics: multipath components (MPCs) are rasterized onto a
grid, measured 3D profiles are composed over elevation, and grids round-trip
through a small line-oriented CSV format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .units import (
    DEFAULT_DELAY_BIN_S,
    DEFAULT_N_AZIMUTH_BINS,
    DEFAULT_N_DELAY_BINS,
    DEFAULT_NOISE_FLOOR_DBM,
    dbm_to_watts,
    watts_to_dbm,
    wrap_azimuth,
)

TWO_PI = 2.0 * np.pi


class PdapFormatError(ValueError):
    """Malformed PDAP file: bad header, dimensions, or cell values."""


@dataclass(frozen=True)
class Mpc:
    """One multipath component: time of arrival, azimuth AoA, linear power.

    ``aoa_elevation`` is only populated when ingesting measured 3D profiles;
    the simulator works in the azimuth plane.
    """

    toa: float                      # seconds, >= 0
    aoa_azimuth: float              # radians, wrapped to [0, 2*pi)
    power: float                    # linear watts, > 0
    aoa_elevation: float | None = None

    def __post_init__(self):
        if self.toa < 0:
            raise ValueError(f"MPC toa must be >= 0, got {self.toa}")
        if self.power <= 0:
            raise ValueError(f"MPC power must be > 0, got {self.power}")
        object.__setattr__(self, "aoa_azimuth", float(np.mod(self.aoa_azimuth, TWO_PI)))


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a PDAP grid.

    The azimuth bins must tile the full circle: n_theta * delta_theta == 2*pi.
    """

    delta_tau: float = DEFAULT_DELAY_BIN_S      # seconds per delay bin
    delta_theta: float = TWO_PI / DEFAULT_N_AZIMUTH_BINS  # radians per azimuth bin
    n_tau: int = DEFAULT_N_DELAY_BINS
    n_theta: int = DEFAULT_N_AZIMUTH_BINS
    noise_floor_dbm: float = DEFAULT_NOISE_FLOOR_DBM

    def __post_init__(self):
        if self.delta_tau <= 0 or self.n_tau < 1 or self.n_theta < 1:
            raise ValueError("grid must have positive bin sizes and counts")
        if not np.isclose(self.n_theta * self.delta_theta, TWO_PI, rtol=1e-9):
            raise ValueError(
                f"azimuth bins must cover the full circle: "
                f"{self.n_theta} * {self.delta_theta} != 2*pi"
            )

    @property
    def max_delay(self) -> float:
        """Upper delay limit (exclusive) accepted by rasterization, seconds."""
        return self.n_tau * self.delta_tau

    def delay_centers(self) -> np.ndarray:
        return np.arange(self.n_tau) * self.delta_tau

    def azimuth_centers(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.delta_theta


@dataclass
class PdapGrid:
    """A (n_tau, n_theta) matrix of linear received power over delay/azimuth bins."""

    spec: GridSpec
    power: np.ndarray = field(default=None)  # linear watts, shape (n_tau, n_theta)

    def __post_init__(self):
        if self.power is None:
            self.power = np.zeros((self.spec.n_tau, self.spec.n_theta))
        self.power = np.asarray(self.power, dtype=float)
        if self.power.shape != (self.spec.n_tau, self.spec.n_theta):
            raise ValueError(
                f"power shape {self.power.shape} does not match grid "
                f"({self.spec.n_tau}, {self.spec.n_theta})"
            )
        if np.any(self.power < 0):
            raise ValueError("PDAP cells must be non-negative linear powers")

    @property
    def shape(self) -> tuple[int, int]:
        return self.power.shape

    def total_power(self) -> float:
        return float(self.power.sum())

    def to_dbm(self) -> np.ndarray:
        """dBm view of the grid; empty (zero) cells read as the noise floor."""
        out = np.full(self.power.shape, self.spec.noise_floor_dbm)
        nz = self.power > 0
        out[nz] = watts_to_dbm(self.power[nz])
        return out


def _nearest_bin(x: np.ndarray, width: float) -> np.ndarray:
    # Nearest bin index with midpoint ties rounding toward the lower index.
    return np.ceil(x / width - 0.5).astype(np.int64)


def rasterize_arrays(
    toa: np.ndarray,
    aoa: np.ndarray,
    power: np.ndarray,
    spec: GridSpec,
) -> PdapGrid:
    """Accumulate per-MPC linear power into nearest (delay, azimuth) bins.

    Raises ValueError naming the first offending index if any ToA falls at or
    beyond ``spec.max_delay`` or below zero.
    """
    toa = np.asarray(toa, dtype=float)
    aoa = np.asarray(aoa, dtype=float)
    power = np.asarray(power, dtype=float)
    bad = np.nonzero((toa >= spec.max_delay) | (toa < 0))[0]
    if bad.size:
        raise ValueError(
            f"MPC index {bad[0]} has toa {toa[bad[0]]:.6g} s outside "
            f"[0, {spec.max_delay:.6g}) s"
        )
    i = _nearest_bin(toa, spec.delta_tau)
    np.minimum(i, spec.n_tau - 1, out=i)  # toa in the last half-bin maps to the last bin
    j = np.mod(_nearest_bin(wrap_azimuth(aoa), spec.delta_theta), spec.n_theta)
    grid = np.zeros((spec.n_tau, spec.n_theta))
    np.add.at(grid, (i, j), power)
    return PdapGrid(spec, grid)


def rasterize(mpcs, spec: GridSpec) -> PdapGrid:
    """Rasterize a sequence of :class:`Mpc` onto a grid (power-additive)."""
    mpcs = list(mpcs)
    if not mpcs:
        return PdapGrid(spec)
    return rasterize_arrays(
        np.array([m.toa for m in mpcs]),
        np.array([m.aoa_azimuth for m in mpcs]),
        np.array([m.power for m in mpcs]),
        spec,
    )


def compose_elevation(slices, spec: GridSpec) -> PdapGrid:
    """Sum a stack of per-elevation 2D power slices into one azimuth-plane PDAP.

    ``slices`` is a 3D array (n_tau, n_theta, n_elev) or a sequence of 2D
    arrays of identical shape.  Powers are linear and add cell-wise.
    """
    arrs = [np.asarray(s, dtype=float) for s in
            (np.moveaxis(slices, -1, 0) if isinstance(slices, np.ndarray) and slices.ndim == 3
             else slices)]
    if not arrs:
        raise ValueError("need at least one elevation slice")
    shape = arrs[0].shape
    for k, a in enumerate(arrs):
        if a.shape != shape:
            raise ValueError(f"elevation slice {k} has shape {a.shape}, expected {shape}")
    total = np.zeros(shape)
    for a in arrs:
        total += a
    return PdapGrid(spec, total)


def clip_below_floor(grid: PdapGrid) -> PdapGrid:
    """Zero every cell below the grid's noise floor (unobservable power).

    Mirrors the detection limit of a real sounder; returns the grid for
    chaining.
    """
    grid.power[grid.power < dbm_to_watts(grid.spec.noise_floor_dbm)] = 0.0
    return grid


def extract_mpcs(grid: PdapGrid, threshold_dbm: float) -> list[Mpc]:
    """One MPC per cell at or above the power threshold, at bin-center coordinates."""
    if threshold_dbm < grid.spec.noise_floor_dbm:
        raise ValueError(
            f"threshold {threshold_dbm} dBm below noise floor "
            f"{grid.spec.noise_floor_dbm} dBm"
        )
    thr_w = dbm_to_watts(threshold_dbm)
    ii, jj = np.nonzero(grid.power >= thr_w)
    dt, dth = grid.spec.delta_tau, grid.spec.delta_theta
    return [
        Mpc(toa=i * dt, aoa_azimuth=j * dth, power=grid.power[i, j])
        for i, j in zip(ii.tolist(), jj.tolist())
    ]


_HEADER_RE = re.compile(
    r"^# pdap v1 dtau_ns=(?P<dtau>\S+) dtheta_deg=(?P<dth>\S+) "
    r"ntau=(?P<ntau>\d+) ntheta=(?P<nth>\d+) noise_dbm=(?P<nf>\S+)$"
)


def write_pdap(grid: PdapGrid, path) -> None:
    """Write a grid as header plus n_tau lines of comma-separated dBm values.

    Cells are stored in the dBm view, so true zeros are written as the noise
    floor; values below the floor but non-zero are preserved.
    """
    s = grid.spec
    dbm = grid.to_dbm()
    with open(path, "w") as fh:
        fh.write(
            f"# pdap v1 dtau_ns={s.delta_tau * 1e9:.9g} "
            f"dtheta_deg={np.rad2deg(s.delta_theta):.9g} "
            f"ntau={s.n_tau} ntheta={s.n_theta} "
            f"noise_dbm={s.noise_floor_dbm:.9g}\n"
        )
        for row in dbm:
            fh.write(",".join(f"{v:.7f}" for v in row) + "\n")


def read_pdap(path) -> PdapGrid:
    """Read a PDAP file written by :func:`write_pdap`.

    Malformed headers, wrong dimensions, and non-numeric cells raise
    :class:`PdapFormatError` with the offending line number.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise PdapFormatError(f"{path}: line 1: empty file")
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise PdapFormatError(f"{path}: line 1: bad header {lines[0]!r}")
    try:
        dtau = float(m["dtau"]) * 1e-9
        dth = np.deg2rad(float(m["dth"]))
        n_tau, n_theta = int(m["ntau"]), int(m["nth"])
        noise = float(m["nf"])
    except ValueError as e:
        raise PdapFormatError(f"{path}: line 1: {e}") from e
    try:
        spec = GridSpec(dtau, dth, n_tau, n_theta, noise)
    except ValueError as e:
        raise PdapFormatError(f"{path}: line 1: {e}") from e
    body = lines[1:]
    if len(body) != n_tau:
        raise PdapFormatError(
            f"{path}: line {len(lines)}: expected {n_tau} data rows, found {len(body)}"
        )
    grid = np.empty((n_tau, n_theta))
    for r, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != n_theta:
            raise PdapFormatError(
                f"{path}: line {r + 2}: expected {n_theta} cells, found {len(cells)}"
            )
        try:
            grid[r] = [float(c) for c in cells]
        except ValueError as e:
            raise PdapFormatError(f"{path}: line {r + 2}: {e}") from e
    return PdapGrid(spec, dbm_to_watts(grid))
