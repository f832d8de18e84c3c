"""Deterministic 2D image-method ray tracer for a rectangular (shoebox) room.

Produces the line-of-sight path and all specular wall-reflection paths up to a
configured order by unfolding the mirrored-room lattice, with TE Fresnel
reflection loss on smooth dielectric walls and a Gaussian main-lobe antenna
pattern at the transmitter.  Walls are identified by compass letters:
'W' (x=0), 'E' (x=length), 'S' (y=0), 'N' (y=width).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pdap import Mpc
from .units import DEFAULT_TX_POWER_W, SPEED_OF_LIGHT, wrap_azimuth, wrap_pi

WALL_MARGIN = 1e-9          # Tx/Rx closer than this to a wall is a degenerate mirror
ANTENNA_FLOOR_DB = 30.0     # main-lobe model is floored at peak - 30 dB
PAPER_ORDER3_COUNT = 8      # third-order path count retained by cap_to_paper


@dataclass(frozen=True)
class RoomScene:
    """Rectangular room with one Tx and one Rx in the floor-plan plane.

    Positions are (x, y) in meters with the room spanning [0, length] x
    [0, width]; both terminals must be strictly inside.
    """

    length: float
    width: float
    tx_position: tuple[float, float]
    rx_position: tuple[float, float]
    wall_permittivity: float = 6.4          # relative permittivity of the walls
    carrier_frequency: float = 140e9        # Hz

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("room dimensions must be positive")
        if self.wall_permittivity <= 1:
            raise ValueError("wall permittivity must exceed 1")
        if self.carrier_frequency <= 0:
            raise ValueError("carrier frequency must be positive")
        for name, (x, y) in (("tx", self.tx_position), ("rx", self.rx_position)):
            if not (WALL_MARGIN < x < self.length - WALL_MARGIN
                    and WALL_MARGIN < y < self.width - WALL_MARGIN):
                raise ValueError(f"{name} position ({x}, {y}) must be strictly inside the room")

    @property
    def tx_rx_distance(self) -> float:
        return math.dist(self.tx_position, self.rx_position)

    def los_azimuth_from_tx(self) -> float:
        """Azimuth of the Tx->Rx direction; the conventional Tx boresight."""
        dx = self.rx_position[0] - self.tx_position[0]
        dy = self.rx_position[1] - self.tx_position[1]
        return float(wrap_azimuth(math.atan2(dy, dx)))


@dataclass(frozen=True)
class AntennaBeam:
    """Gaussian main-lobe beam: quadratic-in-dB rolloff, floored at -30 dB."""

    boresight_azimuth: float    # radians
    peak_gain_db: float
    hpbw: float                 # half-power beamwidth, radians

    def __post_init__(self):
        if self.hpbw <= 0:
            raise ValueError("HPBW must be positive")


@dataclass(frozen=True)
class RtPath:
    """A deterministic ray-traced path.

    ``wall_sequence`` lists wall letters in propagation (Tx->Rx) order; the
    empty string is the LoS path.  ``amplitude`` is the linear amplitude gain
    including Fresnel reflection losses and free-space spreading.
    """

    wall_sequence: str
    toa: float                  # seconds
    aoa_azimuth: float          # radians in [0, 2*pi), arrival direction at Rx
    aod_azimuth: float          # radians in [0, 2*pi), departure direction at Tx
    amplitude: float            # linear amplitude gain, > 0
    reflection_order: int


def fresnel_reflection_magnitude(incidence_angle: float, permittivity: float) -> float:
    """|Gamma| of the perpendicular (TE) Fresnel coefficient on a dielectric wall.

    ``incidence_angle`` is measured from the surface normal in [0, pi/2];
    grazing incidence returns exactly 1.
    """
    if not 0 <= incidence_angle <= math.pi / 2:
        raise ValueError("incidence angle must lie in [0, pi/2]")
    if permittivity <= 1:
        raise ValueError("permittivity must exceed 1")
    if incidence_angle == math.pi / 2:
        return 1.0
    ct = math.cos(incidence_angle)
    s = math.sqrt(permittivity - math.sin(incidence_angle) ** 2)
    return (s - ct) / (s + ct)


def antenna_gain(beam: AntennaBeam, azimuth: float):
    """Linear power gain of the main-lobe model at an absolute azimuth.

    gain_dB = peak - 12*(dphi/hpbw)^2 with the wrapped boresight offset dphi,
    floored at peak - 30 dB.
    """
    dphi = np.abs(wrap_pi(np.asarray(azimuth) - beam.boresight_azimuth))
    g_db = beam.peak_gain_db - np.minimum(12.0 * (dphi / beam.hpbw) ** 2, ANTENNA_FLOOR_DB)
    out = 10.0 ** (g_db / 10.0)
    return float(out) if np.isscalar(azimuth) or np.ndim(azimuth) == 0 else out


def _image_coord(index: int, source: float, span: float) -> float:
    # Mirrored-lattice coordinate: even indices keep the source offset,
    # odd indices flip it across the far wall of the cell.
    return index * span + (source if index % 2 == 0 else span - source)


def _mirror(wall: str, length: float, width: float):
    if wall == "W":
        return np.array([[-1.0, 0.0], [0.0, 1.0]]), np.array([0.0, 0.0])
    if wall == "E":
        return np.array([[-1.0, 0.0], [0.0, 1.0]]), np.array([2.0 * length, 0.0])
    if wall == "S":
        return np.array([[1.0, 0.0], [0.0, -1.0]]), np.array([0.0, 0.0])
    return np.array([[1.0, 0.0], [0.0, -1.0]]), np.array([0.0, 2.0 * width])


def _fold_path(scene: RoomScene, image: np.ndarray, i: int, j: int):
    """Fold the straight Rx->image segment back into the room.

    Returns the physical bounce points in Rx->Tx order and the wall letters in
    the same order.  The fold transform maps the unfolded image back onto the
    true Tx position; that identity is asserted to guard the geometry.
    """
    rx = np.asarray(scene.rx_position)
    tx = np.asarray(scene.tx_position)
    L, W = scene.length, scene.width
    vec = image - rx

    crossings = []  # (t along Rx->image, physical wall letter at the crossing)
    lo, hi = sorted((rx[0], image[0]))
    for k in range(math.ceil(lo / L), math.floor(hi / L) + 1):
        if lo < k * L < hi:
            crossings.append(((k * L - rx[0]) / vec[0], "W" if k % 2 == 0 else "E"))
    lo, hi = sorted((rx[1], image[1]))
    for k in range(math.ceil(lo / W), math.floor(hi / W) + 1):
        if lo < k * W < hi:
            crossings.append(((k * W - rx[1]) / vec[1], "S" if k % 2 == 0 else "N"))
    crossings.sort()
    if len(crossings) != abs(i) + abs(j):
        raise ValueError(
            f"degenerate image geometry for lattice cell ({i}, {j}); "
            "Tx or Rx is effectively on a wall"
        )

    A = np.eye(2)
    b = np.zeros(2)
    points, walls = [], []
    for t, wall in crossings:
        q = A @ (rx + t * vec) + b
        points.append(q)
        walls.append(wall)
        Am, bm = _mirror(wall, L, W)
        A = Am @ A
        b = Am @ b + bm
    folded_tx = A @ image + b
    if not np.allclose(folded_tx, tx, atol=1e-6):
        raise ValueError(f"image fold for cell ({i}, {j}) does not close on the Tx position")
    return points, walls


def enumerate_images(scene: RoomScene, max_order: int, cap_to_paper: bool = False) -> list[RtPath]:
    """LoS plus every specular wall-reflection path up to ``max_order`` bounces.

    Paths are derived from the 2D mirrored-room lattice and returned sorted by
    ToA.  With ``cap_to_paper`` the third-order paths are trimmed to the 8
    strongest by amplitude (the full lattice has 12), matching the 20-path
    wall-reflection configuration used by the hybrid channel model.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    rx = np.asarray(scene.rx_position)
    tx = np.asarray(scene.tx_position)
    eps_r = scene.wall_permittivity
    f = scene.carrier_frequency

    paths = []
    for i in range(-max_order, max_order + 1):
        for j in range(-max_order, max_order + 1):
            order = abs(i) + abs(j)
            if order > max_order:
                continue
            image = np.array([
                _image_coord(i, tx[0], scene.length),
                _image_coord(j, tx[1], scene.width),
            ])
            vec = image - rx
            dist = float(np.hypot(*vec))
            toa = dist / SPEED_OF_LIGHT
            aoa = float(wrap_azimuth(math.atan2(vec[1], vec[0])))

            if order == 0:
                aod = float(wrap_azimuth(math.atan2(rx[1] - tx[1], rx[0] - tx[0])))
                wall_seq = ""
            else:
                points, walls_rx_order = _fold_path(scene, image, i, j)
                wall_seq = "".join(reversed(walls_rx_order))
                first_bounce = points[-1]  # nearest the Tx end
                aod = float(wrap_azimuth(math.atan2(
                    first_bounce[1] - tx[1], first_bounce[0] - tx[0])))

            # Incidence angles from the wall normal are shared by all bounces
            # on same-axis walls (the unfolded direction is constant).
            u = vec / dist
            gamma = 1.0
            if abs(i):
                gamma *= fresnel_reflection_magnitude(math.acos(min(abs(u[0]), 1.0)), eps_r) ** abs(i)
            if abs(j):
                gamma *= fresnel_reflection_magnitude(math.acos(min(abs(u[1]), 1.0)), eps_r) ** abs(j)
            amplitude = gamma / (4.0 * math.pi * f * toa)

            paths.append(RtPath(wall_seq, toa, aoa, aod, amplitude, order))

    if cap_to_paper and max_order >= 3:
        third = [p for p in paths if p.reflection_order == 3]
        third.sort(key=lambda p: (-p.amplitude, p.toa, p.wall_sequence))
        keep = set(id(p) for p in third[:PAPER_ORDER3_COUNT])
        paths = [p for p in paths if p.reflection_order != 3 or id(p) in keep]
    paths.sort(key=lambda p: (p.toa, p.wall_sequence))
    return paths


def rt_amplitude(path: RtPath, scene: RoomScene) -> float:
    """Linear amplitude gain of a path: product of |Gamma| over its bounces
    divided by 4*pi*f*toa (the LoS case reduces to the Friis amplitude)."""
    if path.toa <= 0:
        raise ValueError("path ToA must be positive")
    n_x = sum(1 for w in path.wall_sequence if w in "WE")
    n_y = sum(1 for w in path.wall_sequence if w in "SN")
    if n_x + n_y != path.reflection_order or path.reflection_order != len(path.wall_sequence):
        raise ValueError("wall sequence inconsistent with reflection order")
    gamma = 1.0
    if n_x:
        theta_x = math.acos(min(abs(math.cos(path.aoa_azimuth)), 1.0))
        gamma *= fresnel_reflection_magnitude(theta_x, scene.wall_permittivity) ** n_x
    if n_y:
        theta_y = math.acos(min(abs(math.sin(path.aoa_azimuth)), 1.0))
        gamma *= fresnel_reflection_magnitude(theta_y, scene.wall_permittivity) ** n_y
    return gamma / (4.0 * math.pi * scene.carrier_frequency * path.toa)


def default_tx_beam(scene: RoomScene, peak_gain_db: float = 15.0,
                    hpbw: float = math.radians(30.0)) -> AntennaBeam:
    """Tx beam aimed at the Rx: 15 dBi / 30 degree HPBW by default."""
    return AntennaBeam(scene.los_azimuth_from_tx(), peak_gain_db, hpbw)


def build_rt_cir(
    scene: RoomScene,
    max_order: int,
    tx_beam: AntennaBeam,
    cap_to_paper: bool = True,
    tx_power_w: float = DEFAULT_TX_POWER_W,
) -> list[Mpc]:
    """Deterministic CIR term: one MPC per ray path, weighted by the Tx pattern.

    MPC power is tx_power * gain(aod) * amplitude^2, i.e. the squared product
    of the Tx amplitude pattern and the path amplitude gain.
    """
    paths = enumerate_images(scene, max_order, cap_to_paper=cap_to_paper)
    return [
        Mpc(
            toa=p.toa,
            aoa_azimuth=p.aoa_azimuth,
            power=tx_power_w * antenna_gain(tx_beam, p.aod_azimuth) * p.amplitude ** 2,
        )
        for p in paths
    ]


def path_loss_db(path: RtPath) -> float:
    """Path loss in dB implied by a path's amplitude gain."""
    return -20.0 * math.log10(path.amplitude)


def rt_paths_to_csv(paths: list[RtPath], path) -> None:
    """Export paths as CSV: order,wall_seq,toa_ns,aoa_deg,aod_deg,amp_linear,loss_db."""
    with open(path, "w") as fh:
        fh.write("order,wall_seq,toa_ns,aoa_deg,aod_deg,amp_linear,loss_db\n")
        for p in paths:
            fh.write(
                f"{p.reflection_order},{p.wall_sequence},"
                f"{p.toa * 1e9:.6f},{math.degrees(p.aoa_azimuth):.4f},"
                f"{math.degrees(p.aod_azimuth):.4f},{p.amplitude:.8e},"
                f"{path_loss_db(p):.4f}\n"
            )
