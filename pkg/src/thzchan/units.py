"""Physical constants and dB/linear conversion helpers shared across the toolkit."""

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s

# Measurement-grid defaults for a 13 GHz sweep at 140 GHz (100 ns excess-delay window).
DEFAULT_CARRIER_HZ = 140e9
DEFAULT_DELAY_BIN_S = 1.0 / 13e9      # 76.923 ps
DEFAULT_N_DELAY_BINS = 1301
DEFAULT_N_AZIMUTH_BINS = 36           # 10 degree steps
DEFAULT_NOISE_FLOOR_DBM = -160.0
DEFAULT_MPC_THRESHOLD_DBM = -140.0
DEFAULT_TX_POWER_W = 1e-3


def db(x):
    """Power ratio to dB."""
    return 10.0 * np.log10(x)


def from_db(x_db):
    """dB to linear power ratio."""
    return 10.0 ** (np.asarray(x_db) / 10.0)


def watts_to_dbm(p_w):
    """Linear watts to dB-milliwatts. Zero or negative input is not handled here."""
    return 10.0 * np.log10(np.asarray(p_w) * 1e3)


def dbm_to_watts(p_dbm):
    return 10.0 ** (np.asarray(p_dbm) / 10.0) * 1e-3


def wrap_azimuth(theta):
    """Wrap angle(s) to [0, 2*pi)."""
    return np.mod(theta, 2.0 * np.pi)


def wrap_pi(theta):
    """Wrap angle(s) to (-pi, pi]."""
    return -np.mod(-np.asarray(theta) + np.pi, 2.0 * np.pi) + np.pi
