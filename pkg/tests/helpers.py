"""Shared test utilities: statistics oracles and scene fixtures."""

from __future__ import annotations

import math

import numpy as np

from thzchan.raytrace import RoomScene

# Meeting-room validation deployment: two transmitter spots (corner AP and
# mid-wall AP) with receivers spread over the room, mirroring a two-set
# measurement campaign in a 10.15 m x 7.9 m room.
ROOM_L, ROOM_W = 10.15, 7.9
VALIDATION_TX = [(1.0, 1.0), (5.0, 1.0)]
VALIDATION_RX = [
    (2.5, 2.0), (4.0, 3.0), (6.0, 2.5), (8.0, 3.5), (3.0, 5.0), (5.0, 6.0),
    (7.0, 5.5), (9.0, 6.5), (2.0, 6.5), (6.5, 7.0), (8.5, 1.5), (4.5, 1.2),
]


def validation_scenes(permittivity: float = 6.4) -> list[RoomScene]:
    return [
        RoomScene(ROOM_L, ROOM_W, tx, rx, wall_permittivity=permittivity)
        for tx in VALIDATION_TX
        for rx in VALIDATION_RX
    ]


def random_scene(rng: np.random.Generator, d_min: float = 0.8,
                 d_max: float = math.inf) -> RoomScene:
    """Random shoebox scene with terminals kept off the walls."""
    length = rng.uniform(4.0, 12.0)
    width = rng.uniform(3.0, 10.0)
    while True:
        tx = (rng.uniform(0.4, length - 0.4), rng.uniform(0.4, width - 0.4))
        rx = (rng.uniform(0.4, length - 0.4), rng.uniform(0.4, width - 0.4))
        if d_min <= math.dist(tx, rx) <= d_max:
            return RoomScene(length, width, tx, rx)


def meeting_room_scene(rng: np.random.Generator, tx=(1.0, 1.0),
                       d_min: float = 1.4, d_max: float = 7.2) -> RoomScene:
    """Meeting-room scene with a random Rx in the surveyed distance range."""
    while True:
        rx = (rng.uniform(0.4, ROOM_L - 0.4), rng.uniform(0.4, ROOM_W - 0.4))
        if d_min <= math.dist(tx, rx) <= d_max:
            return RoomScene(ROOM_L, ROOM_W, tx, rx)


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Adjusted Rand index between two labelings (any hashable labels)."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    n = a.size
    cats_a = {v: i for i, v in enumerate(np.unique(a))}
    cats_b = {v: i for i, v in enumerate(np.unique(b))}
    table = np.zeros((len(cats_a), len(cats_b)), dtype=np.int64)
    for x, y in zip(a, b):
        table[cats_a[x], cats_b[y]] += 1

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_cells = comb2(table).sum()
    sum_rows = comb2(table.sum(axis=1)).sum()
    sum_cols = comb2(table.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_rows * sum_cols / total
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def kuiper_uniform_pvalue_bound(samples_unit: np.ndarray) -> float:
    """Kuiper test statistic significance for H0: uniform on [0, 1).

    Returns the asymptotic normalized statistic; H0 is rejected at
    alpha = 0.01 when it exceeds 2.001.
    """
    x = np.sort(np.asarray(samples_unit))
    n = x.size
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - x)
    d_minus = np.max(x - (i - 1) / n)
    v = d_plus + d_minus
    return float(v * (math.sqrt(n) + 0.155 + 0.24 / math.sqrt(n)))


KUIPER_CRIT_01 = 2.001  # asymptotic critical value at alpha = 0.01
