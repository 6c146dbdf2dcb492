"""Excursion-bridge laboratory: Bessel(3) bridges, uniform splits and the
Vervaat transform.

A Bessel(3) bridge of length l (the Brownian excursion bridge) is realized as
the norm of three independent Brownian bridges on the time grid; each Brownian
bridge comes from a cumulative random walk with its endpoint projected out,
which has exactly the bridge law on the grid.  The occupation split at an
independent uniform time U uses the grid value at the cell containing U, so
the Vervaat transform (a cyclic shift of grid cells) reproduces the occupation
pair exactly path by path.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .rng import substream

__all__ = [
    "BridgeSample",
    "sample_bessel3_bridge",
    "bridge_occupation",
    "vervaat",
    "time_above_zero",
    "brownian_bridge_occupation",
    "bessel3_occupation_samples",
    "Bessel3Batch",
]


@dataclass
class BridgeSample:
    """Discretized excursion bridge of length l with an optional uniform split."""

    length: float
    dt: float
    values: np.ndarray
    u: Optional[float] = None
    i_l_plus: Optional[float] = None
    i_l_minus: Optional[float] = None

    @property
    def n_cells(self) -> int:
        return self.values.size - 1


def _brownian_bridge_grid(l: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Standard Brownian bridge 0 -> 0 of length l on n cells (n+1 points)."""
    z = rng.standard_normal(n)
    w = np.cumsum(z) * math.sqrt(l / n)
    out = np.empty(n + 1)
    out[0] = 0.0
    out[1:] = w - (np.arange(1, n + 1) / n) * w[-1]
    out[n] = 0.0
    return out


def sample_bessel3_bridge(l: float, dt: float,
                          rng: np.random.Generator) -> BridgeSample:
    """Bessel(3) bridge of length l on a dt-grid (norm of three Brownian bridges)."""
    if l <= 0:
        raise ValueError("l must be positive")
    if not dt < l / 10:
        raise ValueError(f"dt must be < l/10, got dt={dt}, l={l}")
    n = int(round(l / dt))
    b1 = _brownian_bridge_grid(l, n, rng)
    b2 = _brownian_bridge_grid(l, n, rng)
    b3 = _brownian_bridge_grid(l, n, rng)
    values = np.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
    return BridgeSample(length=l, dt=l / n, values=values)


def bridge_occupation(bridge: BridgeSample,
                      rng: np.random.Generator) -> Tuple[float, float, float]:
    """Split the bridge at an independent uniform time U.

    The reference level is the grid value at the cell containing U; cells
    strictly above the level count into i_l_plus, cells at or below it into
    i_l_minus, so the two occupations sum to l exactly.
    """
    n = bridge.n_cells
    u = rng.random() * bridge.length
    j = min(int(u / bridge.dt), n - 1)
    level = bridge.values[j]
    above = int(np.count_nonzero(bridge.values[:n] > level))
    i_plus = bridge.dt * above
    i_minus = bridge.length - i_plus
    bridge.u = u
    bridge.i_l_plus = i_plus
    bridge.i_l_minus = i_minus
    return u, i_plus, i_minus


def vervaat(bridge: BridgeSample, u: float) -> np.ndarray:
    """Vervaat transform: re-root the bridge at time u (snapped to its grid cell).

    output(t) = value(t+u) - value(u) for t+u <= l, else value(t+u-l) - value(u).
    With a Bessel(3) bridge input and uniform u the output is a Brownian
    bridge in law; u = l returns the input path unchanged.
    """
    if not (0.0 < u <= bridge.length):
        raise ValueError(f"u must be in (0, l], got {u}")
    n = bridge.n_cells
    j = min(int(u / bridge.dt), n)
    vals = bridge.values
    out = np.empty(n + 1)
    out[: n + 1 - j] = vals[j:] - vals[j]
    if j >= 1:
        out[n + 1 - j:] = vals[1: j + 1] - vals[j]
    return out


def time_above_zero(values: np.ndarray, dt: float) -> float:
    """Left-endpoint occupation of {path > 0} on the grid."""
    return dt * int(np.count_nonzero(values[:-1] > 0.0))


def _bb_occupation_chunk(l, dt, seed, start, count):
    n = int(round(l / dt))
    out = np.empty(count)
    for k in range(count):
        rng = substream(seed, start + k)
        b = _brownian_bridge_grid(l, n, rng)
        out[k] = time_above_zero(b, l / n)
    return out


def brownian_bridge_occupation(l: float, dt: float, n_paths: int, seed: int,
                               workers: int = 1) -> np.ndarray:
    """Occupation times of {path > 0} for independent Brownian bridges.

    By Levy's result the occupation is uniform on (0, l).
    """
    args = (l, dt, seed)
    if workers <= 1:
        return _bb_occupation_chunk(*args, 0, n_paths)
    bounds = np.linspace(0, n_paths, workers + 1).astype(int)
    jobs = [(b, e - b) for b, e in zip(bounds[:-1], bounds[1:]) if e > b]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(_bb_occupation_chunk, *args, s, c) for s, c in jobs]
        return np.concatenate([f.result() for f in futs])


@dataclass
class Bessel3Batch:
    i_l_plus: np.ndarray
    i_l_minus: np.ndarray
    u: np.ndarray
    vervaat_equal: np.ndarray
    mid_values: np.ndarray


def _bessel3_chunk(l, dt, seed, start, count):
    out = np.empty((count, 5))
    for k in range(count):
        rng = substream(seed, start + k)
        br = sample_bessel3_bridge(l, dt, rng)
        u, ip, im = bridge_occupation(br, rng)
        shifted = vervaat(br, u)
        ip_verv = time_above_zero(shifted, br.dt)
        out[k] = (ip, im, u, 1.0 if ip_verv == ip else 0.0,
                  br.values[br.n_cells // 2])
    return out


def bessel3_occupation_samples(l: float, dt: float, n_paths: int, seed: int,
                               workers: int = 1) -> Bessel3Batch:
    """Occupation splits of N Bessel(3) bridges plus the Vervaat cross-check.

    ``vervaat_equal`` records, per path, whether the positive occupation of
    the Vervaat image equals i_l_plus exactly (it must: the transform merely
    permutes grid cells).
    """
    args = (l, dt, seed)
    if workers <= 1:
        rows = _bessel3_chunk(*args, 0, n_paths)
    else:
        bounds = np.linspace(0, n_paths, workers + 1).astype(int)
        jobs = [(b, e - b) for b, e in zip(bounds[:-1], bounds[1:]) if e > b]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_bessel3_chunk, *args, s, c) for s, c in jobs]
            rows = np.concatenate([f.result() for f in futs])
    return Bessel3Batch(i_l_plus=rows[:, 0], i_l_minus=rows[:, 1], u=rows[:, 2],
                        vervaat_equal=rows[:, 3] > 0.5, mid_values=rows[:, 4])
