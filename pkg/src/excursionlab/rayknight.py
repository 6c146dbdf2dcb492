"""Ray-Knight verification for reflecting Brownian motion with drift.

The local-time profile of the straddling excursion is a squared radial OU
(CIR-type) process in the space variable: below the observed level it is
Z^(4, 2mu) started from 0, above it Z^(0, 2mu) continues from the level's
value until absorption.  The identity chain I+ = area of Z^(0, 2mu) =
H_lambda(B^mu) with lambda ~ Exp(2mu) is checked by exact inverse-Gaussian
sampling of the hitting time.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .pathsim import _sqrt_leg_block
from .rng import substream

__all__ = [
    "CirRun",
    "ProfileDraw",
    "simulate_cir",
    "total_local_time_profile",
    "sample_hit_exp_level",
    "local_time_band_estimate",
    "cir_area_samples",
    "profile_samples",
    "hit_exp_level_samples",
]


@dataclass
class CirRun:
    """One squared-radial-OU path summary (space variable plays the time role)."""

    n_dim: float
    mu: float
    z0: float
    dy: float
    zeta: float
    area: float
    end_value: float
    censored: bool
    path: Optional[np.ndarray] = None


@njit(cache=True)
def _fixed_with_area(x, n_dim, rate2, dy, z):
    """One fixed-length block, left-endpoint area rule (full truncation)."""
    sqdt = math.sqrt(dy)
    area = 0.0
    for j in range(z.shape[0]):
        xp = x if x > 0.0 else 0.0
        area += xp * dy
        x = x + (n_dim - rate2 * xp) * dy + 2.0 * math.sqrt(xp) * sqdt * z[j]
    return x, area


def _absorbed_run(z0, n_dim, rate2, dy, y_max, rng, record_path=False):
    """Run to absorption; returns (zeta, area, censored, path)."""
    max_steps = int(round(y_max / dy))
    x = z0
    steps_done = 0
    area = 0.0
    chunks = [] if record_path else None
    dummy = np.empty(0)
    while True:
        z = rng.standard_normal(2048)
        buf = np.empty(2048) if record_path else dummy
        n_used, x, _, ar, status, l, r = _sqrt_leg_block(
            x, math.inf, n_dim, rate2, dy, z, steps_done, max_steps,
            buf, record_path)
        area += ar
        if record_path:
            take = n_used - 1 if status == 1 else n_used
            if take > 0:
                chunks.append(buf[:take].copy())
        steps_done += n_used
        if status != 0:
            path = None
            if record_path:
                path = np.concatenate([np.array([z0])] + chunks) if chunks else np.array([z0])
            if status == 1:
                frac = l / (l - r) if l > r else 1.0
                return (steps_done - 1) * dy + dy * frac, area, False, path
            return y_max, area, True, path


def _fixed_run(z0, n_dim, rate2, length, dy, rng):
    """Fixed-length run; returns (end_value, area)."""
    m = int(round(length / dy))
    x = z0
    area = 0.0
    done = 0
    while done < m:
        b = min(2048, m - done)
        z = rng.standard_normal(b)
        x, a = _fixed_with_area(x, n_dim, rate2, dy, z)
        area += a
        done += b
    return max(x, 0.0), area


def simulate_cir(n_dim: float, mu: float, z0: float, mode: str, dy: float,
                 rng: np.random.Generator, length: Optional[float] = None,
                 y_max: float = 50.0, record_path: bool = False) -> CirRun:
    """Full-truncation Euler run of dZ = (n - 2 mu Z) dy + 2 sqrt(Z) dW.

    ``mode`` is "until_absorbed" (stops at the first iterate <= 0, recording
    the life time zeta and the left-endpoint area) or "fixed_length" (runs for
    ``length`` units without stopping).
    """
    if n_dim < 0 or mu <= 0 or z0 < 0:
        raise ValueError("require n_dim >= 0, mu > 0, z0 >= 0")
    if dy <= 0:
        raise ValueError("dy must be positive")
    if mode == "until_absorbed":
        if z0 == 0.0:
            return CirRun(n_dim, mu, z0, dy, zeta=0.0, area=0.0, end_value=0.0,
                          censored=False,
                          path=np.array([0.0]) if record_path else None)
        zeta, area, censored, path = _absorbed_run(
            z0, n_dim, 2.0 * mu, dy, y_max, rng, record_path)
        if not (math.isfinite(zeta) and math.isfinite(area)):
            raise RuntimeError(f"non-finite iterate in CIR run from z0={z0}")
        return CirRun(n_dim, mu, z0, dy, zeta=zeta, area=area, end_value=0.0,
                      censored=censored, path=path)
    if mode == "fixed_length":
        if length is None or length < 0:
            raise ValueError("fixed_length mode requires length >= 0")
        end, area = _fixed_run(z0, n_dim, 2.0 * mu, length, dy, rng)
        if not math.isfinite(end):
            raise RuntimeError(f"non-finite iterate in CIR run from z0={z0}")
        return CirRun(n_dim, mu, z0, dy, zeta=length, area=area,
                      end_value=end, censored=False)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class ProfileDraw:
    """Total local-time profile of one straddling excursion (RBM with drift).

    ``area_below`` integrates the Z^(4,2mu) piece over (0, X0), which is I-;
    ``area_above`` integrates the absorbed Z^(0,2mu) piece, which is I+.
    """

    x0: float
    l_e_at_x0: float
    h0_l: float
    area_below: float
    area_above: float
    censored: bool


def total_local_time_profile(mu: float, dy: float, rng: np.random.Generator,
                             y_max: float = 50.0) -> ProfileDraw:
    """One draw of (L^e(X0), H0(L)): Z^(4,2mu) from 0 over [0, X0] with
    X0 ~ Exp(2 mu), then Z^(0,2mu) from its end value until absorption."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    x0 = -math.log(rng.random()) / (2.0 * mu)
    rate2 = 2.0 * mu
    l_e, area_below = _fixed_run(0.0, 4.0, rate2, min(x0, y_max), dy, rng)
    if l_e == 0.0:
        return ProfileDraw(x0, 0.0, 0.0, area_below, 0.0, censored=False)
    h0_l, area_above, censored, _ = _absorbed_run(l_e, 0.0, rate2, dy, y_max, rng)
    return ProfileDraw(x0, l_e, h0_l, area_below, area_above, censored)


def sample_hit_exp_level(mu: float, rng: np.random.Generator) -> float:
    """H_lambda(B^mu) with lambda ~ Exp(2 mu): exact inverse-Gaussian draw.

    Given the level c, the hitting time is IG with mean c/mu and shape c^2,
    sampled by the Michael-Schucany-Haas transformation.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    c = -math.log(rng.random()) / (2.0 * mu)
    return _ig_draw(c, mu, rng)


def _ig_draw(c, mu, rng):
    if c <= 0.0:
        return 0.0
    m = c / mu
    lam = c * c
    y = rng.standard_normal() ** 2
    x = (m + 0.5 * m * m * y / lam
         - (0.5 * m / lam) * math.sqrt(4.0 * m * lam * y + (m * y) ** 2))
    if rng.random() <= m / (m + x):
        return x
    return m * m / x


def local_time_band_estimate(path: np.ndarray, dt: float, level: float,
                             eps: float) -> float:
    """Band-occupation estimator of the Lebesgue local time at ``level``.

    Occupation of (level - eps, level + eps) along the recorded grid values,
    divided by the band width 2 eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    vals = np.asarray(path, dtype=float)
    occ = dt * int(np.count_nonzero(np.abs(vals - level) < eps))
    return occ / (2.0 * eps)


# ---------------------------------------------------------------------------
# batch samplers (substream contract: one run per stream index)
# ---------------------------------------------------------------------------

def _cir_area_chunk(mu, dy, seed, start, count, y_max):
    out = np.empty((count, 3))
    for k in range(count):
        rng = substream(seed, start + k)
        z0 = -math.log(rng.random()) / mu
        zeta, area, censored, _ = _absorbed_run(z0, 0.0, 2.0 * mu, dy, y_max, rng)
        out[k] = (zeta, area, 1.0 if censored else 0.0)
    return out


def cir_area_samples(mu: float, dy: float, n: int, seed: int,
                     workers: int = 1, y_max: float = 50.0):
    """(zeta, area) arrays of N runs of Z^(0,2mu) started from Exp(mu)."""
    rows = _parallel(_cir_area_chunk, (mu, dy, seed), n, workers, (y_max,))
    return rows[:, 0], rows[:, 1]


def _profile_chunk(mu, dy, seed, start, count, y_max):
    out = np.empty((count, 5))
    for k in range(count):
        rng = substream(seed, start + k)
        p = total_local_time_profile(mu, dy, rng, y_max)
        out[k] = (p.l_e_at_x0, p.h0_l, p.area_below, p.area_above,
                  1.0 if p.censored else 0.0)
    return out


def profile_samples(mu: float, dy: float, n: int, seed: int,
                    workers: int = 1, y_max: float = 50.0):
    """Arrays (l_e_at_x0, h0_l, area_below, area_above, censored) over N draws."""
    rows = _parallel(_profile_chunk, (mu, dy, seed), n, workers, (y_max,))
    return rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4] > 0.5


def _ig_chunk(mu, seed, start, count):
    out = np.empty(count)
    for k in range(count):
        rng = substream(seed, start + k)
        out[k] = sample_hit_exp_level(mu, rng)
    return out


def hit_exp_level_samples(mu: float, n: int, seed: int, workers: int = 1):
    """N exact draws of H_lambda(B^mu), lambda ~ Exp(2 mu)."""
    return _parallel(_ig_chunk, (mu, seed), n, workers, ())


def _parallel(fn, head_args, n, workers, tail_args):
    if workers <= 1:
        return fn(*head_args, 0, n, *tail_args)
    bounds = np.linspace(0, n, workers + 1).astype(int)
    jobs = [(b, e - b) for b, e in zip(bounds[:-1], bounds[1:]) if e > b]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(fn, *head_args, s, c, *tail_args) for s, c in jobs]
        return np.concatenate([f.result() for f in futs])
