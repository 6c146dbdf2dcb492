"""Discretized SDE legs: simulate one diffusion copy from a start point to its
first hit of 0, streaming occupation functionals without retaining paths.

Two engines are used.  The unit-diffusion models (rbm, reflbm01) have exact
Gaussian increments; with the bridge correction enabled the hit of 0 is
detected by the within-step Brownian-bridge crossing probability
exp(-2 x_i x_{i+1} / dt), the hit instant is drawn from the exact conditional
first-passage law of the bridge, and the occupation of the first and the hit
step is resolved on a sub-grid from exact conditional bridges (the hit step,
reversed in time, is a Bessel(3) bridge).  Left endpoints classify the
remaining steps.  The sqou model uses full-truncation Euler with threshold
hit detection and a linear within-step crossing time.

Reflection at 1 for reflbm01 is handled in folded coordinates: the leg tracks
the signed distance of the free Brownian path to its nearest even integer, so
a sign change is a sure hit of 0 and the crossing probability keeps the same
form as in the unreflected case.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .models import DiffusionModel

__all__ = ["PathConfig", "LegResult", "run_leg", "default_t_max"]

_SQRT2 = math.sqrt(2.0)
_BLOCK = 1024


@dataclass
class PathConfig:
    """Stepping configuration for one leg.

    ``refine_substeps`` controls the sub-grid used to resolve the occupation
    of the first and the hit step of unit-diffusion legs (0 disables the
    refinement; it is implied off when ``bridge_correction`` is off).
    """

    dt: float
    t_max: float
    bridge_correction: bool = True
    record_path: bool = False
    refine_substeps: int = 64

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_max < self.dt:
            raise ValueError(f"t_max must be >= dt, got {self.t_max} < {self.dt}")


@dataclass
class LegResult:
    """One leg run to the first hit of 0 (or censored at t_max)."""

    x0: float
    hit_time: float
    time_above: float
    time_below: float
    censored: bool
    band_occupations: Optional[list] = None
    path: Optional[np.ndarray] = None


def default_t_max(model: DiffusionModel) -> float:
    """Censoring horizon keeping the censored fraction far below 0.1%."""
    if model.name == "rbm":
        return 50.0 / model.params["mu"] ** 2
    if model.name == "sqou":
        return 50.0 / model.params["gamma"]
    return 50.0


# ---------------------------------------------------------------------------
# exact bridge machinery (unit-diffusion models)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _phi(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True)
def _bridge_hit_cdf(s, a, b, h):
    """P(Brownian bridge a -> b over [0, h] hits 0 by time s), a > 0."""
    if s <= 0.0:
        return 0.0
    if s >= h:
        s = h * (1.0 - 1e-14)
    m = a + (b - a) * s / h
    sig2 = s * (h - s) / h
    sig = math.sqrt(sig2)
    c = 2.0 * a / s
    t1 = _phi(-m / sig)
    loga = -c * m + 0.5 * c * c * sig2
    if loga > 700.0:
        loga = 700.0
    t2 = math.exp(loga) * _phi((m - c * sig2) / sig)
    return t1 + t2


@njit(cache=True)
def _sample_hit_time(u, a, b, h):
    """Inverse-CDF draw of the bridge's first hit of 0, conditioned to hit."""
    if a <= 0.0:
        return 0.0
    if b > 0.0:
        phit = math.exp(-2.0 * a * b / h)
    else:
        phit = 1.0
    target = u * phit
    lo = 0.0
    hi = h
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if _bridge_hit_cdf(mid, a, b, h) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def _hit_step_above(a, tau, level, z3, fold):
    """Occupation above ``level`` of a first-passage path a -> 0 of length tau.

    The time-reversed path is a Bessel(3) bridge from 0 to a, realized as the
    norm of a 3-d Brownian bridge built from the 3*K normals in ``z3``.
    Left-endpoint rule on the K-point sub-grid.
    """
    K = z3.shape[0] // 3
    ds = tau / K
    sq = math.sqrt(ds)
    t1 = 0.0
    t2 = 0.0
    t3 = 0.0
    for j in range(K):
        t1 += z3[3 * j]
        t2 += z3[3 * j + 1]
        t3 += z3[3 * j + 2]
    above = 0
    w1 = 0.0
    w2 = 0.0
    w3 = 0.0
    for j in range(1, K + 1):
        w1 += z3[3 * (j - 1)]
        w2 += z3[3 * (j - 1) + 1]
        w3 += z3[3 * (j - 1) + 2]
        f = j / K
        b1 = sq * (w1 - f * t1) + a * f
        b2 = sq * (w2 - f * t2)
        b3 = sq * (w3 - f * t3)
        r = math.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
        if fold and r > 1.0:
            r = 2.0 - r
        if r > level:
            above += 1
    return ds * above


@njit(cache=True)
def _first_step_above(a, b, h, level, zsub, usub, fold):
    """Occupation above ``level`` of the step bridge a -> b, given no hit of 0.

    Returns -1.0 when the sub-grid realization violates the no-hit
    conditioning (caller resamples); the check uses the same sub-cell crossing
    probabilities as the coarse grid.
    """
    K = zsub.shape[0]
    ds = h / K
    sq = math.sqrt(ds)
    tot = 0.0
    for j in range(K):
        tot += zsub[j]
    above = 0
    w = 0.0
    prev = a
    for j in range(1, K + 1):
        w += zsub[j - 1]
        f = j / K
        val = a + (b - a) * f + sq * (w - f * tot)
        if val <= 0.0 or (fold and val >= 2.0):
            return -1.0
        if usub[j - 1] < math.exp(-2.0 * prev * val / ds):
            return -1.0
        y = prev
        if fold and y > 1.0:
            y = 2.0 - y
        if y > level:
            above += 1
        prev = val
    return ds * above


@njit(cache=True)
def _unit_leg_block(s, level, drift_dt, dt, fold, bcorr, z, u, steps_done,
                    max_steps, path_buf, record):
    """Advance a unit-diffusion leg through one noise block.

    ``s`` is the signed distance of the free path to its reference even line
    (for rbm simply the position).  Interior left endpoints (excluding the
    leg's first step and the hit step) are classified against ``level``.

    Returns (n_used, s_end, interior_above, status, a, b, first_b, hit_step)
    with status 0 = block exhausted, 1 = hit, 2 = censored.
    """
    B = z.shape[0]
    sqdt = math.sqrt(dt)
    above = 0
    first_b = np.nan
    for j in range(B):
        gstep = steps_done + j
        if gstep >= max_steps:
            return j, s, above, 2, 0.0, 0.0, first_b, gstep
        sn = s + drift_dt + sqdt * z[j]
        sgn = 1.0 if s > 0.0 else -1.0
        a = s * sgn
        b = sn * sgn
        if gstep == 0:
            first_b = b
        hit = False
        if b <= 0.0:
            hit = True
        elif bcorr and u[j] < math.exp(-2.0 * a * b / dt):
            hit = True
        if hit:
            return j + 1, sn, above, 1, a, b, first_b, gstep
        if gstep != 0:
            y = a
            if fold and y > 1.0:
                y = 2.0 - y
            if y > level:
                above += 1
        if fold:
            if sn > 1.0:
                sn = sn - 2.0
            elif sn < -1.0:
                sn = sn + 2.0
        s = sn
        if record:
            y = sn if sn > 0.0 else -sn
            if fold and y > 1.0:
                y = 2.0 - y
            path_buf[j] = y
    return B, s, above, 0, 0.0, 0.0, first_b, -1


# ---------------------------------------------------------------------------
# full-truncation Euler (sqrt-diffusion models: sqou legs, CIR runs)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _sqrt_leg_block(x, level, n_dim, rate2, dt, z, steps_done, max_steps,
                    path_buf, record):
    """Full-truncation Euler block for dX = (n - rate2 X) dt + 2 sqrt(X) dW.

    Absorption when the iterate goes <= 0; linear within-step crossing time;
    triangular rule for the final partial-step area.  Returns
    (n_used, x_end, above, area, status, l, r).
    """
    B = z.shape[0]
    sqdt = math.sqrt(dt)
    above = 0
    area = 0.0
    for j in range(B):
        if steps_done + j >= max_steps:
            return j, x, above, area, 2, 0.0, 0.0
        xp = x if x > 0.0 else 0.0
        xn = x + (n_dim - rate2 * xp) * dt + 2.0 * math.sqrt(xp) * sqdt * z[j]
        if xn <= 0.0:
            frac = x / (x - xn) if x > xn else 1.0
            area += xp * dt * frac * 0.5
            return j + 1, xn, above, area, 1, x, xn
        if x > level:
            above += 1
        area += xp * dt
        x = xn
        if record:
            path_buf[j] = x
    return B, x, above, area, 0, 0.0, 0.0


@njit(cache=True)
def _sqrt_fixed_block(x, n_dim, rate2, dt, z):
    """Fixed-length full-truncation Euler run (no absorption stop)."""
    B = z.shape[0]
    sqdt = math.sqrt(dt)
    for j in range(B):
        xp = x if x > 0.0 else 0.0
        x = x + (n_dim - rate2 * xp) * dt + 2.0 * math.sqrt(xp) * sqdt * z[j]
    return x


# ---------------------------------------------------------------------------
# leg drivers
# ---------------------------------------------------------------------------

_MAX_CONDITION_TRIES = 1000


def _run_unit_leg(x0, level, drift, cfg: PathConfig, rng, fold):
    dt = cfg.dt
    bcorr = cfg.bridge_correction
    K = cfg.refine_substeps
    refine = bcorr and K > 0
    max_steps = int(round(cfg.t_max / dt))
    drift_dt = drift * dt
    s = x0
    steps_done = 0
    interior_above = 0
    first_b = np.nan
    hit_info = None
    censored = False
    chunks = [] if cfg.record_path else None
    dummy = np.empty(0)
    while True:
        z = rng.standard_normal(_BLOCK)
        u = rng.random(_BLOCK) if bcorr else z
        buf = np.empty(_BLOCK) if cfg.record_path else dummy
        n_used, s, ab, status, a, b, fb, hstep = _unit_leg_block(
            s, level, drift_dt, dt, fold, bcorr, z, u, steps_done, max_steps,
            buf, cfg.record_path)
        interior_above += ab
        if steps_done == 0 and not np.isnan(fb):
            first_b = fb
        if cfg.record_path:
            take = n_used - 1 if status == 1 else n_used
            if take > 0:
                chunks.append(buf[:take].copy())
        steps_done += n_used
        if status == 1:
            hit_info = (a, b, hstep)
            break
        if status == 2:
            censored = True
            break

    above = dt * interior_above

    def _refined_first_step():
        # step bridge x0 -> first_b conditioned not to hit 0, K-point sub-grid
        for _ in range(_MAX_CONDITION_TRIES):
            zs = rng.standard_normal(K)
            us = rng.random(K)
            occ = _first_step_above(x0, first_b, dt, level, zs, us, fold)
            if occ >= 0.0:
                return occ
        return 0.5 * dt

    if hit_info is not None:
        a, b, hstep = hit_info
        if bcorr:
            tau = _sample_hit_time(rng.random(), a, b, dt)
            H = hstep * dt + tau
            if refine:
                above += _hit_step_above(a, tau, level, rng.standard_normal(3 * K), fold)
            else:
                y = a if (not fold or a <= 1.0) else 2.0 - a
                if y > level:
                    above += tau
            if hstep >= 1:
                if refine:
                    above += _refined_first_step()
                elif x0 > level:
                    above += dt
        else:
            # plain scheme: hit recorded at the step end
            H = (hstep + 1) * dt
            y = a if (not fold or a <= 1.0) else 2.0 - a
            if y > level:
                above += dt
            if hstep >= 1 and x0 > level:
                above += dt
    else:
        H = steps_done * dt
        if steps_done >= 1:
            if refine and not np.isnan(first_b):
                above += _refined_first_step()
            elif x0 > level:
                above += dt

    path = None
    if cfg.record_path:
        head = np.array([x0])
        path = np.concatenate([head] + chunks) if chunks else head
    return H, above, censored, path


def _run_sqrt_leg(x0, level, n_dim, rate2, cfg: PathConfig, rng):
    dt = cfg.dt
    max_steps = int(round(cfg.t_max / dt))
    x = x0
    steps_done = 0
    above = 0
    chunks = [] if cfg.record_path else None
    dummy = np.empty(0)
    while True:
        z = rng.standard_normal(2048)
        buf = np.empty(2048) if cfg.record_path else dummy
        n_used, x, ab, _, status, l, r = _sqrt_leg_block(
            x, level, n_dim, rate2, dt, z, steps_done, max_steps,
            buf, cfg.record_path)
        above += ab
        if cfg.record_path:
            take = n_used - 1 if status == 1 else n_used
            if take > 0:
                chunks.append(buf[:take].copy())
        steps_done += n_used
        if status == 1:
            frac = l / (l - r) if l > r else 1.0
            tau = dt * frac
            H = (steps_done - 1) * dt + tau
            above_t = dt * above + (tau if l > level else 0.0)
            path = None
            if cfg.record_path:
                path = np.concatenate([np.array([x0])] + chunks) if chunks else np.array([x0])
            return H, above_t, False, path
        if status == 2:
            path = None
            if cfg.record_path:
                path = np.concatenate([np.array([x0])] + chunks) if chunks else np.array([x0])
            return cfg.t_max, dt * above, True, path


def run_leg(model: DiffusionModel, x0: float, cfg: PathConfig,
            rng: np.random.Generator) -> LegResult:
    """Simulate one leg of ``model`` from ``x0`` until it hits 0.

    Occupation is classified against the level ``x0`` (strictly above versus
    in (0, x0]).  time_above + time_below = hit_time holds by construction for
    non-censored legs.
    """
    lo, hi = model.interval
    if not (lo <= x0) or (math.isfinite(hi) and x0 > hi):
        raise ValueError(f"x0={x0} outside the model interval {model.interval}")
    if x0 <= 0.0:
        return LegResult(x0=x0, hit_time=0.0, time_above=0.0, time_below=0.0,
                         censored=False,
                         path=np.array([x0]) if cfg.record_path else None)
    if model.name == "rbm":
        H, above, censored, path = _run_unit_leg(
            x0, x0, -model.params["mu"], cfg, rng, fold=False)
    elif model.name == "reflbm01":
        H, above, censored, path = _run_unit_leg(x0, x0, 0.0, cfg, rng, fold=True)
    elif model.name == "sqou":
        n_dim = 2.0 * model.params["nu"] + 2.0
        H, above, censored, path = _run_sqrt_leg(
            x0, x0, n_dim, 2.0 * model.params["gamma"], cfg, rng)
    else:
        raise ValueError(f"no path engine for model {model.name!r}")
    if not math.isfinite(H) or not math.isfinite(above):
        raise RuntimeError(f"non-finite iterate in leg from x0={x0} ({model.name})")
    return LegResult(x0=x0, hit_time=H, time_above=above,
                     time_below=H - above, censored=censored, path=path)
