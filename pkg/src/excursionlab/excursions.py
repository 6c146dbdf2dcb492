"""Straddling excursions of the stationary diffusion.

The stationary process is built from two independent copies started from the
common stationary draw X0: the forward copy gives d0, the (reversed) backward
copy gives -g0, and the occupation times I+ / I- above and below the observed
level accumulate over both legs.  The backward leg is simulated forward with
the same dynamics, which is valid by reversibility of the stationary state.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .models import DiffusionModel, make_model, stationary_sample
from .pathsim import PathConfig, run_leg
from .rng import substream
from .stats import ks_one_sample

__all__ = [
    "StraddlingExcursion",
    "IdentitySamples",
    "sample_straddling",
    "identity_samples",
    "conditional_uniformity",
    "UniformityBin",
    "independence_check",
]


@dataclass
class StraddlingExcursion:
    """One excursion straddling time 0, with its occupation pair."""

    x0: float
    g0: float
    d0: float
    v: float
    i_plus: float
    i_minus: float
    censored: bool


@dataclass
class IdentitySamples:
    """Column-aligned samples of (-g0, d0, I+, I-) over N excursions."""

    minus_g0: np.ndarray
    d0: np.ndarray
    i_plus: np.ndarray
    i_minus: np.ndarray
    x0: np.ndarray
    censored: np.ndarray

    @property
    def v(self) -> np.ndarray:
        return self.minus_g0 + self.d0

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())

    def valid(self) -> "IdentitySamples":
        """Drop censored excursions (their count is reported separately)."""
        m = ~self.censored
        return IdentitySamples(self.minus_g0[m], self.d0[m], self.i_plus[m],
                               self.i_minus[m], self.x0[m], self.censored[m])


def sample_straddling(model: DiffusionModel, cfg: PathConfig,
                      rng_forward: np.random.Generator,
                      rng_backward: Optional[np.random.Generator] = None
                      ) -> StraddlingExcursion:
    """Sample the excursion straddling time 0.

    X0 is drawn from the stationary law out of ``rng_forward``; the two legs
    then consume ``rng_forward`` and ``rng_backward`` (the forward stream is
    reused when no backward stream is given).
    """
    if rng_backward is None:
        rng_backward = rng_forward
    x0 = stationary_sample(model, rng_forward)
    fwd = run_leg(model, x0, cfg, rng_forward)
    bwd = run_leg(model, x0, cfg, rng_backward)
    i_plus = fwd.time_above + bwd.time_above
    v = fwd.hit_time + bwd.hit_time
    return StraddlingExcursion(
        x0=x0, g0=-bwd.hit_time, d0=fwd.hit_time, v=v,
        i_plus=i_plus, i_minus=v - i_plus,
        censored=fwd.censored or bwd.censored)


def _identity_chunk(model_name: str, params: tuple, dt: float, t_max: float,
                    bridge_correction: bool, refine_substeps: int, seed: int,
                    start: int, count: int, base_index: int):
    """Simulate excursions [start, start+count); pure function of its arguments."""
    model = make_model(model_name, params)
    cfg = PathConfig(dt=dt, t_max=t_max, bridge_correction=bridge_correction,
                     refine_substeps=refine_substeps)
    out = np.empty((count, 6))
    for k in range(count):
        i = start + k
        r_fwd = substream(seed, base_index + 2 * i)
        r_bwd = substream(seed, base_index + 2 * i + 1)
        e = sample_straddling(model, cfg, r_fwd, r_bwd)
        out[k] = (-e.g0, e.d0, e.i_plus, e.i_minus, e.x0, 1.0 if e.censored else 0.0)
    return out


def identity_samples(model: DiffusionModel, cfg: PathConfig, n: int, seed: int,
                     workers: int = 1, base_index: int = 0) -> IdentitySamples:
    """N independent straddling excursions, columns aligned by excursion.

    Excursion ``i`` consumes the two substreams (base_index + 2i,
    base_index + 2i + 1) of ``seed``; the result is bitwise independent of
    ``workers``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    args = (model.name, tuple(model.params.values()), cfg.dt, cfg.t_max,
            cfg.bridge_correction, cfg.refine_substeps, seed)
    if workers <= 1:
        rows = _identity_chunk(*args, 0, n, base_index)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        jobs = [(b, e - b) for b, e in zip(bounds[:-1], bounds[1:]) if e > b]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_identity_chunk, *args, s, c, base_index)
                    for s, c in jobs]
            rows = np.concatenate([f.result() for f in futs])
    return IdentitySamples(
        minus_g0=rows[:, 0], d0=rows[:, 1], i_plus=rows[:, 2],
        i_minus=rows[:, 3], x0=rows[:, 4], censored=rows[:, 5] > 0.5)


@dataclass
class UniformityBin:
    bin: int
    ks: Optional[float]
    count: int
    v_hi: float
    excluded: bool = False


def conditional_uniformity(i_plus, v, bins: int = 10,
                           min_count: int = 100) -> List[UniformityBin]:
    """Per-bin KS of I+/V against uniform(0,1), V binned by empirical quantiles.

    Bins with fewer than ``min_count`` pairs are reported as excluded.
    """
    i_plus = np.asarray(i_plus, dtype=float)
    v = np.asarray(v, dtype=float)
    if i_plus.shape != v.shape or i_plus.size == 0:
        raise ValueError("i_plus and v must be nonempty and aligned")
    edges = np.quantile(v, np.linspace(0.0, 1.0, bins + 1))
    out = []
    for b in range(bins):
        if b == 0:
            mask = v <= edges[1]
        else:
            mask = (v > edges[b]) & (v <= edges[b + 1])
        cnt = int(mask.sum())
        if cnt < min_count:
            out.append(UniformityBin(b, None, cnt, float(edges[b + 1]), True))
            continue
        ratio = i_plus[mask] / v[mask]
        d = ks_one_sample(ratio, lambda x: np.clip(x, 0.0, 1.0))
        out.append(UniformityBin(b, d, cnt, float(edges[b + 1])))
    return out


@dataclass
class IndependenceResult:
    p_joint: float
    p_product: float
    p_xs_above: float
    p_d0_gt_s: float
    se_joint: float
    se_product: float
    n: int


def independence_check(model: DiffusionModel, cfg: PathConfig, s: float,
                       n: int, seed: int) -> IndependenceResult:
    """Empirical check that {X_s > X_0} and {d_0 > s} are independent.

    Runs the reflected dynamics forward to the fixed horizon ``s`` (lockstep
    over all paths, threshold hit detection) so that X_s is observable whether
    or not the excursion has ended.  P(X_s > X_0) = 1/2 by reversibility.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    rng = substream(seed, 0)
    x0 = stationary_sample(model, rng, size=n)
    x = x0.copy()
    alive = np.ones(n, dtype=bool)  # no hit of 0 so far
    steps = int(round(s / cfg.dt))
    sqdt = math.sqrt(cfg.dt)
    name = model.name
    if name == "sqou":
        gamma = model.params["gamma"]
        n_dim = 2.0 * model.params["nu"] + 2.0
    else:
        mu = model.params.get("mu", 0.0)
    for _ in range(steps):
        z = rng.standard_normal(n)
        if name == "sqou":
            xp = np.maximum(x, 0.0)
            x = x + (n_dim - 2.0 * gamma * xp) * cfg.dt + 2.0 * np.sqrt(xp) * sqdt * z
            alive &= x > 0.0
            x = np.maximum(x, 0.0)
        else:
            x = x - mu * cfg.dt + sqdt * z
            alive &= x > 0.0
            x = np.abs(x)
            if name == "reflbm01":
                over = x > 1.0
                x[over] = 2.0 - x[over]
    above = x > x0
    joint = above & alive
    p_joint = float(joint.mean())
    p_above = float(above.mean())
    p_alive = float(alive.mean())
    p_prod = p_above * p_alive
    se_joint = math.sqrt(max(p_joint * (1 - p_joint), 1e-300) / n)
    se_prod = math.sqrt(max(p_above * (1 - p_above) * p_alive**2
                            + p_alive * (1 - p_alive) * p_above**2, 1e-300) / n)
    return IndependenceResult(p_joint=p_joint, p_product=p_prod,
                              p_xs_above=p_above, p_d0_gt_s=p_alive,
                              se_joint=se_joint, se_product=se_prod, n=n)
