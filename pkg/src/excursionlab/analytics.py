"""Closed-form oracles and analytic identities.

Joint Laplace transforms and densities of the registry models, the class-K
integral characterization, Levy-measure relations of the inverse local time,
the discrete spectral mixture of the squared-radial-OU model, and the
null-recurrent reflecting-BM formula.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import special

from .models import (DiffusionModel, lt_joint_from_green, make_model,
                     rbm_d0_density, sqou_d0_density)

__all__ = [
    "JointLT",
    "SpectralMixture",
    "adaptive_simpson",
    "integrate_half_line",
    "lt_rbm",
    "joint_density_rbm",
    "lt_reflbm01_d0",
    "density_d0_sqou",
    "sqou_d0_cdf",
    "numeric_cdf_from_density",
    "class_k_residual",
    "density_from_sum",
    "levy_tail",
    "v_density",
    "sqou_spectral",
    "mixture_density",
    "mixture_v_density",
    "recurrence_test",
    "lt_null_reflbm",
    "joint_lt_rbm",
    "joint_lt_from_green",
    "joint_lt_iid_exp",
    "joint_lt_comonotone_exp",
]


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _simpson(f, a, fa, b, fb, m, fm):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(f, a, fa, m, fm, lm, flm)
    right = _simpson(f, m, fm, b, fb, rm, frm)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + _adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1))


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature with absolute tolerance ``tol``."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(f, a, fa, b, fb, m, fm)
    return _adaptive(f, a, fa, b, fb, m, fm, whole, tol, max_depth)


def _sqrt_head(f: Callable[[float], float]) -> Callable[[float], float]:
    """Integrand of int f(t) dt under t = s^2; the s = 0 endpoint is evaluated
    just inside the domain, where an inverse-sqrt singularity of f is already
    cancelled by the 2s factor."""
    def g(s):
        if s <= 0.0:
            s = 1e-8
        return 2.0 * s * f(s * s)
    return g


def integrate_half_line(f: Callable[[float], float], tol: float = 1e-10) -> float:
    """Integral of f over (0, inf) for integrands with at worst an inverse-
    square-root singularity at 0 and (super)exponential decay.

    The head (0, 1] is integrated under the substitution t = s^2, which
    removes the singularity; the tail [1, inf) is mapped to [1/2, 1) by
    t = u/(1-u).
    """
    head = adaptive_simpson(_sqrt_head(f), 0.0, 1.0, tol)

    def mapped(u):
        if u >= 1.0:
            return 0.0
        return f(u / (1.0 - u)) / (1.0 - u) ** 2

    tail = adaptive_simpson(mapped, 0.5, 1.0, tol)
    return head + tail


# ---------------------------------------------------------------------------
# joint Laplace transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointLT:
    """Joint Laplace transform of a nonnegative pair, with its diagonal.

    ``eval(alpha, beta)`` is E exp(-alpha xi1 - beta xi2); ``diag(gamma)`` is
    the transform of the sum, E exp(-gamma (xi1 + xi2)).
    """

    eval: Callable[[float, float], float]
    diag: Callable[[float], float]


def lt_rbm(mu: float, alpha: float, beta: float) -> float:
    """Joint transform of (I+, I-) for reflecting BM with drift -mu:
    2 mu / (sqrt(2 alpha + mu^2) + sqrt(2 beta + mu^2))."""
    return 2.0 * mu / (math.sqrt(2.0 * alpha + mu * mu)
                       + math.sqrt(2.0 * beta + mu * mu))


def joint_lt_rbm(mu: float) -> JointLT:
    return JointLT(eval=lambda a, b: lt_rbm(mu, a, b),
                   diag=lambda g: mu / math.sqrt(2.0 * g + mu * mu))


def joint_lt_from_green(model: DiffusionModel) -> JointLT:
    return JointLT(eval=lambda a, b: lt_joint_from_green(model, a, b),
                   diag=lambda g: lt_joint_from_green(model, g, g))


def joint_lt_iid_exp(rate: float = 1.0) -> JointLT:
    """Transform of two i.i.d. exponentials (a class-K pair)."""
    return JointLT(eval=lambda a, b: rate * rate / ((rate + a) * (rate + b)),
                   diag=lambda g: (rate / (rate + g)) ** 2)


def joint_lt_comonotone_exp(rate: float = 1.0) -> JointLT:
    """Transform of (xi, xi) with xi exponential (not class K)."""
    return JointLT(eval=lambda a, b: rate / (rate + a + b),
                   diag=lambda g: rate / (rate + 2.0 * g))


def class_k_residual(lt: JointLT, alpha: float, beta: float,
                     tol: float = 1e-10) -> float:
    """Residual of the class-K characterization at (alpha, beta):

        | lt(alpha, beta) - (alpha - beta)^-1 int_beta^alpha diag(g) dg |

    Zero (up to quadrature) exactly for class-K pairs.
    """
    if alpha < 0 or beta < 0:
        raise ValueError("transform arguments must be >= 0")
    if alpha == beta:
        raise ValueError("class_k_residual requires alpha != beta")
    integral = adaptive_simpson(lt.diag, beta, alpha, tol)
    return abs(lt.eval(alpha, beta) - integral / (alpha - beta))


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def joint_density_rbm(mu: float, t, s):
    """Joint density of (d0, -g0) for RBM with drift -mu:
    mu (2 pi (t+s)^3)^(-1/2) exp(-mu^2 (t+s)/2); a function of t+s only."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    w = t + s
    if np.any(w <= 0):
        raise ValueError("joint_density_rbm requires t + s > 0")
    return mu / np.sqrt(2.0 * np.pi * w ** 3) * np.exp(-0.5 * mu * mu * w)


def lt_reflbm01_d0(alpha: float) -> float:
    """E exp(-alpha d0) for Brownian motion reflected at 0 and 1:
    tanh(sqrt(2 alpha)) / sqrt(2 alpha)."""
    if alpha == 0:
        return 1.0
    u = math.sqrt(2.0 * alpha)
    return math.tanh(u) / u


def density_d0_sqou(gamma: float, nu: float, t):
    """Density of d0 for the squared radial OU model (closed form)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("density_d0_sqou requires t > 0")
    return sqou_d0_density(gamma, nu, t)


def sqou_d0_cdf(gamma: float, nu: float, t):
    """CDF of d0 for the squared radial OU model: the density integrates in
    closed form to 1 - I_{exp(-2 gamma t)}(-nu, 1 + nu) (regularized beta)."""
    t = np.asarray(t, dtype=float)
    return 1.0 - special.betainc(-nu, 1.0 + nu, np.exp(-2.0 * gamma * t))


def numeric_cdf_from_density(density: Callable, grid: np.ndarray) -> np.ndarray:
    """Cumulative quadrature of ``density`` on ``grid`` (grid[0] may be > 0;
    the head (0, grid[0]] is handled with a square-root substitution)."""
    grid = np.asarray(grid, dtype=float)
    out = np.empty(grid.size)
    acc = adaptive_simpson(_sqrt_head(density), 0.0, math.sqrt(grid[0]), 1e-10)
    out[0] = acc
    for i in range(1, grid.size):
        acc += adaptive_simpson(density, grid[i - 1], grid[i], 1e-10)
        out[i] = acc
    return out


def density_from_sum(p: Callable, x: float, y: float) -> float:
    """Class-K joint density from the sum density: p(x + y) / (x + y)."""
    return p(x + y) / (x + y)


# ---------------------------------------------------------------------------
# Levy-measure relations
# ---------------------------------------------------------------------------

def levy_tail(model: DiffusionModel, t):
    """Tail n+(t, inf) of the Levy measure of the inverse local time at 0.

    The global formula P(d0 in dt) = n+(t, inf)/M dt gives
    n+(t, inf) = M * f_d0(t); requires a model with a closed-form d0 density.
    """
    if model.d0_density is None:
        raise ValueError(f"model {model.name!r} has no closed-form d0 density")
    return model.total_mass * model.d0_density(t)


def v_density(model: DiffusionModel, v):
    """Density of V = d0 - g0: v * nu(v) / M with nu the Levy density.

    For rbm the tail derivative is analytic (nu(v) = e^{-mu^2 v/2} /
    sqrt(2 pi v^3)); for sqou it is a central difference of the tail with
    relative step 1e-6.
    """
    v = np.asarray(v, dtype=float)
    if model.name == "rbm":
        mu = model.params["mu"]
        return mu * np.exp(-0.5 * mu * mu * v) / np.sqrt(2.0 * np.pi * v)
    if model.d0_density is None:
        raise ValueError(f"model {model.name!r} has no closed-form d0 density")
    h = 1e-6 * v
    tail_hi = levy_tail(model, v + h)
    tail_lo = levy_tail(model, v - h)
    return v * (-(tail_hi - tail_lo) / (2.0 * h)) / model.total_mass


# ---------------------------------------------------------------------------
# spectral mixture (Krein measure) for the squared radial OU model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralMixture:
    """Discrete mixing measure (z_k, w_k), z_k strictly increasing.

    When ``normalized`` the weights sum to 1 and the mixture represents the
    normalized measure whose exponential mixture is the d0 density.
    ``lumped_tail`` records the analytically known mass beyond the truncation
    that was folded into the terminal atom.
    """

    rates: np.ndarray
    weights: np.ndarray
    normalized: bool
    lumped_tail: float = 0.0

    def __post_init__(self):
        if self.rates.size == 0:
            raise ValueError("no atoms")
        if np.any(np.diff(self.rates) <= 0):
            raise ValueError("rates must be strictly increasing")


def sqou_spectral(gamma: float, nu: float, truncation: int = 200,
                  max_lumped_tail: float = 0.05) -> SpectralMixture:
    """Normalized spectral mixture of the squared radial OU model.

    Binomial expansion of the d0 density gives atoms at z_k = 2 gamma (k - nu)
    with weights proportional to (-1)^k binom(nu, k) / z_k; the weights sum to
    1 exactly in the limit, and the remainder beyond the truncation (which
    decays only like K^(-1/2)) is folded into the last atom.  At any t > 0 the
    folded mass contributes O(e^{-z_K t}), far below the shipped tolerances.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    c = 2.0 * gamma / (special.gamma(-nu) * special.gamma(1.0 + nu))
    k = np.arange(truncation + 1)
    rates = 2.0 * gamma * (k - nu)
    coef = np.empty(truncation + 1)
    coef[0] = 1.0
    for j in range(1, truncation + 1):
        coef[j] = coef[j - 1] * (j - 1 - nu) / j  # (-1)^j binom(nu, j) > 0
    weights = c * coef / rates
    resid = 1.0 - weights.sum()
    if resid > max_lumped_tail:
        raise ValueError(
            f"non-convergent truncation: tail weight {resid:.3g} at K={truncation}")
    weights = weights.copy()
    weights[-1] += resid
    return SpectralMixture(rates=rates, weights=weights, normalized=True,
                           lumped_tail=float(max(resid, 0.0)))


def mixture_density(mix: SpectralMixture, t):
    """Exponential-mixture density sum_k w_k z_k exp(-z_k t)."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.multiply.outer(t, mix.rates))
    out = e @ (mix.weights * mix.rates)
    return float(out) if out.ndim == 0 else out


def mixture_v_density(mix: SpectralMixture, v):
    """Gamma-mixture density of V: sum_k w_k z_k^2 v exp(-z_k v)."""
    v = float(v)
    return float((mix.weights * mix.rates ** 2 * v * np.exp(-mix.rates * v)).sum())


def recurrence_test(mix: SpectralMixture, exact_total: bool = None,
                    tol: float = 1e-8) -> bool:
    """Positive-recurrence test: does sum_k w_k / z_k^2 converge (tail < tol)?

    The mixture atoms are read as the unnormalized spectral measure.  With
    ``exact_total`` (implied by a normalized/lumped construction) the atoms
    carry the full mass and the unrepresented tail is zero.  Otherwise the
    tail beyond the truncation is bounded by a power-law fit of the last
    decade of terms; sub-harmonic decay (exponent <= 1) means the partial
    sums grow without bound and the test fails.
    """
    if exact_total is None:
        exact_total = mix.normalized or mix.lumped_tail > 0.0
    z = mix.rates
    terms = mix.weights / z ** 2
    if exact_total:
        return True
    if z.size < 4:
        return bool(terms[-1] < tol)
    m = max(z.size // 2, z.size - 50)
    slope = np.polyfit(np.log(z[m:]), np.log(np.maximum(terms[m:], 1e-300)), 1)[0]
    p = -slope
    if p <= 1.0 + 1e-9:
        return False
    tail_bound = terms[-1] * z[-1] / (z[-1] - z[-2]) / (p - 1.0)
    return bool(tail_bound < tol)


# ---------------------------------------------------------------------------
# null-recurrent reflecting Brownian motion
# ---------------------------------------------------------------------------

def lt_null_reflbm(alpha: float, beta: float) -> float:
    """Speed-measure-weighted transform for null-recurrent reflecting BM:
    sqrt(2) / (sqrt(alpha) + sqrt(beta)); alpha = beta = 0 rejected."""
    if alpha < 0 or beta < 0:
        raise ValueError("transform arguments must be >= 0")
    if alpha == 0 and beta == 0:
        raise ValueError("alpha and beta cannot both be 0")
    return math.sqrt(2.0) / (math.sqrt(alpha) + math.sqrt(beta))
