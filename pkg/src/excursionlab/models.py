"""Registry of concrete stationary diffusions and their analytic ingredients.

Three positively recurrent models are shipped:

* ``rbm``       -- reflecting Brownian motion on [0, inf) with drift -mu < 0,
* ``reflbm01``  -- Brownian motion on [0, 1] reflected at both endpoints,
* ``sqou``      -- squared radial Ornstein-Uhlenbeck process on [0, inf) with
                   parameters gamma > 0 and -1 < nu < 0 (dimension n = 2 nu + 2).

Each model carries its scale derivative S', speed density m, total speed mass
M, the resolvent value G_alpha(0, 0), the stationary quantile function (the
normalized speed measure is the stationary law) and, where available in closed
form, the density of the excursion end time d0 seen from a stationary instant.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

__all__ = [
    "DiffusionModel",
    "make_model",
    "green00",
    "stationary_sample",
    "lt_joint_from_green",
    "rbm_d0_density",
    "sqou_d0_density",
]

MODEL_NAMES = ("rbm", "reflbm01", "sqou")

# relative step for the diagonal derivative of 1/G (second-order central diff)
_DIAG_REL_STEP = 1e-5
# below this sqrt(2 alpha), coth is evaluated by series to avoid cancellation
_COTH_SERIES_CUT = 1e-4


@dataclass(frozen=True)
class DiffusionModel:
    """One positively recurrent diffusion with its analytic ingredients."""

    name: str
    params: dict
    interval: tuple
    drift: Callable[[float], float]
    diffusion_coeff: Callable[[float], float]
    scale_deriv: Callable[[float], float]
    speed_density: Callable[[float], float]
    total_mass: float
    stationary_quantile: Callable[[float], float]
    d0_density: Optional[Callable] = None
    _green00: Callable[[float], float] = field(default=None, repr=False)

    def green(self, alpha: float) -> float:
        return green00(self, alpha)


def rbm_d0_density(mu: float, t):
    """Density of d0 for reflecting BM with drift -mu, from a stationary start.

    Obtained by integrating the joint density of (-g0, d0), which depends on
    its arguments only through their sum:

        f_d0(t) = mu * sqrt(2/(pi t)) * exp(-mu^2 t / 2) - mu^2 * erfc(mu sqrt(t/2))
    """
    t = np.asarray(t, dtype=float)
    return (mu * np.sqrt(2.0 / (np.pi * t)) * np.exp(-0.5 * mu * mu * t)
            - mu * mu * special.erfc(mu * np.sqrt(0.5 * t)))


def sqou_d0_density(gamma: float, nu: float, t):
    """Density of d0 for the squared radial OU process (stationary start)."""
    t = np.asarray(t, dtype=float)
    c = 2.0 * gamma / (special.gamma(-nu) * special.gamma(1.0 + nu))
    # -expm1 keeps 1 - e^{-2 gamma t} accurate for t near 0
    return c * np.exp(2.0 * gamma * nu * t) * (-np.expm1(-2.0 * gamma * t)) ** nu


def _coth_over_x(x: float) -> float:
    """coth(x)/x, series below the cancellation cutoff."""
    if x < _COTH_SERIES_CUT:
        return 1.0 / (x * x) + 1.0 / 3.0 - x * x / 45.0
    return 1.0 / (math.tanh(x) * x)


def _green_rbm(mu: float, alpha: float) -> float:
    return 1.0 / (math.sqrt(2.0 * alpha + mu * mu) - mu)


def _green_reflbm01(alpha: float) -> float:
    x = math.sqrt(2.0 * alpha)
    return _coth_over_x(x)


def _green_sqou(gamma: float, nu: float, alpha: float) -> float:
    # B(x, y) via log-gammas; gamma^nu * B(alpha/(2 gamma), -nu) / Gamma(1 + nu)
    a = alpha / (2.0 * gamma)
    log_b = special.gammaln(a) + special.gammaln(-nu) - special.gammaln(a - nu)
    return gamma ** nu * math.exp(log_b) / special.gamma(1.0 + nu)


def make_model(name: str, params: Sequence[float] = ()) -> DiffusionModel:
    """Build a registry model.

    Parameters: ``rbm`` takes ``[mu]`` with mu > 0; ``sqou`` takes
    ``[gamma, nu]`` with gamma > 0 and -1 < nu < 0; ``reflbm01`` takes none.
    """
    params = tuple(float(p) for p in params)
    if name == "rbm":
        if len(params) != 1:
            raise ValueError("rbm takes exactly one parameter [mu]")
        mu = params[0]
        if mu <= 0:
            raise ValueError(f"rbm requires mu > 0, got mu={mu}")
        return DiffusionModel(
            name="rbm",
            params={"mu": mu},
            interval=(0.0, math.inf),
            drift=lambda x: -mu,
            diffusion_coeff=lambda x: 1.0,
            scale_deriv=lambda x: math.exp(2.0 * mu * x),
            speed_density=lambda x: 2.0 * math.exp(-2.0 * mu * x),
            total_mass=1.0 / mu,
            stationary_quantile=lambda p: -math.log1p(-p) / (2.0 * mu),
            d0_density=lambda t: rbm_d0_density(mu, t),
            _green00=lambda a: _green_rbm(mu, a),
        )
    if name == "reflbm01":
        if params:
            raise ValueError("reflbm01 takes no parameters")
        return DiffusionModel(
            name="reflbm01",
            params={},
            interval=(0.0, 1.0),
            drift=lambda x: 0.0,
            diffusion_coeff=lambda x: 1.0,
            scale_deriv=lambda x: 1.0,
            speed_density=lambda x: 2.0,
            total_mass=2.0,
            stationary_quantile=lambda p: p,
            d0_density=None,
            _green00=_green_reflbm01,
        )
    if name == "sqou":
        if len(params) != 2:
            raise ValueError("sqou takes exactly two parameters [gamma, nu]")
        gamma, nu = params
        if gamma <= 0:
            raise ValueError(f"sqou requires gamma > 0, got gamma={gamma}")
        if not (-1.0 < nu < 0.0):
            raise ValueError(f"sqou requires -1 < nu < 0, got nu={nu}")
        n_dim = 2.0 * nu + 2.0
        total_mass = special.gamma(nu + 1.0) / (2.0 * gamma ** (nu + 1.0))
        return DiffusionModel(
            name="sqou",
            params={"gamma": gamma, "nu": nu},
            interval=(0.0, math.inf),
            drift=lambda x: n_dim - 2.0 * gamma * x,
            diffusion_coeff=lambda x: 2.0 * math.sqrt(max(x, 0.0)),
            scale_deriv=lambda x: x ** (-nu - 1.0) * math.exp(gamma * x),
            speed_density=lambda x: 0.5 * x ** nu * math.exp(-gamma * x),
            total_mass=total_mass,
            stationary_quantile=lambda p: special.gammaincinv(nu + 1.0, p) / gamma,
            d0_density=lambda t: sqou_d0_density(gamma, nu, t),
            _green00=lambda a: _green_sqou(gamma, nu, a),
        )
    raise ValueError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")


def green00(model: DiffusionModel, alpha: float) -> float:
    """Resolvent G_alpha(0, 0) of the model, alpha > 0."""
    if alpha <= 0:
        raise ValueError(f"green00 requires alpha > 0, got {alpha}")
    return model._green00(alpha)


def stationary_sample(model: DiffusionModel, rng: np.random.Generator, size=None):
    """Draw from the stationary law (normalized speed measure) by inverse CDF."""
    u = rng.random(size)
    if size is None:
        return model.stationary_quantile(u)
    q = np.vectorize(model.stationary_quantile)
    return q(u)


def _inv_green(model: DiffusionModel, g: float) -> float:
    """1/G_g(0,0) with the recurrence convention 1/G_0 = 0."""
    if g == 0.0:
        return 0.0
    return 1.0 / model._green00(g)


def lt_joint_from_green(model: DiffusionModel, alpha: float, beta: float) -> float:
    """Joint Laplace transform of (-g0, d0) -- equivalently (I+, I-) -- at (alpha, beta).

    Off the diagonal this is (1/(M (alpha - beta))) (1/G_alpha - 1/G_beta);
    the diagonal is the derivative of gamma -> 1/G_gamma, taken by central
    finite difference with relative step 1e-5.
    """
    if alpha < 0 or beta < 0:
        raise ValueError(f"transform arguments must be >= 0, got ({alpha}, {beta})")
    m = model.total_mass
    if abs(alpha - beta) < 1e-8:
        g = 0.5 * (alpha + beta)
        if g == 0.0:
            return 1.0
        h = _DIAG_REL_STEP * max(1.0, g)
        lo = max(g - h, 0.0)
        hi = g + h
        return (_inv_green(model, hi) - _inv_green(model, lo)) / (m * (hi - lo))
    return (_inv_green(model, alpha) - _inv_green(model, beta)) / (m * (alpha - beta))
