"""Diagnostic figures for experiment reports, rendered to files.

All plotting goes through the Agg backend; callers pass an output directory
and get back the list of files written.
"""

import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import analytics
from .models import make_model

__all__ = [
    "save_identity_figures",
    "save_bridge_figures",
    "save_rayknight_figures",
    "save_levy_figures",
]


def _ecdf(ax, data, label):
    x = np.sort(data)
    y = np.arange(1, x.size + 1) / x.size
    ax.step(x, y, where="post", label=label, lw=1.0)


def save_identity_figures(samples, outdir, model_name="rbm", mu=1.0,
                          gamma=1.0, nu=-0.5):
    os.makedirs(outdir, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for col, label in ((samples.minus_g0, "-g0"), (samples.d0, "d0"),
                       (samples.i_plus, "I+"), (samples.i_minus, "I-")):
        _ecdf(ax, col, label)
    ax.set_xlim(0, np.quantile(samples.v, 0.99))
    ax.set_xlabel("t")
    ax.set_ylabel("ECDF")
    ax.set_title(f"{model_name}: marginal identity of the four functionals")
    ax.legend()
    path = os.path.join(outdir, f"identity_ecdf_{model_name}.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    ratio = samples.i_plus / samples.v
    ax.hist(ratio, bins=50, range=(0, 1), density=True, alpha=0.7)
    ax.axhline(1.0, color="k", ls="--", lw=1.0, label="uniform")
    ax.set_xlabel("I+ / V")
    ax.set_ylabel("density")
    ax.set_title(f"{model_name}: occupation fraction against uniform")
    ax.legend()
    path = os.path.join(outdir, f"identity_ratio_{model_name}.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    if model_name in ("rbm", "sqou"):
        model = make_model("rbm", (mu,)) if model_name == "rbm" else \
            make_model("sqou", (gamma, nu))
        fig, ax = plt.subplots(figsize=(6, 4))
        hi = float(np.quantile(samples.d0, 0.995))
        ax.hist(samples.d0, bins=80, range=(0, hi), density=True, alpha=0.7,
                label="d0 samples")
        t = np.linspace(hi / 400, hi, 400)
        ax.plot(t, model.d0_density(t), "k-", lw=1.2, label="closed form")
        ax.set_xlabel("t")
        ax.set_ylabel("density")
        ax.set_title(f"{model_name}: d0 against the closed-form density")
        ax.legend()
        path = os.path.join(outdir, f"identity_d0_density_{model_name}.png")
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)
    return written


def save_bridge_figures(samples, outdir, l=1.0):
    os.makedirs(outdir, exist_ok=True)
    written = []
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].hist(samples["i_l_plus"] / l, bins=50, range=(0, 1), density=True,
                 alpha=0.7)
    axes[0].axhline(1.0, color="k", ls="--", lw=1.0)
    axes[0].set_title("Bessel(3) bridge: occupation above the split level")
    axes[0].set_xlabel("I(l,+) / l")
    axes[1].hist(samples["bb_occupation"] / l, bins=50, range=(0, 1),
                 density=True, alpha=0.7)
    axes[1].axhline(1.0, color="k", ls="--", lw=1.0)
    axes[1].set_title("Brownian bridge: time above 0")
    axes[1].set_xlabel("occupation / l")
    path = os.path.join(outdir, "bridge_occupations.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written


def save_rayknight_figures(samples, outdir, mu=1.0):
    os.makedirs(outdir, exist_ok=True)
    written = []
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for key, label in (("area", "CIR area"), ("hit_exp_level", "exact hit draw"),
                       ("d0", "d0")):
        _ecdf(axes[0], samples[key], label)
    axes[0].set_xlim(0, np.quantile(samples["d0"], 0.99))
    axes[0].set_title("identity chain")
    axes[0].legend()
    t = np.linspace(0, np.quantile(samples["h0_l"], 0.995), 300)
    axes[1].hist(samples["h0_l"], bins=80, density=True, alpha=0.7,
                 label="H0(L)")
    axes[1].plot(t, 2 * mu * np.exp(-2 * mu * t), "k-", lw=1.2,
                 label="Exp(2 mu)")
    axes[1].set_title("width of the local-time profile")
    axes[1].legend()
    path = os.path.join(outdir, "rayknight_chain.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written


def save_levy_figures(samples, outdir, gamma=1.0, nu=-0.5):
    os.makedirs(outdir, exist_ok=True)
    written = []
    rates = samples["rates"]
    weights = samples["weights"]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].semilogy(rates, weights, "o", ms=2.5)
    axes[0].set_xlabel("rate z_k")
    axes[0].set_ylabel("weight")
    axes[0].set_title("spectral mixture atoms")
    t = np.linspace(0.05, 3.0, 300)
    mix = analytics.SpectralMixture(rates=rates, weights=weights,
                                    normalized=True)
    axes[1].plot(t, analytics.density_d0_sqou(gamma, nu, t), "k-", lw=1.4,
                 label="closed form")
    axes[1].plot(t, analytics.mixture_density(mix, t), "r--", lw=1.2,
                 label="mixture")
    axes[1].set_xlabel("t")
    axes[1].set_title("d0 density against the exponential mixture")
    axes[1].legend()
    path = os.path.join(outdir, "levy_spectral.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written
