"""Shared sample sets. The heavy Monte Carlo batches are session-scoped so the
acceptance module and the per-module tests reuse the same draws."""

import numpy as np
import pytest

from excursionlab.bridges import (bessel3_occupation_samples,
                                  brownian_bridge_occupation)
from excursionlab.excursions import identity_samples
from excursionlab.models import make_model
from excursionlab.pathsim import PathConfig, default_t_max
from excursionlab.rayknight import (cir_area_samples, hit_exp_level_samples,
                                    profile_samples)

SEED_IDENTITY = 20240601
SEED_UNIFORMITY = 20240602
SEED_BRIDGE = 20240603
SEED_PROFILE = 20240604
SEED_CIR = 20240605
SEED_IG = 20240606
SEED_REFLBM = 20240607
SEED_SQOU = 20240608


@pytest.fixture(scope="session")
def rbm_model():
    return make_model("rbm", (1.0,))


@pytest.fixture(scope="session")
def rbm_identity():
    """Acceptance items 1-3/7 batch: RBM mu=1, N=5e4, dt=1e-3, correction on."""
    model = make_model("rbm", (1.0,))
    cfg = PathConfig(dt=1e-3, t_max=default_t_max(model))
    return identity_samples(model, cfg, 50000, seed=SEED_IDENTITY)


@pytest.fixture(scope="session")
def rbm_identity_indep():
    """Independent batch (disjoint substreams) for the V comparison."""
    model = make_model("rbm", (1.0,))
    cfg = PathConfig(dt=1e-3, t_max=default_t_max(model))
    return identity_samples(model, cfg, 50000, seed=SEED_IDENTITY,
                            base_index=2 * 50000)


@pytest.fixture(scope="session")
def rbm_uniformity():
    """Finer-step batch for the conditional-uniformity bins (item 4)."""
    model = make_model("rbm", (1.0,))
    cfg = PathConfig(dt=2e-4, t_max=default_t_max(model))
    return identity_samples(model, cfg, 50000, seed=SEED_UNIFORMITY)


@pytest.fixture(scope="session")
def bessel_batch():
    return bessel3_occupation_samples(1.0, 5e-4, 20000, seed=SEED_BRIDGE)


@pytest.fixture(scope="session")
def bb_occupations():
    return brownian_bridge_occupation(1.0, 5e-4, 20000, seed=SEED_BRIDGE + 1)


@pytest.fixture(scope="session")
def profile_batch():
    return profile_samples(1.0, 1e-4, 50000, seed=SEED_PROFILE)


@pytest.fixture(scope="session")
def cir_batch():
    return cir_area_samples(1.0, 1e-4, 50000, seed=SEED_CIR)


@pytest.fixture(scope="session")
def ig_batch():
    return hit_exp_level_samples(1.0, 50000, seed=SEED_IG)


@pytest.fixture(scope="session")
def reflbm_identity():
    model = make_model("reflbm01", ())
    cfg = PathConfig(dt=1e-3, t_max=default_t_max(model))
    return identity_samples(model, cfg, 50000, seed=SEED_REFLBM)


@pytest.fixture(scope="session")
def sqou_identity():
    model = make_model("sqou", (1.0, -0.5))
    cfg = PathConfig(dt=1e-4, t_max=default_t_max(model))
    return identity_samples(model, cfg, 50000, seed=SEED_SQOU)
