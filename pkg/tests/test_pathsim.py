import math

import numpy as np
import pytest

from excursionlab.models import make_model
from excursionlab.pathsim import LegResult, PathConfig, run_leg
from excursionlab.rng import substream


@pytest.fixture(scope="module")
def rbm():
    return make_model("rbm", (1.0,))


def test_leg_from_boundary_is_trivial(rbm):
    cfg = PathConfig(dt=1e-3, t_max=10.0)
    leg = run_leg(rbm, 0.0, cfg, substream(1, 0))
    assert leg.hit_time == 0.0
    assert leg.time_above == 0.0 and leg.time_below == 0.0
    assert not leg.censored


def test_mean_hitting_time_matches_optional_stopping(rbm):
    # E H = x0 / mu for Brownian motion with drift -mu run from x0 to 0
    cfg = PathConfig(dt=1e-3, t_max=200.0)
    n = 20000
    hits = np.empty(n)
    for i in range(n):
        hits[i] = run_leg(rbm, 1.0, cfg, substream(11, i)).hit_time
    assert abs(hits.mean() - 1.0) < 0.02


def test_mean_hitting_time_fine_step(rbm):
    cfg = PathConfig(dt=1e-4, t_max=200.0)
    n = 2000
    hits = np.array([run_leg(rbm, 1.0, cfg, substream(12, i)).hit_time
                     for i in range(n)])
    se = hits.std() / math.sqrt(n)
    assert abs(hits.mean() - 1.0) < 3 * se


def test_forced_censoring(rbm):
    cfg = PathConfig(dt=1e-3, t_max=1e-3)
    leg = run_leg(rbm, 25.0, cfg, substream(2, 0))
    assert leg.censored
    assert leg.hit_time == cfg.t_max


def test_occupation_splits_hit_time_exactly(rbm):
    cfg = PathConfig(dt=1e-3, t_max=100.0)
    for i in range(200):
        leg = run_leg(rbm, 0.7, cfg, substream(3, i))
        assert leg.time_above + leg.time_below == pytest.approx(
            leg.hit_time, abs=1e-12)
        assert leg.time_above >= 0.0 and leg.time_below >= 0.0


def test_bitwise_reproducibility(rbm):
    cfg = PathConfig(dt=1e-3, t_max=50.0)
    a = run_leg(rbm, 0.9, cfg, substream(4, 7))
    b = run_leg(rbm, 0.9, cfg, substream(4, 7))
    assert (a.hit_time, a.time_above, a.time_below) == \
        (b.hit_time, b.time_above, b.time_below)


def test_bridge_correction_improves_step_convergence(rbm):
    # halving dt moves the corrected mean hitting time less than the plain one
    n = 10000

    def mean_hit(dt, bcorr, seed):
        cfg = PathConfig(dt=dt, t_max=200.0, bridge_correction=bcorr)
        return np.mean([run_leg(rbm, 1.0, cfg, substream(seed, i)).hit_time
                        for i in range(n)])

    drift_corr = abs(mean_hit(2e-3, True, 21) - mean_hit(1e-3, True, 21))
    drift_plain = abs(mean_hit(2e-3, False, 21) - mean_hit(1e-3, False, 21))
    assert drift_corr < drift_plain


def test_rejects_x0_outside_interval():
    refl = make_model("reflbm01", ())
    cfg = PathConfig(dt=1e-3, t_max=10.0)
    with pytest.raises(ValueError):
        run_leg(refl, 1.5, cfg, substream(5, 0))
    rbm = make_model("rbm", (1.0,))
    with pytest.raises(ValueError):
        run_leg(rbm, -0.2, cfg, substream(5, 0))


def test_config_validation():
    with pytest.raises(ValueError):
        PathConfig(dt=0.0, t_max=1.0)
    with pytest.raises(ValueError):
        PathConfig(dt=1e-2, t_max=1e-3)


def test_recorded_path_starts_at_x0_and_stays_inside(rbm):
    cfg = PathConfig(dt=1e-3, t_max=50.0, record_path=True)
    leg = run_leg(rbm, 0.5, cfg, substream(6, 3))
    assert leg.path[0] == 0.5
    assert np.all(leg.path > 0.0)
    # one value per full step of the leg
    assert leg.path.size == math.floor(leg.hit_time / cfg.dt) + 1

    refl = make_model("reflbm01", ())
    leg = run_leg(refl, 0.4, cfg, substream(6, 4))
    assert np.all((leg.path > 0.0) & (leg.path <= 1.0))


def test_sqou_leg_runs_and_splits(rbm):
    sqou = make_model("sqou", (1.0, -0.5))
    cfg = PathConfig(dt=1e-3, t_max=50.0)
    leg = run_leg(sqou, 0.5, cfg, substream(7, 0))
    assert leg.hit_time > 0.0
    assert leg.time_above + leg.time_below == pytest.approx(leg.hit_time,
                                                            abs=1e-12)
