import math

import numpy as np
import pytest

from excursionlab.excursions import identity_samples
from excursionlab.models import make_model
from excursionlab.pathsim import PathConfig, run_leg
from excursionlab.rayknight import (local_time_band_estimate,
                                    sample_hit_exp_level, simulate_cir,
                                    total_local_time_profile)
from excursionlab.rng import substream
from excursionlab.stats import ks_one_sample, ks_two_sample


class TestSimulateCir:
    def test_absorbing_start(self):
        run = simulate_cir(0.0, 1.0, 0.0, "until_absorbed", 1e-4, substream(51, 0))
        assert run.zeta == 0.0
        assert run.area == 0.0

    def test_fixed_length_from_zero(self):
        run = simulate_cir(4.0, 1.0, 0.0, "fixed_length", 1e-4, substream(51, 1),
                           length=0.0)
        assert run.end_value == 0.0
        run = simulate_cir(4.0, 1.0, 0.0, "fixed_length", 1e-4, substream(51, 2),
                           length=0.5)
        assert run.end_value > 0.0

    def test_mean_life_time_and_area(self, cir_batch):
        # zeta ~ Exp(2 mu); E area = E I+ = 1/(2 mu^2)
        zeta, area = cir_batch
        assert abs(zeta.mean() - 0.5) < 0.015
        assert abs(area.mean() - 0.5) < 0.015

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            simulate_cir(-1.0, 1.0, 0.0, "until_absorbed", 1e-4, substream(51, 3))
        with pytest.raises(ValueError):
            simulate_cir(0.0, 0.0, 0.0, "until_absorbed", 1e-4, substream(51, 4))
        with pytest.raises(ValueError):
            simulate_cir(0.0, 1.0, 1.0, "nosuch", 1e-4, substream(51, 5))
        with pytest.raises(ValueError):
            simulate_cir(0.0, 1.0, 1.0, "fixed_length", 1e-4, substream(51, 6))


class TestTotalLocalTimeProfile:
    def test_single_draw_fields(self):
        p = total_local_time_profile(1.0, 1e-3, substream(52, 0))
        assert p.x0 > 0.0
        assert p.l_e_at_x0 >= 0.0
        assert p.h0_l >= 0.0
        assert p.area_below >= 0.0 and p.area_above >= 0.0

    def test_exponential_laws(self, profile_batch):
        le, h0l, _, _, censored = profile_batch
        assert abs(le.mean() - 1.0) < 0.03
        assert abs(h0l.mean() - 0.5) < 0.015
        assert ks_one_sample(le, lambda t: 1 - np.exp(-t)) < 0.02
        assert ks_one_sample(h0l, lambda t: 1 - np.exp(-2 * t)) < 0.02
        assert censored.mean() < 1e-3


class TestHitExpLevel:
    def test_zero_level_gives_zero(self):
        from excursionlab.rayknight import _ig_draw
        assert _ig_draw(0.0, 1.0, substream(53, 0)) == 0.0

    def test_mean(self, ig_batch):
        # E H = E(c) / mu with c ~ Exp(2 mu)
        assert abs(ig_batch.mean() - 0.5) < 0.01

    def test_matches_d0_law(self, ig_batch, rbm_identity):
        d, _ = ks_two_sample(ig_batch, rbm_identity.valid().d0)
        assert d < 0.02

    def test_rejects_bad_mu(self):
        with pytest.raises(ValueError):
            sample_hit_exp_level(0.0, substream(53, 1))


class TestBandEstimate:
    def test_path_outside_band(self):
        path = np.array([0.1, 0.2, 0.3])
        assert local_time_band_estimate(path, 1e-3, 5.0, 0.02) == 0.0

    def test_mean_local_time_at_start_level(self):
        # E L(H0, x) = (1 - e^{-2 mu x}) / mu at x = 1
        rbm = make_model("rbm", (1.0,))
        cfg = PathConfig(dt=1e-3, t_max=200.0, record_path=True)
        n = 4000
        vals = np.empty(n)
        for i in range(n):
            leg = run_leg(rbm, 1.0, cfg, substream(54, i))
            vals[i] = local_time_band_estimate(leg.path, cfg.dt, 1.0, 0.02)
        expected = 1.0 - math.exp(-2.0)
        assert abs(vals.mean() - expected) < 0.05 * expected

    def test_bandwidth_stability(self):
        rbm = make_model("rbm", (1.0,))
        cfg = PathConfig(dt=1e-3, t_max=200.0, record_path=True)
        n = 4000
        wide = np.empty(n)
        narrow = np.empty(n)
        for i in range(n):
            leg = run_leg(rbm, 1.0, cfg, substream(55, i))
            wide[i] = local_time_band_estimate(leg.path, cfg.dt, 1.0, 0.02)
            narrow[i] = local_time_band_estimate(leg.path, cfg.dt, 1.0, 0.01)
        assert abs(wide.mean() - narrow.mean()) < 0.05 * wide.mean()

    def test_rejects_nonpositive_eps(self):
        with pytest.raises(ValueError):
            local_time_band_estimate(np.array([1.0]), 1e-3, 1.0, 0.0)


class TestProfileVsDirectPaths:
    def test_first_leg_value_matches_band_estimate_in_law(self):
        # L^e(X0) from the profile against the band estimate on two-leg paths
        rbm = make_model("rbm", (1.0,))
        cfg = PathConfig(dt=1e-3, t_max=50.0, record_path=True)
        n = 10000
        band = np.empty(n)
        for i in range(n):
            r1 = substream(56, 2 * i)
            r2 = substream(56, 2 * i + 1)
            x0 = -math.log(r1.random()) / 2.0
            leg1 = run_leg(rbm, x0, cfg, r1)
            leg2 = run_leg(rbm, x0, cfg, r2)
            occ1 = local_time_band_estimate(leg1.path, cfg.dt, x0, 0.02)
            occ2 = local_time_band_estimate(leg2.path, cfg.dt, x0, 0.02)
            band[i] = occ1 + occ2
            leg1.band_occupations = [(x0, occ1 * 0.04)]
        prof = np.empty(n)
        for i in range(n):
            prof[i] = total_local_time_profile(1.0, 1e-3, substream(57, i)).l_e_at_x0
        d, _ = ks_two_sample(band, prof)
        assert d < 0.05
