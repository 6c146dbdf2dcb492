"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criteria and tolerances are pinned here; the heavy sample batches come from
the session fixtures in conftest (RBM identity at N=5e4/dt=1e-3, the finer
dt=2e-4 batch for the uniformity bins, bridges at N=2e4/dt=5e-4, profile/CIR
batches at dy=1e-4, the exact hitting-time draws, and the reflbm01/sqou
excursion batches).
"""

import json
import math

import numpy as np
import pytest

from excursionlab import analytics
from excursionlab.excursions import conditional_uniformity
from excursionlab.models import lt_joint_from_green, make_model
from excursionlab.stats import empirical_joint_lt, ks_one_sample, ks_two_sample


def _line(ok, label, detail):
    print(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    return ok


def test_criterion_01_main_identity(rbm_identity, rbm_identity_indep):
    s = rbm_identity.valid()
    sb = rbm_identity_indep.valid()
    checks = [
        ("i_plus vs d0", *ks_two_sample(s.i_plus, s.d0)),
        ("i_minus vs -g0", *ks_two_sample(s.i_minus, s.minus_g0)),
        ("i_plus vs -g0", *ks_two_sample(s.i_plus, s.minus_g0)),
        ("i_plus+i_minus vs V'", *ks_two_sample(s.i_plus + s.i_minus, sb.v)),
    ]
    ok = all(d < 0.02 for _, d, _ in checks)
    detail = ", ".join(f"{name} D={d:.4f}" for name, d, _ in checks)
    assert _line(ok, "criterion 1 (main identity, KS < 0.02)", detail)
    for _, d, _ in checks:
        assert d < 0.02


def test_criterion_02_joint_laplace_transform(rbm_identity):
    s = rbm_identity.valid()
    worst = ("", 0.0, 0.0)
    ok = True
    for a in (0.5, 1.0, 2.0):
        for b in (0.0, 0.5, 1.0):
            est, se = empirical_joint_lt(s.i_plus, s.i_minus, a, b)
            exact = analytics.lt_rbm(1.0, a, b)
            tol = max(3 * se, 0.01)
            diff = abs(est - exact)
            if diff / tol > worst[1] / max(worst[2], 1e-300):
                worst = (f"(a={a},b={b})", diff, tol)
            ok &= diff <= tol
    assert _line(ok, "criterion 2 (joint LT grid)",
                 f"worst {worst[0]} |diff|={worst[1]:.5f} tol={worst[2]:.5f}")


def test_criterion_03_mean_equalities(rbm_identity):
    s = rbm_identity.valid()
    target = 0.5  # 1/(2 mu^2)
    cols = {"i_plus": s.i_plus, "i_minus": s.i_minus,
            "-g0": s.minus_g0, "d0": s.d0}
    devs = {k: abs(v.mean() - target) / target for k, v in cols.items()}
    ok = all(d < 0.02 for d in devs.values())
    assert _line(ok, "criterion 3 (means within 2% of 0.5)",
                 ", ".join(f"{k}={cols[k].mean():.4f}" for k in cols))
    for d in devs.values():
        assert d < 0.02


def test_criterion_04_conditional_uniformity(rbm_uniformity):
    s = rbm_uniformity.valid()
    bins = conditional_uniformity(s.i_plus, s.v, bins=10)
    ok = (all(b.ks is not None and b.ks < 0.05 for b in bins)
          and all(b.count >= 3000 for b in bins))
    detail = ", ".join(f"bin{b.bin}={b.ks:.3f}" for b in bins)
    assert _line(ok, "criterion 4 (uniformity bins, KS < 0.05)", detail)
    for b in bins:
        assert b.count >= 3000
        assert b.ks < 0.05


def test_criterion_05_bridge_uniformity(bessel_batch, bb_occupations):
    unif = lambda x: np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    d1 = ks_one_sample(bessel_batch.i_l_plus, unif)
    d2, _ = ks_two_sample(bessel_batch.i_l_plus, bessel_batch.i_l_minus)
    verv_ok = bool(bessel_batch.vervaat_equal.all())
    d3 = ks_one_sample(bb_occupations, unif)
    ok = d1 < 0.02 and d2 < 0.02 and verv_ok and d3 < 0.02
    assert _line(ok, "criterion 5 (bridge uniformity)",
                 f"KS(i+,U)={d1:.4f}, KS(i+,i-)={d2:.4f}, "
                 f"vervaat exact={verv_ok}, KS(BB,U)={d3:.4f}")
    assert d1 < 0.02 and d2 < 0.02 and d3 < 0.02 and verv_ok


def test_criterion_06_rayknight_exponentials(profile_batch):
    le, h0l, _, _, _ = profile_batch
    m1 = h0l.mean()
    m2 = le.mean()
    d1 = ks_one_sample(h0l, lambda t: 1 - np.exp(-2 * t))
    d2 = ks_one_sample(le, lambda t: 1 - np.exp(-t))
    ok = (abs(m1 - 0.5) < 0.015 and d1 < 0.02
          and abs(m2 - 1.0) < 0.03 and d2 < 0.02)
    assert _line(ok, "criterion 6 (profile exponentials)",
                 f"mean H0(L)={m1:.4f}, KS={d1:.4f}; "
                 f"mean L^e(X0)={m2:.4f}, KS={d2:.4f}")
    assert abs(m1 - 0.5) < 0.015 and abs(m2 - 1.0) < 0.03
    assert d1 < 0.02 and d2 < 0.02


def test_criterion_07_identity_chain(cir_batch, ig_batch, rbm_identity):
    _, area = cir_batch
    d0 = rbm_identity.valid().d0
    d1, _ = ks_two_sample(area, ig_batch)
    d2, _ = ks_two_sample(area, d0)
    d3, _ = ks_two_sample(ig_batch, d0)
    ok = d1 < 0.02 and d2 < 0.02 and d3 < 0.02
    assert _line(ok, "criterion 7 (identity chain, KS < 0.02)",
                 f"area/hit={d1:.4f}, area/d0={d2:.4f}, hit/d0={d3:.4f}")
    assert d1 < 0.02 and d2 < 0.02 and d3 < 0.02


def test_criterion_08_reflbm01_marginal(reflbm_identity):
    s = reflbm_identity.valid()
    ok = True
    details = []
    for a in (0.5, 1.0, 2.0):
        est, se = empirical_joint_lt(s.d0, np.zeros_like(s.d0), a, 0.0)
        u = math.sqrt(2 * a)
        exact = math.tanh(u) / u
        tol = max(3 * se, 0.01)
        ok &= abs(est - exact) <= tol
        details.append(f"a={a}: |diff|={abs(est - exact):.5f} (tol {tol:.5f})")
    assert _line(ok, "criterion 8 (reflbm01 d0 transform)", "; ".join(details))


def test_criterion_09_sqou_density(sqou_identity):
    s = sqou_identity.valid()
    grid = np.linspace(1e-5, float(s.d0.max()) * 1.001, 4001)
    cdf_grid = analytics.numeric_cdf_from_density(
        lambda t: analytics.density_d0_sqou(1.0, -0.5, t), grid)
    d = ks_one_sample(s.d0, lambda x: np.interp(x, grid, cdf_grid))
    ok = d < 0.03
    assert _line(ok, "criterion 9 (sqou d0 vs closed-form CDF)", f"KS={d:.4f}")


def test_criterion_10_analytic_suite():
    from excursionlab.experiments import run_analytic_check
    report, _ = run_analytic_check()
    failed = [m.name for m in report.metrics if not m.passed]
    ok = not failed
    assert _line(ok, "criterion 10 (analytic suite)",
                 f"{len(report.metrics)} checks" +
                 (f", failed: {failed}" if failed else ""))


def test_criterion_11_worker_determinism(tmp_path):
    from excursionlab.cli import main
    docs = []
    for workers in (1, 3):
        out = tmp_path / f"det{workers}.json"
        main(["identity", "--model", "rbm", "--paths", "3000", "--dt", "1e-3",
              "--seed", "99", "--workers", str(workers), "--out", str(out)])
        docs.append(json.loads(out.read_text()))
    m1 = {m["name"]: m["value"] for m in docs[0]["metrics"]}
    m2 = {m["name"]: m["value"] for m in docs[1]["metrics"]}
    ok = m1 == m2
    assert _line(ok, "criterion 11 (worker determinism)",
                 f"{len(m1)} metrics bitwise equal={ok}")
