import math

import numpy as np
import pytest
from scipy import stats
from scipy.optimize import brentq

from starkkerr import extract as X
from starkkerr import pipeline, swpt, synthlab
from starkkerr.synthlab import SpectroscopyTrace

ALPHA = 113.0


def _g_from_ratio(ratio, oracle):
    # invert a closed-form coefficient ratio numerically
    return brentq(lambda g: oracle(g) - ratio, 1e-3, 80.0, xtol=1e-14)


@pytest.mark.parametrize("sq,sd,sm,dD,dM,gD,gM", [
    (-4.52, -3.62e-3, -6.8e-3, -376.0, -367.0, 14.2, 13.4),
    (-32.2, -32.0e-3, -42.1e-3, -404.0, -376.0, 16.9, 12.8),
])
def test_published_pairs(sq, sd, sm, dD, dM, gD, gM):
    est = X.extract_couplings(sq, sd, sm, dD, dM, ALPHA, error_mode="hardware")
    assert abs(est.g_drive - gD) <= 0.6 and abs(est.g_monitor - gM) <= 0.5
    # independent route: root-find g in the closed-form ratios
    g_d = _g_from_ratio(sd / sq, lambda g: swpt.kerr_self(g, dD, ALPHA)
                        / swpt.chi_stark(g, dD, ALPHA))
    assert est.g_drive == pytest.approx(g_d, rel=1e-10)
    g_m = _g_from_ratio(sm / sq, lambda g: swpt.kerr_cross(g_d, g, dD, dM, ALPHA)
                        / swpt.chi_stark(g_d, dD, ALPHA))
    assert est.g_monitor == pytest.approx(g_m, rel=1e-10)
    assert est.g_drive_err >= 0.6 and est.g_monitor_err >= 0.5


def test_hardware_floor_adds_in_quadrature():
    args = (-4.52, -3.62e-3, -6.8e-3, -376.0, -367.0, ALPHA)
    errs = (0.05, 0.09e-3, 0.2e-3)
    s = X.extract_couplings(*args, slope_errs=errs)
    h = X.extract_couplings(*args, slope_errs=errs, error_mode="hardware")
    assert h.g_drive_err == pytest.approx(math.hypot(s.g_drive_err, 0.6))
    assert h.g_monitor_err == pytest.approx(math.hypot(s.g_monitor_err, 0.5))
    assert h.g_drive == s.g_drive


def test_error_propagation_matches_monte_carlo():
    rng = np.random.default_rng(0)
    vals = np.array([-4.52, -3.62e-3, -6.8e-3])
    errs = np.array([0.05, 0.09e-3, 0.2e-3])
    est = X.extract_couplings(*vals, -376.0, -367.0, ALPHA, slope_errs=errs)
    draws = vals + errs * rng.normal(size=(20000, 3))
    gd = [X.extract_couplings(*d, -376.0, -367.0, ALPHA).g_drive for d in draws[:4000]]
    assert np.std(gd) == pytest.approx(est.g_drive_err, rel=0.08)


def test_inconsistent_signs():
    with pytest.raises(X.InconsistentSignsError):
        X.extract_couplings(-4.52, +3.62e-3, -6.8e-3, -376.0, -367.0, ALPHA)
    with pytest.raises(ZeroDivisionError):
        X.extract_couplings(0.0, -3.62e-3, -6.8e-3, -376.0, -367.0, ALPHA)
    with pytest.raises(ValueError):
        X.extract_couplings(-4.52, -3.62e-3, -6.8e-3, -376.0, -367.0, ALPHA, error_mode="x")


def test_fit_slope_matches_linregress():
    rng = np.random.default_rng(3)
    x = np.linspace(0, 2, 9)
    y = 4593 - 4.5 * x + rng.normal(0, 0.05, x.size)
    r = stats.linregress(x, y)
    s = X.fit_slope(x, y)
    assert s.slope == pytest.approx(r.slope, rel=1e-12)
    assert s.intercept == pytest.approx(r.intercept, rel=1e-12)
    assert s.stderr == pytest.approx(r.stderr, rel=1e-10)
    assert s.intercept_err == pytest.approx(r.intercept_stderr, rel=1e-10)


def test_fit_slope_weighted_matches_polyfit():
    rng = np.random.default_rng(4)
    x = np.linspace(1, 5, 7)
    sig = np.linspace(0.1, 0.5, 7)
    y = 2.0 + 0.3 * x + sig * rng.normal(size=7)
    s = X.fit_slope(x, y, sig)
    p, cov = np.polyfit(x, y, 1, w=1 / sig, cov="unscaled")
    assert s.slope == pytest.approx(p[0], rel=1e-12)
    assert s.stderr == pytest.approx(math.sqrt(cov[0, 0] * max(1, s.chi2_red)), rel=1e-10)
    with pytest.raises(ValueError):
        X.fit_slope([1, 1, 1], [1, 2, 3])


def test_line_fit_pulls():
    f = np.linspace(4580, 4600, 201)
    pulls = []
    for seed in range(40):
        rng = np.random.default_rng(seed)
        c = 4590.0 + rng.uniform(-2, 2)
        y = 1.0 - 0.5 * np.exp(-0.5 * ((f - c) / 1.0) ** 2) + rng.normal(0, 0.02, f.size)
        fit = X.fit_qubit_line(SpectroscopyTrace(0.0, f, y, np.zeros_like(f)))
        pulls.append((fit.center - c) / fit.center_err)
    assert abs(np.mean(pulls)) < 0.5
    assert 0.7 < np.std(pulls) < 1.3


def test_line_fit_rejects_flat_trace():
    f = np.linspace(0, 10, 50)
    with pytest.raises(X.FitError):
        X.fit_qubit_line(SpectroscopyTrace(0.0, f, np.ones_like(f) + np.linspace(0, 1e-3, 50),
                                           np.zeros_like(f)))


def test_lineshape_limits():
    x = np.linspace(-5, 5, 11)
    assert np.allclose(X.lineshape(x, 0.0), 1 / (1 + x * x))
    # extremum at zero scaled detuning after the pull shift
    y = X.kerr_shift_model(np.linspace(-1, 1, 2001), 0.0, 0.2, 1.0, 2.0)
    assert np.max(y) == pytest.approx(2.0, rel=1e-6)


def test_kerr_1d_recovers_truth(ba_device):
    kp = synthlab.kerr_plan_for(ba_device, "D", "M", n_powers=5)
    m = ba_device.mode("M")
    for t in synthlab.simulate(ba_device, kp, 0):
        fit = X.fit_kerr_1d(t, m.Q, m.omega)
        assert fit.omega_d_eff == pytest.approx(t.truth["omega_d_eff"], abs=1e-6)
        assert fit.omega_m_shift == pytest.approx(t.truth["omega_m_eff"] - m.omega, rel=1e-5)


def test_kerr_1d_offset_mostly_enters_baseline(ba_device):
    kp = synthlab.kerr_plan_for(ba_device, "D", "M", n_powers=3)
    m = ba_device.mode("M")
    t = synthlab.simulate(ba_device, kp, 0)[-1]
    a = X.fit_kerr_1d(t, m.Q, m.omega)
    b = X.fit_kerr_1d(t.with_phase(t.phase + 0.01), m.Q, m.omega)
    # a phase offset is only a shift baseline to first order in the excursion
    assert abs(b.omega_d_eff - a.omega_d_eff) < 2e-3 * ba_device.mode("D").kappa
    equiv = m.omega * 0.01 / (2 * m.Q)
    assert b.baseline == pytest.approx(equiv, rel=0.05)


def test_kerr_2d_slopes_match_closed_forms(ba_device):
    kp = synthlab.kerr_plan_for(ba_device, "D", "M")
    kp = kp.with_(noise_sigma=1e-4, drift_rate=0.002)
    traces = synthlab.simulate(ba_device, kp, 3)
    m = ba_device.mode("M")
    fit = X.fit_kerr_2d(traces, m.Q, m.omega)
    exp = pipeline.expected_slopes(ba_device, "D", "M")
    assert fit.slope_d[0] == pytest.approx(exp["slope_d"], rel=0.01)
    assert fit.slope_m[0] == pytest.approx(exp["slope_m"], rel=0.01)
    # per-power offsets absorb the ramp
    assert np.allclose(np.diff(fit.phase_offsets), 0.002, atol=3e-4)


def test_kerr_2d_needs_three_powers(ba_device):
    kp = synthlab.kerr_plan_for(ba_device, "D", "M", n_powers=2)
    m = ba_device.mode("M")
    with pytest.raises(X.FitError):
        X.fit_kerr_2d(synthlab.simulate(ba_device, kp, 0), m.Q, m.omega)


def _est(pair, gd, gm, err=0.1, wq=None):
    return X.CouplingEstimate(gd, err, gm, err, -1, -1, -1, (0, 0, 0), -300, -300, ALPHA,
                              pair, wq)


def test_consistency_report_bounds():
    ests = [_est(("A", "B"), 12.0, 13.0), _est(("B", "A"), 13.1, 12.2),
            _est(("A", "C"), 11.1, 16.0)]
    rep = X.consistency_report(ests, bound_factor=3)
    a = rep["modes"]["A"]
    assert a["n"] == 3 and a["spread_MHz"] == pytest.approx(1.1)
    assert a["spread_bound_MHz"] == pytest.approx(3 * math.hypot(0.1, 0.1))
    assert a["within_bound"] is False
    assert rep["modes"]["B"]["within_bound"] is True
    assert "within_bound" not in rep["modes"]["C"]
    with pytest.raises(ValueError):
        X.consistency_report(ests[:1])


def test_consistency_report_sweep_trend():
    wq = np.linspace(4200, 4600, 8)
    g = 16 * np.sqrt(wq / 4600)
    ests = [_est(("C", "A"), gd, 12.0, 0.005, w) for gd, w in zip(g, wq)]
    sw = X.consistency_report(ests)["sweeps"]["C/A"]
    assert sw["drive"]["exponent"] == pytest.approx(0.5, abs=1e-9)
    assert sw["drive"]["sqrt_trend_resolved"]
    assert sw["monitor"]["exponent"] == pytest.approx(0.0, abs=1e-9)
    assert not sw["monitor"]["sqrt_trend_resolved"]
