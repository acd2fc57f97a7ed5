"""End-to-end protocol: traces -> per-power fits -> slopes -> couplings."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import swpt, synthlab
from .device import DeviceSpec
from .extract import (CouplingEstimate, FitError, KerrFit1D, KerrFit2D, LineFit, SlopeFit,
                      extract_couplings, fit_kerr_1d, fit_kerr_2d, fit_qubit_line, fit_slope)
from .synthlab import ScanPlan, SpectroscopyTrace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairAnalysis:
    estimate: CouplingEstimate
    slope_q: SlopeFit
    slope_d: SlopeFit
    slope_m: SlopeFit
    line_fits: list[LineFit] = field(repr=False)
    kerr_fits: list[KerrFit1D] | KerrFit2D = field(repr=False)
    method: str = "1d"
    dropped_powers: tuple[float, ...] = ()

    def per_power_table(self) -> list[dict[str, Any]]:
        rows = [{"scan": "stark", "power_nW": lf.power, "omega_q_eff_MHz": lf.center,
                 "err_MHz": lf.center_err} for lf in self.line_fits]
        if isinstance(self.kerr_fits, KerrFit2D):
            wd, dm = self.kerr_fits.extrema(self.kerr_fits.powers)
            rows += [{"scan": "kerr", "power_nW": float(p), "omega_d_eff_MHz": float(a),
                      "omega_m_shift_MHz": float(b),
                      "phase_offset_rad": float(o)}
                     for p, a, b, o in zip(self.kerr_fits.powers, wd, dm,
                                           self.kerr_fits.phase_offsets)]
        else:
            rows += [{"scan": "kerr", "power_nW": k.power, "omega_d_eff_MHz": k.omega_d_eff,
                      "omega_m_shift_MHz": k.omega_m_shift, "kappa_MHz": k.kappa}
                     for k in self.kerr_fits]
        return rows


def analyze_stark(traces: Sequence[SpectroscopyTrace]) -> tuple[list[LineFit], SlopeFit]:
    fits = [fit_qubit_line(t) for t in traces]
    P = [t.power for t in traces]
    return fits, fit_slope(P, [f.center for f in fits], [f.center_err for f in fits])


def analyze_kerr(traces: Sequence[SpectroscopyTrace], Q_M: float, omega_M: float,
                 method: str = "1d", filter_sigma: float = 3.0, drop_failed: bool = True):
    """Per-power extrema and the two Kerr slopes (MHz/nW).

    With the 1D method a power whose fit fails (typically a noisy
    low-power trace mistaken for a folded curve) is dropped and reported,
    as long as three powers remain.  Returns ``(fits, slope_d, slope_m, dropped)``.
    """
    P = np.array([t.power for t in traces])
    if method == "1d":
        fits, dropped = [], []
        for t in traces:
            try:
                fits.append(fit_kerr_1d(t, Q_M, omega_M, filter_sigma))
            except FitError as exc:
                if not drop_failed:
                    raise
                log.warning("dropping Kerr trace at %g nW: %s", t.power, exc)
                dropped.append(float(t.power))
        if len(fits) < 3:
            raise FitError(f"only {len(fits)} Kerr powers fitted; need 3")
        Pk = [f.power for f in fits]
        sd = fit_slope(Pk, [f.omega_d_eff for f in fits], [f.omega_d_eff_err for f in fits])
        sm = fit_slope(Pk, [f.omega_m_shift for f in fits], [f.omega_m_shift_err for f in fits])
        return fits, sd, sm, tuple(dropped)
    if method == "2d":
        fit = fit_kerr_2d(traces, Q_M, omega_M, filter_sigma)
        e = fit.parameter_errors
        sd = SlopeFit(-fit.self_pull_rate, float(e[2]), fit.omega_d, float(e[0]), 1.0, len(P))
        sm = SlopeFit(fit.cross_pull_rate, float(e[3]), 0.0, 0.0, 1.0, len(P))
        return fit, sd, sm, ()
    raise ValueError(f"unknown fit method {method!r}")


def analyze_pair(spec: DeviceSpec, drive: str, monitor: str,
                 stark_traces: Sequence[SpectroscopyTrace],
                 kerr_traces: Sequence[SpectroscopyTrace], method: str = "1d",
                 error_mode: str = "stat", filter_sigma: float = 3.0) -> PairAnalysis:
    """Run the protocol for one drive/monitor pair.

    Detunings use the fitted zero-power qubit frequency and drive-mode
    frequency (the intercepts), with the monitor frequency taken from
    ``spec``.  ``spec`` also supplies the anharmonicity and monitor Q.
    """
    m = spec.mode(monitor)
    lines, sq = analyze_stark(stark_traces)
    kfits, sd, sm, dropped = analyze_kerr(kerr_traces, m.Q, m.omega, method, filter_sigma)
    omega_q0, omega_d0 = sq.intercept, sd.intercept
    est = extract_couplings(sq.slope, sd.slope, sm.slope, omega_q0 - omega_d0,
                            omega_q0 - m.omega, spec.alpha,
                            slope_errs=(sq.stderr, sd.stderr, sm.stderr),
                            error_mode=error_mode, pair_id=(drive, monitor),
                            qubit_freq=omega_q0)
    return PairAnalysis(est, sq, sd, sm, lines, kfits, method, dropped)


@dataclass(frozen=True)
class ClosedLoopResult:
    analysis: PairAnalysis
    truth: dict[str, float]
    relative_error: dict[str, float]
    seed: int

    def to_dict(self) -> dict[str, Any]:
        return {"seed": self.seed, "truth": self.truth,
                "relative_error": self.relative_error,
                "estimate": self.analysis.estimate.to_dict(),
                "method": self.analysis.method,
                "dropped_kerr_powers_nW": list(self.analysis.dropped_powers)}


def default_plans(spec: DeviceSpec, drive: str, monitor: str, noise: float = 0.0,
                  stark_powers=None, kerr_powers=None, stark_opts: dict | None = None,
                  kerr_opts: dict | None = None, drift_rate: float = 0.0) -> tuple[ScanPlan, ScanPlan]:
    """Plans with 9 AC-Stark and 17 Kerr powers; ``noise`` is relative.

    Stark noise is ``noise`` times the dip depth; Kerr noise is ``noise``
    times the largest monitor phase excursion.  ``stark_opts`` and
    ``kerr_opts`` are passed to the plan builders.
    """
    sp = synthlab.stark_plan_for(spec, drive, stark_powers, **(stark_opts or {}))
    sp = sp.with_(noise_sigma=noise * sp.line_depth)
    kp = synthlab.kerr_plan_for(spec, drive, monitor, kerr_powers, **(kerr_opts or {}))
    if noise:
        clean = synthlab.simulate_kerr_scan(spec, kp, 0)
        peak = max(float(np.max(np.abs(t.phase))) for t in clean)
        kp = kp.with_(noise_sigma=noise * peak)
    if drift_rate:
        kp = kp.with_(drift_rate=drift_rate)
    return sp, kp


def run_closed_loop(spec: DeviceSpec, drive: str, monitor: str,
                    stark_plan: ScanPlan | None = None, kerr_plan: ScanPlan | None = None,
                    seed: int = 0, method: str = "1d", error_mode: str = "stat",
                    noise: float = 0.0, filter_sigma: float = 3.0) -> ClosedLoopResult:
    """Simulate both scans from ``spec`` and compare extracted couplings with truth."""
    if stark_plan is None or kerr_plan is None:
        sp, kp = default_plans(spec, drive, monitor, noise)
        stark_plan = stark_plan or sp
        kerr_plan = kerr_plan or kp
    ss = np.random.SeedSequence(seed).generate_state(2)
    stark = synthlab.simulate(spec, stark_plan, int(ss[0]))
    kerr = synthlab.simulate(spec, kerr_plan, int(ss[1]))
    pa = analyze_pair(spec, drive, monitor, stark, kerr, method, error_mode, filter_sigma)
    gd, gm = spec.mode(drive).g, spec.mode(monitor).g
    est = pa.estimate
    truth = {"g_drive_MHz": gd, "g_monitor_MHz": gm}
    rel = {"g_drive": est.g_drive / abs(gd) - 1, "g_monitor": est.g_monitor / abs(gm) - 1}
    return ClosedLoopResult(pa, truth, rel, seed)


def expected_slopes(spec: DeviceSpec, drive: str, monitor: str) -> dict[str, float]:
    """Slopes (MHz/nW) implied by the closed forms and ``spec.beta``.

    With ``zeta`` left unset the Kerr scans see ``beta`` photons per nW at
    the driven resonance, so all three slopes share the same ``beta``.
    """
    c = swpt.device_coefficients(spec, drive, monitor)
    d = spec.mode(drive)
    n_per_nw = spec.drive_conversion(drive) / (d.kappa / 2) ** 2
    return {"slope_q": c.chi_stark_D * spec.beta, "slope_d": c.chi_DD * n_per_nw,
            "slope_m": c.chi_DM * n_per_nw}
