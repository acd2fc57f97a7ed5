"""Fits and ratio formulas that turn spectroscopy traces into couplings.

Slopes are handled in MHz/nW throughout; reports convert the Kerr slopes to
kHz/nW for display.  The coupling formulas divide a Kerr slope by the
AC-Stark slope, so the unknown photons-per-power factor cancels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.optimize import least_squares

from . import kerrdyn
from .synthlab import SpectroscopyTrace, wrap_phase

log = logging.getLogger(__name__)

HARDWARE_FLOOR_DRIVE = 0.6  # MHz
HARDWARE_FLOOR_MONITOR = 0.5  # MHz


class FitError(RuntimeError):
    pass


class InconsistentSignsError(ValueError):
    pass


def _covariance(res) -> tuple[np.ndarray, float]:
    """Scaled covariance ``s^2 (J^T J)^-1`` and residual rms from a least_squares result."""
    J = res.jac
    n, p = J.shape
    ssr = float(np.sum(res.fun**2))
    dof = max(n - p, 1)
    try:
        cov = np.linalg.pinv(J.T @ J) * (ssr / dof)
    except np.linalg.LinAlgError:
        cov = np.full((p, p), np.inf)
    cov = 0.5 * (cov + cov.T)
    return cov, math.sqrt(ssr / n)


# ---------------------------------------------------------------- qubit lines

@dataclass(frozen=True)
class LineFit:
    center: float
    width: float
    depth: float
    background: float
    covariance: np.ndarray = field(repr=False, compare=False)
    residual_rms: float
    power: float | None = None

    @property
    def center_err(self) -> float:
        return float(math.sqrt(max(self.covariance[0, 0], 0.0)))


def _line_model(theta, f):
    c, w, d, b = theta
    return b - d * np.exp(-0.5 * ((f - c) / w) ** 2)


def fit_qubit_line(trace: SpectroscopyTrace, channel: str | None = None) -> LineFit:
    """Gaussian dip on a flat background; the centre is the shifted qubit frequency."""
    if channel is None:
        channel = "phase" if trace.kind == "stark_monitor" else "magnitude"
    y = np.asarray(getattr(trace, channel), float)
    f = trace.pump_freqs
    if len(f) < 10:
        raise FitError("need at least 10 points for a line fit")
    step = float(np.median(np.diff(f)))
    ys = gaussian_filter1d(y, 2.0, mode="nearest")
    i0 = int(np.argmin(ys))
    b0 = float(np.median(y))
    d0 = b0 - float(ys[i0])
    if d0 <= 0:
        raise FitError("no dip found in trace")
    below = np.flatnonzero(ys < b0 - d0 / 2)
    w0 = max((f[below[-1]] - f[below[0]]) / 2.355, 2 * step) if below.size else 3 * step
    span = f[-1] - f[0]
    if span < 3 * w0:
        raise FitError(f"grid span {span:g} MHz covers less than 3 linewidths")
    x0 = np.array([f[i0], w0, d0, b0])
    res = least_squares(lambda th: _line_model(th, f) - y, x0, method="lm",
                        x_scale=np.array([w0, w0, d0, max(abs(b0), d0)]),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=4000)
    if not res.success:
        raise FitError(f"line fit did not converge: {res.message}")
    c, w, d, b = res.x
    w = abs(w)
    if not (f[0] + step <= c <= f[-1] - step):
        raise FitError(f"line centre {c:.4f} sits on the grid boundary")
    cov, rms = _covariance(res)
    return LineFit(float(c), float(w), float(d), float(b), cov, rms, trace.power)


# ---------------------------------------------------------------- Kerr curves

def lineshape(x, sigma):
    """Photon number over its peak value, low branch, in scaled detuning ``x``.

    Reduces to the Lorentzian ``1/(1+x^2)`` as ``sigma -> 0``.
    """
    x = np.asarray(x, float)
    sigma = np.broadcast_to(np.asarray(sigma, float), x.shape)
    out = 1.0 / (1.0 + x * x)
    nz = np.abs(sigma) > 1e-12
    if nz.any():
        out = out.copy()
        out[nz] = kerrdyn.normalized_response(x[nz], sigma[nz]) / sigma[nz]
    return out


def kerr_shift_model(f, omega_d_eff, kappa, sigma, peak_shift, baseline=0.0):
    """Monitor frequency shift versus drive frequency for one drive power.

    ``sigma`` is the scaled drive; the Kerr pull is ``sigma * kappa / 2`` so
    the response extremum sits at ``omega_d_eff``.
    """
    k = kappa / 2
    x = (np.asarray(f) - omega_d_eff) / k - sigma
    return baseline + peak_shift * lineshape(x, sigma)


@dataclass(frozen=True)
class KerrFit1D:
    omega_d_eff: float
    omega_m_shift: float
    kappa: float
    sigma: float
    residual_rms: float
    omega_d_eff_err: float
    omega_m_shift_err: float
    power: float | None = None
    drive_power_sq: float | None = None
    baseline: float = 0.0

    @property
    def kerr_pull(self) -> float:
        """``eta * n_peak``: distance of the extremum below the bare mode."""
        return self.sigma * self.kappa / 2


def phase_to_shift(trace: SpectroscopyTrace, Q_M: float, omega_M: float) -> np.ndarray:
    return kerrdyn.invert_phase(trace.phase, Q_M, omega_M)


def _smooth(y, filter_sigma):
    return gaussian_filter1d(y, filter_sigma, mode="nearest", axis=-1) if filter_sigma else y


def fit_kerr_1d(trace: SpectroscopyTrace, Q_M: float, omega_M: float,
                filter_sigma: float = 3.0, kappa_hint: float | None = None,
                eta: float | None = None, rms_gate: float | None = None) -> KerrFit1D:
    """Fit one drive power: extremum location and monitor shift at the extremum.

    The model is a constant baseline plus the Kerr response.  The reported
    monitor shift is the absolute value at the extremum (baseline included),
    so a probe-phase offset moves it while leaving the location alone.
    The Gaussian filter is applied to data and model alike, so smoothing
    lowers noise without biasing the fitted shape.  ``eta`` (self-Kerr,
    positive for a down-pull) is only needed to report ``drive_power_sq``.
    """
    f = trace.pump_freqs
    y = phase_to_shift(trace, Q_M, omega_M)
    ys = _smooth(y, filter_sigma)
    step = float(np.median(np.diff(f)))
    b0 = float(np.median(np.concatenate([ys[:10], ys[-10:]])))
    i0 = int(np.argmax(np.abs(ys - b0)))
    a0 = float(ys[i0])
    if a0 == b0:
        raise FitError("flat Kerr trace")
    above = np.flatnonzero(np.abs(ys - b0) > abs(a0 - b0) / 2)
    k0 = kappa_hint or max(f[above[-1]] - f[above[0]], 2 * step)

    lim = 0.999 * kerrdyn.SIGMA_CRIT

    def resid(th):
        return _smooth(kerr_shift_model(f, *th), filter_sigma) - ys

    best = None
    for s0 in (0.0, 0.7, -0.7):
        x0 = np.array([f[i0], k0, s0, a0 - b0, b0])
        lo = [f[0], 1e-3 * k0, -lim, -np.inf, -np.inf]
        hi = [f[-1], 20 * k0, lim, np.inf, np.inf]
        x0 = np.clip(x0, np.array(lo) + 1e-12, np.array(hi) - 1e-12)
        try:
            r = least_squares(resid, x0, method="trf", bounds=(lo, hi),
                              x_scale=np.array([k0, k0, 1.0, abs(a0 - b0), abs(a0 - b0)]),
                              xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=400)
        except ValueError as exc:  # pragma: no cover - defensive
            log.debug("start %s failed: %s", s0, exc)
            continue
        if best is None or r.cost < best.cost:
            best = r
    if best is None or best.status <= 0:
        raise FitError("Kerr 1D fit did not converge")
    wd, kap, sig, peak, base = best.x
    if abs(sig) >= 0.99 * kerrdyn.SIGMA_CRIT:
        raise FitError(f"fitted response folds over (scaled drive {sig:.3f}); "
                       "bistable curves are not fitted")
    if not (f[0] + step <= wd <= f[-1] - step):
        raise FitError(f"Kerr extremum {wd:.5f} sits on the grid boundary")
    cov, rms = _covariance(best)
    if rms_gate is not None and rms > rms_gate:
        raise FitError(f"residual rms {rms:.3e} exceeds gate {rms_gate:.3e}")
    e2 = None
    if eta:
        k = kap / 2
        e2 = float(sig * k / eta * k**2)
    at_extremum = peak + base
    err_m = math.sqrt(max(cov[3, 3] + cov[4, 4] + 2 * cov[3, 4], 0))
    return KerrFit1D(float(wd), float(at_extremum), float(kap), float(sig), rms,
                     float(math.sqrt(max(cov[0, 0], 0))), float(err_m),
                     trace.power, e2, float(base))


@dataclass(frozen=True)
class KerrFit2D:
    omega_d: float
    kappa: float
    self_pull_rate: float
    cross_pull_rate: float
    phase_offsets: np.ndarray = field(compare=False)
    residual_rms: float
    covariance: np.ndarray = field(repr=False, compare=False)
    powers: np.ndarray = field(repr=False, compare=False)
    eta: float | None = None
    zeta: float | None = None

    @property
    def parameter_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    @property
    def phase_offset_errors(self) -> np.ndarray:
        return self.parameter_errors[4:]

    def extrema(self, power):
        """Implied ``(omega_D', omega_M' - omega_M)`` at ``power`` (linear in P)."""
        p = np.asarray(power, float)
        return self.omega_d - self.self_pull_rate * p, self.cross_pull_rate * p

    @property
    def slope_d(self) -> tuple[float, float]:
        e = self.parameter_errors
        return -self.self_pull_rate, float(e[2])

    @property
    def slope_m(self) -> tuple[float, float]:
        e = self.parameter_errors
        return self.cross_pull_rate, float(e[3])


def fit_kerr_2d(traces: Sequence[SpectroscopyTrace], Q_M: float, omega_M: float,
                filter_sigma: float = 3.0, chi_cross: float | None = None,
                initial: Sequence[KerrFit1D] | None = None) -> KerrFit2D:
    """Global fit of all powers with one phase offset per power.

    Shared parameters are the bare drive frequency, its linewidth, and the
    pull rates ``eta*zeta/k^2`` (self) and ``chi_DM*zeta/k^2`` (cross), both
    per nW with ``k = kappa/2``.  ``eta`` and ``zeta`` only separate when
    the cross-Kerr coefficient ``chi_cross`` is supplied.
    """
    if len(traces) < 3:
        raise FitError("2D fit needs at least 3 drive powers")
    f = traces[0].pump_freqs
    if any(t.pump_freqs.shape != f.shape or not np.allclose(t.pump_freqs, f) for t in traces):
        raise FitError("2D fit needs a shared pump grid")
    P = np.array([t.power for t in traces])
    if len(np.unique(P)) < 3:
        raise FitError("2D fit is rank deficient with fewer than 3 distinct powers")
    data = _smooth(np.array([t.phase for t in traces]), filter_sigma)

    if initial is None:
        initial = [fit_kerr_1d(t, Q_M, omega_M, filter_sigma) for t in traces]
    wd = np.array([r.omega_d_eff for r in initial])
    sh = np.array([r.omega_m_shift for r in initial])
    ps, w0 = np.polyfit(P, wd, 1)
    pc = float(np.sum(P * sh) / np.sum(P * P))
    k0 = float(np.median([r.kappa for r in initial]))
    K = len(traces)
    lim = 0.999 * kerrdyn.SIGMA_CRIT

    def model(th):
        w_d, kap, r_s, r_c = th[:4]
        k = kap / 2
        sig = np.clip(r_s * P / k, -lim, lim)  # pull / k
        peak = r_c * P
        x = (f[None, :] - (w_d - r_s * P)[:, None]) / k - sig[:, None]
        shift = peak[:, None] * lineshape(x, np.broadcast_to(sig[:, None], x.shape))
        ph = kerrdyn.phase_response(omega_M, omega_M + shift, Q_M)
        return _smooth(ph, filter_sigma) + th[4:, None]

    def resid(th):
        return wrap_phase(model(th) - data).ravel()

    x0 = np.concatenate([[w0, k0, -ps, pc], np.zeros(K)])
    scale = np.concatenate([[k0, k0, max(abs(ps), 1e-9), max(abs(pc), 1e-9)], np.full(K, 0.1)])
    n_f = f.size
    offset_block = np.kron(np.eye(K), np.ones((n_f, 1)))

    def jac(th):
        # shared columns by central differences, offsets are exact indicators
        J = np.empty((K * n_f, th.size))
        for j in range(4):
            h = 1e-6 * scale[j]
            up, dn = th.copy(), th.copy()
            up[j] += h
            dn[j] -= h
            J[:, j] = (resid(up) - resid(dn)) / (2 * h)
        J[:, 4:] = offset_block
        return J

    res = least_squares(resid, x0, jac=jac, method="lm", x_scale=scale,
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    if not res.success:
        raise FitError(f"2D fit did not converge: {res.message}")
    th = res.x
    cov, rms = _covariance(res)
    if np.max(np.abs(th[2] * P / (th[1] / 2))) >= 0.99 * kerrdyn.SIGMA_CRIT:
        raise FitError("2D fit entered the bistable regime")
    eta = zeta = None
    if chi_cross:
        k = th[1] / 2
        zeta = float(th[3] * k * k / chi_cross)
        eta = float(th[2] * k * k / zeta)
    return KerrFit2D(float(th[0]), float(th[1]), float(th[2]), float(th[3]),
                     th[4:].copy(), rms, cov, P, eta, zeta)


# ---------------------------------------------------------------- slopes

@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    intercept: float
    intercept_err: float
    chi2_red: float
    n: int


def fit_slope(x: Sequence[float], y: Sequence[float],
              sigma: Sequence[float] | None = None) -> SlopeFit:
    """Straight-line fit.

    With ``sigma`` the fit is weighted and the covariance is inflated by the
    reduced chi-square when that exceeds one.  Without it (or if any sigma
    is nonpositive) the residual scatter sets the errors.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = len(x)
    if n < 3 or len(y) != n:
        raise ValueError("fit_slope needs at least 3 (x, y) points")
    if np.ptp(x) == 0:
        raise ValueError("degenerate abscissa: all x equal")
    weighted = sigma is not None and np.all(np.asarray(sigma, float) > 0)
    w = 1 / np.asarray(sigma, float) ** 2 if weighted else np.ones(n)
    S, Sx, Sy = w.sum(), (w * x).sum(), (w * y).sum()
    Sxx, Sxy = (w * x * x).sum(), (w * x * y).sum()
    D = S * Sxx - Sx * Sx
    slope = (S * Sxy - Sx * Sy) / D
    icpt = (Sxx * Sy - Sx * Sxy) / D
    r = y - (icpt + slope * x)
    chi2 = float((w * r * r).sum() / (n - 2))
    factor = max(1.0, chi2) if weighted else chi2
    return SlopeFit(float(slope), float(math.sqrt(S / D * factor)), float(icpt),
                    float(math.sqrt(Sxx / D * factor)), chi2, n)


# ---------------------------------------------------------------- couplings

@dataclass(frozen=True)
class CouplingEstimate:
    g_drive: float
    g_drive_err: float
    g_monitor: float
    g_monitor_err: float
    slope_q: float
    slope_d: float
    slope_m: float
    slope_errs: tuple[float, float, float]
    delta_D: float
    delta_M: float
    alpha: float
    pair_id: tuple[str, str] = ("D", "M")
    qubit_freq: float | None = None
    error_mode: str = "stat"

    def to_dict(self) -> dict[str, Any]:
        return {
            "pair": list(self.pair_id), "qubit_freq_MHz": self.qubit_freq,
            "g_drive_MHz": self.g_drive, "g_drive_err_MHz": self.g_drive_err,
            "g_monitor_MHz": self.g_monitor, "g_monitor_err_MHz": self.g_monitor_err,
            "slope_q_MHz_per_nW": self.slope_q, "slope_q_err_MHz_per_nW": self.slope_errs[0],
            "slope_d_kHz_per_nW": 1e3 * self.slope_d,
            "slope_d_err_kHz_per_nW": 1e3 * self.slope_errs[1],
            "slope_m_kHz_per_nW": 1e3 * self.slope_m,
            "slope_m_err_kHz_per_nW": 1e3 * self.slope_errs[2],
            "delta_D_MHz": self.delta_D, "delta_M_MHz": self.delta_M,
            "alpha_MHz": self.alpha, "error_mode": self.error_mode,
        }


def drive_ratio_factor(delta_D: float, alpha: float) -> float:
    """``g_D^2 / (slope_d/slope_q)``."""
    den = alpha - delta_D
    if den == 0 or delta_D == 0 or alpha == 2 * delta_D:
        raise ZeroDivisionError("pole in the drive-coupling ratio formula")
    return delta_D**2 * (alpha - 2 * delta_D) / den


def monitor_ratio_factor(delta_D: float, delta_M: float, alpha: float) -> float:
    """``g_M^2 / (slope_m/slope_q)``."""
    den = (delta_D + delta_M) * (alpha - delta_D)
    if den == 0 or delta_D == 0 or delta_M == 0 or alpha == delta_D + delta_M:
        raise ZeroDivisionError("pole in the monitor-coupling ratio formula")
    return delta_D * delta_M**2 * (alpha - delta_D - delta_M) / den


def _root_with_error(g2, g2_err, what):
    tol = 1e-12 * max(abs(g2), 1e-300)
    if g2 < -max(g2_err, tol):
        raise InconsistentSignsError(
            f"{what}: slope signs give g^2 = {g2:.4g} < 0; check the slope signs "
            "or the detuning convention (omega_q - omega_mode)")
    g2 = max(g2, 0.0)
    g = math.sqrt(g2)
    err = g2_err / (2 * g) if g > 0 else math.sqrt(g2_err)
    return g, err


def extract_couplings(slope_q: float, slope_d: float, slope_m: float, delta_D: float,
                      delta_M: float, alpha: float,
                      slope_errs: Sequence[float] = (0.0, 0.0, 0.0),
                      error_mode: str = "stat", pair_id: tuple[str, str] = ("D", "M"),
                      qubit_freq: float | None = None) -> CouplingEstimate:
    """Drive and monitor couplings from the three slopes (all MHz/nW).

    ``g_D^2 = (slope_d/slope_q) Delta_D^2 (alpha - 2 Delta_D)/(alpha - Delta_D)`` and
    ``g_M^2 = (slope_m/slope_q) Delta_D Delta_M^2 (alpha - Delta_D - Delta_M)
    / ((Delta_D + Delta_M)(alpha - Delta_D))``.  The ratios carry no extra
    sign: a negative ``g^2`` means the inputs are inconsistent.
    """
    if slope_q == 0:
        raise ZeroDivisionError("AC-Stark slope must be nonzero")
    if error_mode not in ("stat", "hardware"):
        raise ValueError(f"unknown error_mode {error_mode!r}")
    eq, ed, em = (abs(float(e)) for e in slope_errs)
    rd, rm = slope_d / slope_q, slope_m / slope_q
    Fd = drive_ratio_factor(delta_D, alpha)
    Fm = monitor_ratio_factor(delta_D, delta_M, alpha)
    # delta-method error on each ratio
    rd_err = math.hypot(ed / abs(slope_q), abs(rd) * eq / abs(slope_q))
    rm_err = math.hypot(em / abs(slope_q), abs(rm) * eq / abs(slope_q))
    gD, gD_err = _root_with_error(rd * Fd, abs(Fd) * rd_err, "drive")
    gM, gM_err = _root_with_error(rm * Fm, abs(Fm) * rm_err, "monitor")
    if error_mode == "hardware":
        gD_err = math.hypot(gD_err, HARDWARE_FLOOR_DRIVE)
        gM_err = math.hypot(gM_err, HARDWARE_FLOOR_MONITOR)
    return CouplingEstimate(gD, gD_err, gM, gM_err, float(slope_q), float(slope_d),
                            float(slope_m), (eq, ed, em), float(delta_D), float(delta_M),
                            float(alpha), tuple(pair_id), qubit_freq, error_mode)


# ---------------------------------------------------------------- consistency

def _mode_rows(estimates: Iterable[CouplingEstimate]):
    rows = []
    for e in estimates:
        d, m = e.pair_id
        rows.append((d, "drive", e.g_drive, e.g_drive_err, e))
        rows.append((m, "monitor", e.g_monitor, e.g_monitor_err, e))
    return rows


def power_law_exponent(freqs: Sequence[float], g: Sequence[float],
                       g_err: Sequence[float] | None = None) -> SlopeFit:
    """Fit ``log g = a + p log omega_q``; returns the fit with ``slope = p``."""
    lf, lg = np.log(np.asarray(freqs, float)), np.log(np.asarray(g, float))
    sig = None
    if g_err is not None:
        s = np.asarray(g_err, float) / np.asarray(g, float)
        sig = s if np.all(s > 0) else None
    return fit_slope(lf, lg, sig)


def consistency_report(estimates: Sequence[CouplingEstimate],
                       noise_bound: float | None = None,
                       bound_factor: float | None = None) -> dict[str, Any]:
    """Per-mode aggregation over mode pairs, plus detuning-sweep statistics.

    A mode's spread (max - min of its estimates) is checked against
    ``noise_bound`` (MHz) if given, or else against ``bound_factor`` times
    ``hypot`` of the two largest errors among that mode's estimates, the
    scale of the widest noise-only difference.

    Estimates of one pair at several qubit frequencies form a sweep; its
    flatness is the reduced chi-square about the weighted mean, and the
    fitted power-law exponent is compared with the ``sqrt(omega_q)`` trend.
    """
    if len(estimates) < 2:
        raise ValueError("consistency_report needs at least 2 estimates")
    per_mode: dict[str, Any] = {}
    for name, role, g, err, e in _mode_rows(estimates):
        per_mode.setdefault(name, []).append(
            {"pair": list(e.pair_id), "role": role, "g_MHz": g, "err_MHz": err,
             "qubit_freq_MHz": e.qubit_freq})
    modes = {}
    for name, entries in sorted(per_mode.items()):
        gs = np.array([x["g_MHz"] for x in entries])
        es = np.array([x["err_MHz"] for x in entries])
        modes[name] = {
            "n": len(gs), "mean_MHz": float(gs.mean()),
            "std_MHz": float(gs.std(ddof=1)) if len(gs) > 1 else 0.0,
            "min_MHz": float(gs.min()), "max_MHz": float(gs.max()),
            "spread_MHz": float(np.ptp(gs)), "entries": entries,
        }
        if len(gs) > 1 and np.all(es > 0):
            w = 1 / es**2
            mean = (w * gs).sum() / w.sum()
            modes[name]["chi2_red"] = float((w * (gs - mean) ** 2).sum() / (len(gs) - 1))
        bound = noise_bound
        if bound is None and bound_factor is not None and len(gs) > 1:
            top = np.sort(es)[-2:]
            bound = float(bound_factor * math.hypot(*top))
        if bound is not None:
            modes[name]["spread_bound_MHz"] = bound
            modes[name]["within_bound"] = bool(np.ptp(gs) <= bound)

    pairs: dict[tuple, list[CouplingEstimate]] = {}
    for e in estimates:
        pairs.setdefault(tuple(e.pair_id), []).append(e)
    sweeps = {}
    for pid, group in sorted(pairs.items()):
        freqs = [e.qubit_freq for e in group]
        if len(group) < 3 or any(q is None for q in freqs) or len(set(freqs)) < 3:
            continue
        order = np.argsort(freqs)
        wq = np.array(freqs, float)[order]
        entry = {"qubit_freq_MHz": wq.tolist()}
        for role in ("drive", "monitor"):
            g = np.array([getattr(group[i], f"g_{role}") for i in order])
            ge = np.array([getattr(group[i], f"g_{role}_err") for i in order])
            w = 1 / ge**2 if np.all(ge > 0) else np.ones_like(g)
            mean = float((w * g).sum() / w.sum())
            chi2 = float((w * (g - mean) ** 2).sum() / (len(g) - 1)) if np.all(ge > 0) else None
            pl = power_law_exponent(wq, g, ge if np.all(ge > 0) else None)
            expected = float(math.sqrt(wq[-1] / wq[0]) - 1)
            entry[role] = {
                "g_MHz": g.tolist(), "err_MHz": ge.tolist(), "weighted_mean_MHz": mean,
                "relative_spread": float(np.ptp(g) / mean), "flatness_chi2_red": chi2,
                "exponent": pl.slope, "exponent_err": pl.stderr,
                "sqrt_trend_expected_relative_change": expected,
                "sqrt_trend_resolved": bool(abs(pl.slope - 0.5) < 2 * pl.stderr
                                            and abs(pl.slope) > 2 * pl.stderr),
            }
        sweeps["/".join(pid)] = entry
    return {"modes": modes, "pairs": [e.to_dict() for e in estimates], "sweeps": sweeps}
