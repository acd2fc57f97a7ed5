"""Theory checks: perturbation engine and closed forms against independent oracles.

These back the ``sw-check`` report.  Exact eigenvalues for the order-scaling
test come from mpmath at 40 digits, so the fifth-order residual is not
swamped by double-precision rounding.
"""

from __future__ import annotations

import warnings
from typing import Any

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from . import kerrdyn, swpt
from .device import DeviceSpec, Mode
from .fockspace import DispersiveRegimeWarning, exact_coefficients

MP_DIGITS = 40


def random_system(rng: np.random.Generator, dim: int, v_norm: float = 0.05,
                  min_gap: float = 1.0):
    """Diagonal H0 with gaps >= ``min_gap`` and a Hermitian zero-diagonal V."""
    E = np.cumsum(min_gap + rng.random(dim))
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    A = (A + A.conj().T) / 2
    np.fill_diagonal(A, 0)
    A *= v_norm / np.linalg.norm(A, 2)
    return E, A


def _exact_eigs(E, V) -> list:
    with mpmath.workdps(MP_DIGITS):
        n = len(E)
        H = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                H[i, j] = mpmath.mpc(V[i, j].real, V[i, j].imag)
            H[i, i] += mpmath.mpf(E[i])
        w = mpmath.eighe(H, eigvals_only=True)
        return sorted(w[i] for i in range(n))


def order_scaling(n_systems: int = 10, seed: int = 2024, dims=(6, 10),
                  eps=None) -> dict[str, Any]:
    """Fitted exponent of the 4th-order residual versus perturbation scale.

    For each random system the coupling is scaled by ``eps`` (halving over
    one decade), the corrected energy ``E + diag(H2+H3+H4)`` is compared
    with exact eigenvalues, and log(residual) is fitted against log(eps).
    """
    eps = np.geomspace(1.0, 0.1, 5) if eps is None else np.asarray(eps)
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(n_systems):
        dim = int(rng.integers(dims[0], dims[1] + 1))
        E, A = random_system(rng, dim)
        res = []
        for e in eps:
            V = e * A
            corr = swpt.sw_corrections(E, V)
            approx = E + corr.shifts(4)
            # E sorted and the shifts are tiny, so ordering is preserved
            exact = _exact_eigs(E, V)
            with mpmath.workdps(MP_DIGITS):
                r = max(abs(exact[i] - mpmath.mpf(approx[i])) for i in range(dim))
            res.append(float(r))
        slope = float(np.polyfit(np.log(eps), np.log(res), 1)[0])
        rows.append({"system": k, "dim": dim, "exponent": slope, "residuals": res})
    ex = [r["exponent"] for r in rows]
    return {"eps": eps.tolist(), "systems": rows, "min_exponent": min(ex),
            "max_exponent": max(ex), "mean_exponent": float(np.mean(ex))}


def _single_mode_spec(g, delta, alpha, omega_q=4593.0):
    return DeviceSpec(omega_q, alpha, (Mode("D", omega_q - delta, g),))


def stark_self_vs_exact(ratios, delta: float = -404.0, alpha: float = 113.0):
    """Single-mode Stark and self-Kerr: closed form vs exact diagonalization."""
    rows = []
    for r in ratios:
        g = r * abs(delta)
        spec = _single_mode_spec(g, delta, alpha)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DispersiveRegimeWarning)
            ex = exact_coefficients(spec, ["D"], mode_levels=6, qubit_levels=7)
        cs = swpt.chi_stark(g, delta, alpha)
        ck = swpt.kerr_self(g, delta, alpha)
        rows.append({"g_over_delta": float(r), "stark_closed": cs, "stark_exact": ex.chi_stark_D,
                     "stark_rel_err": abs(cs / ex.chi_stark_D - 1),
                     "self_closed": ck, "self_exact": ex.chi_DD,
                     "self_rel_err": abs(ck / ex.chi_DD - 1)})
    return rows


def cross_vs_exact(ratios, omega_d: float = 4997.0, omega_m: float = 4450.0,
                   omega_q: float = 4593.0, alpha: float = 113.0):
    """Cross-Kerr with the qubit between the two modes, ``g_j = r |Delta_j|``."""
    rows = []
    for r in ratios:
        dD, dM = omega_q - omega_d, omega_q - omega_m
        gD, gM = r * abs(dD), r * abs(dM)
        spec = DeviceSpec(omega_q, alpha, (Mode("D", omega_d, gD), Mode("M", omega_m, gM)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DispersiveRegimeWarning)
            ex = exact_coefficients(spec, ["D", "M"], mode_levels=5, qubit_levels=6)
        cc = swpt.kerr_cross(gD, gM, dD, dM, alpha)
        rows.append({"g_over_delta": float(r), "cross_closed": cc, "cross_exact": ex.chi_DM,
                     "cross_rel_err": abs(cc / ex.chi_DM - 1)})
    return rows


def loglog_slope(ratios, errs) -> float:
    return float(np.polyfit(np.log(ratios), np.log(errs), 1)[0])


def level1_vs_engine(n_sets: int = 100, seed: int = 7) -> dict[str, Any]:
    """Level-1 closed forms against the numeric engine on random dispersive sets."""
    rng = np.random.default_rng(seed)
    worst = {"self": 0.0, "cross": 0.0, "stark": 0.0}
    for _ in range(n_sets):
        alpha = rng.uniform(80, 350)
        dA, dB = -rng.uniform(250, 900, 2)
        gA, gB = rng.uniform(0.01, 0.05, 2) * np.abs([dA, dB])
        cf = swpt.kerr_excited(1, gA, gB, dA, dB, alpha)
        nu = swpt.numeric_kerr_coefficients(gA, gB, dA, dB, alpha, level=1)
        worst["self"] = max(worst["self"], abs(cf.chi_self / nu.chi_self - 1))
        worst["cross"] = max(worst["cross"], abs(cf.chi_cross / nu.chi_cross - 1))
        worst["stark"] = max(worst["stark"], abs(cf.chi_stark / nu.chi_stark - 1))
    return {"n_sets": n_sets, "max_rel_err": worst}


def tls_limits(g=14.2, gb=12.8, delta=-404.0, delta_b=-376.0) -> dict[str, Any]:
    """Closed forms at ``alpha = 1e4 |Delta|`` against two-level-qubit values."""
    alpha = 1e4 * max(abs(delta), abs(delta_b))
    out = {}
    for level, sz in ((0, -1.0), (1, 1.0)):
        cf = swpt.kerr_excited(level, g, gb, delta, delta_b, alpha)
        ts = swpt.tls_kerr_self(g, delta, sz)
        tc = swpt.tls_kerr_cross(g, gb, delta, delta_b, sz)
        out[f"level{level}"] = {"self": cf.chi_self, "self_tls": ts,
                                "self_rel_err": abs(cf.chi_self / ts - 1),
                                "cross": cf.chi_cross, "cross_tls": tc,
                                "cross_rel_err": abs(cf.chi_cross / tc - 1)}
    st = swpt.chi_stark(g, delta, alpha)
    out["stark"] = {"value": st, "tls": swpt.tls_stark(g, delta),
                    "rel_err": abs(st / swpt.tls_stark(g, delta) - 1)}
    lin = swpt.kerr_excited(1, g, gb, delta, delta_b, 0.0)
    out["linear_limit_level1"] = {"self": lin.chi_self, "cross": lin.chi_cross}
    return out


def _mp_disc(x, s):
    return -4 * (x * x + 1) ** 2 - 4 * s * x**3 - 36 * s * x - 27 * s * s


def max_scaled_discriminant(sigma) -> float:
    """Largest scaled discriminant over detuning, at ``MP_DIGITS`` precision.

    Near threshold the maximum is many orders below the individual terms,
    so double precision cannot resolve its sign.  Stationary points are the
    real roots of the cubic ``dD/dx``.
    """
    with mpmath.workdps(MP_DIGITS):
        s = mpmath.mpf(sigma)
        roots = mpmath.polyroots([-16, -12 * s, -16, -36 * s], maxsteps=200, extraprec=200)
        xs = [r.real for r in roots if abs(r.imag) < mpmath.mpf(10) ** (-MP_DIGITS // 3)]
        return float(max(_mp_disc(x, s) for x in xs))


def _threshold_sigma():
    with mpmath.workdps(MP_DIGITS):
        lo, hi = mpmath.mpf(1), mpmath.mpf(2)
        for _ in range(120):
            mid = (lo + hi) / 2
            if max_scaled_discriminant(mid) > 0:
                hi = mid
            else:
                lo = mid
        return float((lo + hi) / 2)


def critical_point_resolution(kappa: float = 0.1, eta: float = 1e-5,
                              probe: float = 1e-6) -> dict[str, Any]:
    """Locate the bistability threshold from the discriminant and compare formulas.

    The threshold is the scaled drive at which the discriminant maximum over
    detuning turns positive, bisected at ``MP_DIGITS`` precision.
    Drives ``probe`` below and above it check where three roots appear.
    The peak photon number there is compared with both candidate critical
    photon numbers.
    """
    k = kappa / 2
    s_c = _threshold_sigma()
    formula = kerrdyn.critical_drive(kappa, eta) ** 2
    e2_num = s_c * k**3 / abs(eta)
    s_formula = abs(eta) * formula / k**3
    below = max_scaled_discriminant(s_formula * (1 - probe))
    above = max_scaled_discriminant(s_formula * (1 + probe))
    n_peak = kerrdyn.peak_photon_number(kappa, e2_num)
    printed = 4 * kappa / (27 * abs(eta))
    derived = 4 * kappa / (3**1.5 * abs(eta))
    return {
        "kappa_MHz": kappa, "eta_MHz": eta,
        "E_crit_sq_formula": formula, "E_crit_sq_discriminant": e2_num,
        "E_crit_rel_diff": abs(e2_num / formula - 1),
        "probe_rel": probe, "max_discriminant_below": below,
        "max_discriminant_above": above,
        "three_roots_only_above": bool(below < 0 < above),
        "n_peak_at_threshold": n_peak,
        "n_crit_4k_over_27eta": printed, "n_crit_4k_over_3p1.5eta": derived,
        "rel_diff_printed": abs(n_peak / printed - 1),
        "rel_diff_derived": abs(n_peak / derived - 1),
        "honored": "4 kappa / (3^1.5 eta)",
        "fold_photon_number": kerrdyn.fold_photon_number(kappa, eta),
    }


def kerr_peak_check(kappa=0.1, eta=1e-5, fraction=0.5) -> dict[str, float]:
    """Maximum photon number over detuning versus ``|E|^2/(kappa/2)^2``."""
    e2 = fraction * kerrdyn.critical_drive(kappa, eta) ** 2
    target = kerrdyn.peak_photon_number(kappa, e2)
    pull = -eta * target
    r = minimize_scalar(lambda d: -kerrdyn.steady_state(
        kerrdyn.KerrDriveParams(d, kappa, eta, e2)).n_bar,
        bounds=(pull - kappa, pull + kappa), method="bounded", options={"xatol": 1e-12})
    return {"n_max": -r.fun, "n_expected": target, "rel_err": abs(-r.fun / target - 1),
            "delta_at_max": r.x, "delta_expected": pull}


def sw_check_report(n_systems: int = 10, seed: int = 2024) -> dict[str, Any]:
    ratios = [0.01, 0.02, 0.04, 0.07, 0.1]
    sk = stark_self_vs_exact(ratios)
    cx = cross_vs_exact(ratios)
    scaling = order_scaling(n_systems, seed)
    return {
        "order_scaling": scaling,
        "closed_vs_exact": {
            "stark_self": sk, "cross": cx,
            "stark_loglog_slope": loglog_slope(ratios, [r["stark_rel_err"] for r in sk]),
            "self_loglog_slope": loglog_slope(ratios, [r["self_rel_err"] for r in sk]),
            "cross_loglog_slope": loglog_slope(ratios, [r["cross_rel_err"] for r in cx]),
        },
        "level1": level1_vs_engine(),
        "tls_limits": tls_limits(),
        "kerr_critical": critical_point_resolution(),
        "kerr_peak": kerr_peak_check(),
        "exponent_target": {"value": 5.0, "tolerance": 0.2,
                            "pass": bool(abs(scaling["min_exponent"] - 5) <= 0.2
                                         and abs(scaling["max_exponent"] - 5) <= 0.2)},
    }
