"""Semiclassical driven-damped Kerr resonator and the sensor phase response.

In the frame of the drive, with ``delta = omega_dr - omega_mode`` and self-Kerr
``eta`` (positive when photons pull the mode down), the mean photon number
``n`` solves

    eta^2 n^3 + 2 eta delta n^2 + (delta^2 + kappa^2/4) n - |E|^2 = 0.

With ``k = kappa/2`` this reads ``v^3 + 2x v^2 + (x^2+1) v - sigma = 0`` in the
scaled variables ``x = delta/k``, ``v = eta n/k``, ``sigma = eta |E|^2/k^3``.
The classical intracavity amplitude is called ``amplitude`` here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

SIGMA_CRIT = 8 / 3**1.5
ROOT_RTOL = 1e-10


@dataclass(frozen=True)
class KerrDriveParams:
    delta_dr: float
    kappa: float
    eta: float
    drive_power_sq: float
    kappa_out: float | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.drive_power_sq < 0:
            raise ValueError("drive_power_sq must be nonnegative")
        if self.kappa_out is None:
            object.__setattr__(self, "kappa_out", self.kappa)
        if not 0 <= self.kappa_out <= self.kappa:
            raise ValueError("kappa_out must lie in [0, kappa]")

    @property
    def sigma(self) -> float:
        return self.eta * self.drive_power_sq / (self.kappa / 2) ** 3

    def at(self, delta_dr: float) -> "KerrDriveParams":
        return KerrDriveParams(delta_dr, self.kappa, self.eta, self.drive_power_sq,
                               self.kappa_out)


@dataclass(frozen=True)
class SteadyState:
    photon_roots: tuple[float, ...]
    selected: int
    transmitted: complex
    bistable: bool

    @property
    def n_bar(self) -> float:
        return self.photon_roots[self.selected]


def cubic_coefficients(p: KerrDriveParams) -> np.ndarray:
    d, k2 = p.delta_dr, (p.kappa / 2) ** 2
    return np.array([p.eta**2, 2 * p.eta * d, d * d + k2, -p.drive_power_sq])


def cubic_residual(p: KerrDriveParams, n: float) -> float:
    """Relative residual: ``|f(n)|`` over the sum of the term magnitudes."""
    c = cubic_coefficients(p)
    terms = c * np.array([n**3, n**2, n, 1.0])
    scale = np.sum(np.abs(terms))
    return float(abs(terms.sum()) / scale) if scale > 0 else 0.0


def scaled_discriminant(x, sigma):
    """Discriminant of ``v^3 + 2x v^2 + (x^2+1) v - sigma``; > 0 means three real roots."""
    x = np.asarray(x, dtype=float)
    return (-4 * (x * x + 1) ** 2 - 4 * sigma * x**3 - 36 * sigma * x - 27 * sigma**2)


def cubic_discriminant(p: KerrDriveParams) -> float:
    """Discriminant of the photon-number cubic in physical units."""
    a, b, c, d = cubic_coefficients(p)
    return float(18 * a * b * c * d - 4 * b**3 * d + b * b * c * c
                 - 4 * a * c**3 - 27 * a * a * d * d)


def _newton_polish(coeffs, n, iters=4):
    a, b, c, d = coeffs
    for _ in range(iters):
        f = ((a * n + b) * n + c) * n + d
        fp = (3 * a * n + 2 * b) * n + c
        if fp == 0:
            break
        step = f / fp
        n_new = n - step
        if not np.isfinite(n_new):
            break
        n = n_new
        if abs(step) <= 1e-16 * abs(n):
            break
    return n


def _positive_roots(p: KerrDriveParams) -> tuple[list[float], bool]:
    if p.drive_power_sq == 0:
        return [0.0], False
    if p.eta == 0:
        return [p.drive_power_sq / (p.delta_dr**2 + (p.kappa / 2) ** 2)], False
    k = p.kappa / 2
    x, s = p.delta_dr / k, p.sigma
    # solve in scaled form so the companion matrix is well conditioned
    sc = np.array([1.0, 2 * x, x * x + 1, -s])
    raw = np.roots(sc)
    three = scaled_discriminant(x, s) > 0
    if three:
        vs = sorted(float(r.real) for r in raw)
    else:
        vs = [float(raw[np.argmin(np.abs(raw.imag))].real)]
    phys = cubic_coefficients(p)
    roots = sorted(_newton_polish(phys, v * k / p.eta) for v in vs)
    return roots, three


def steady_state(p: KerrDriveParams, branch: Literal["low", "high", "previous"] = "low",
                 previous: float | None = None) -> SteadyState:
    """All real steady-state photon numbers and the selected branch.

    ``branch="previous"`` picks the root closest to ``previous`` (for sweeps
    that follow a branch through the bistable window).
    """
    roots, bistable = _positive_roots(p)
    assert roots and all(r >= 0 for r in roots), "cubic must have a nonnegative root"
    for r in roots:
        res = cubic_residual(p, r)
        if res >= ROOT_RTOL:
            raise ArithmeticError(f"cubic root {r} has residual {res:.2e}")
    if branch == "low":
        sel = 0
    elif branch == "high":
        sel = len(roots) - 1
    elif branch == "previous":
        if previous is None:
            sel = 0
        else:
            sel = int(np.argmin([abs(r - previous) for r in roots]))
    else:
        raise ValueError(f"unknown branch {branch!r}")
    n = roots[sel]
    amp = transmitted_amplitude(p, n)
    return SteadyState(tuple(roots), sel, amp, bistable)


def transmitted_amplitude(p: KerrDriveParams, n: float) -> complex:
    """Input-output field for drive amplitude ``sqrt(|E|^2)`` (real phase)."""
    E = math.sqrt(p.drive_power_sq)
    return 1j * math.sqrt(p.kappa_out) * E / (p.kappa / 2 + 1j * (p.delta_dr + p.eta * n))


def critical_drive(kappa: float, eta: float) -> float:
    """``|E_crit|``: the weakest drive with a three-root (bistable) window."""
    if eta == 0:
        raise ValueError("eta = 0: a linear resonator is never bistable")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return math.sqrt(kappa**3 / (3**1.5 * abs(eta)))


def critical_detuning(kappa: float, eta: float) -> float:
    """Drive detuning at which the bistable window opens."""
    return -math.copysign(math.sqrt(3) * kappa / 2, eta)


def critical_photon_number(kappa: float, eta: float) -> float:
    """Peak photon number ``|E_crit|^2/(kappa/2)^2 = 4 kappa/(3^{3/2} eta)``."""
    return critical_drive(kappa, eta) ** 2 / (kappa / 2) ** 2


def fold_photon_number(kappa: float, eta: float) -> float:
    """Photon number at the critical (triple-root) point, ``kappa/(sqrt(3) eta)``."""
    if eta == 0:
        raise ValueError("eta = 0 has no fold")
    return kappa / (math.sqrt(3) * abs(eta))


def peak_photon_number(kappa: float, drive_power_sq: float) -> float:
    return drive_power_sq / (kappa / 2) ** 2


def bistable_window(kappa: float, eta: float, drive_power_sq: float) -> tuple[float, float] | None:
    """Detuning interval with three real roots, or None below threshold.

    The edges are the real roots of the discriminant, a quartic in ``x``.
    """
    if eta == 0 or drive_power_sq == 0:
        return None
    k = kappa / 2
    s = eta * drive_power_sq / k**3
    quartic = [-4.0, -4 * s, -8.0, -36 * s, -4 - 27 * s * s]
    r = np.roots(quartic)
    real = np.sort(r[np.abs(r.imag) <= 1e-9 * np.maximum(1, np.abs(r))].real)
    if len(real) < 2:
        return None
    lo, hi = real[0], real[-1]
    if hi - lo <= 0 or scaled_discriminant(0.5 * (lo + hi), s) <= 0:
        return None
    return float(lo * k), float(hi * k)


def normalized_response(x, sigma) -> np.ndarray:
    """Low-branch scaled photon number ``v`` for arrays of ``x`` (vectorized).

    Cardano (one real root) or the trigonometric form (three real roots,
    smallest taken) supplies the start, then Newton polishes.
    """
    x = np.asarray(x, dtype=float)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), x.shape)
    b, c, d = 2 * x, x * x + 1, -sigma
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + d
    disc = (q / 2) ** 2 + (p / 3) ** 3
    v = np.empty_like(x)

    one = disc > 0
    if one.any():
        sq = np.sqrt(disc[one])
        qq = q[one]
        u = np.cbrt(-qq / 2 - np.copysign(sq, qq))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(u != 0, u - p[one] / (3 * u), 0.0)
        v[one] = t - b[one] / 3
    three = ~one
    if three.any():
        pm = np.minimum(p[three], 0.0)
        m = 2 * np.sqrt(-pm / 3)
        with np.errstate(divide="ignore", invalid="ignore"):
            arg = np.where(m > 0, 3 * q[three] / (pm * m), 0.0)
        theta = np.arccos(np.clip(arg, -1, 1)) / 3
        ts = np.stack([m * np.cos(theta - 2 * np.pi * j / 3) for j in range(3)])
        v[three] = ts.min(axis=0) - b[three] / 3
        # for negative sigma the roots are negative; the low branch is the
        # smallest |v|, i.e. the largest root
        neg = sigma[three] < 0
        if neg.any():
            v3 = v[three]
            v3[neg] = (ts.max(axis=0) - b[three] / 3)[neg]
            v[three] = v3

    small = np.abs(sigma) < 1e-3
    v[small] = sigma[small] / c[small]
    for _ in range(4):
        f = v * ((x + v) ** 2 + 1) - sigma
        fp = (x + v) ** 2 + 1 + 2 * v * (x + v)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(fp != 0, f / fp, 0.0)
        v = v - step
    return v


def photon_number_sweep(deltas: Sequence[float], kappa: float, eta: float,
                        drive_power_sq: float,
                        branch: Literal["low", "high", "previous"] = "low") -> np.ndarray:
    """n(delta) along a sweep; ``"previous"`` follows a branch (hysteresis)."""
    out = np.empty(len(deltas))
    prev = None
    for i, d in enumerate(deltas):
        st = steady_state(KerrDriveParams(float(d), kappa, eta, drive_power_sq), branch, prev)
        out[i] = prev = st.n_bar
    return out


def phase_response(omega_probe, omega_sensor_eff, Q):
    """Transmission phase of a sensor mode probed at ``omega_probe``."""
    omega_sensor_eff = np.asarray(omega_sensor_eff, dtype=float)
    if np.any(omega_sensor_eff <= 0) or Q <= 0:
        raise ValueError("sensor frequency and Q must be positive")
    return np.arctan(2 * Q * (omega_sensor_eff - omega_probe) / omega_sensor_eff)


def invert_phase(phi, Q: float, omega_sensor_bare: float, omega_probe: float | None = None):
    """Sensor frequency shift from a measured phase.

    Exact inverse of :func:`phase_response`; the probe defaults to the bare
    sensor frequency.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(np.abs(phi) >= np.pi / 2):
        raise ValueError("|phi| must be below pi/2")
    p = omega_sensor_bare if omega_probe is None else omega_probe
    return p / (1 - np.tan(phi) / (2 * Q)) - omega_sensor_bare


def write_response_csv(path: str | Path, base: KerrDriveParams, deltas: Sequence[float],
                       branch: Literal["low", "high", "previous"] = "low") -> None:
    prev = None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_dr_MHz", "n_bar", "re_out", "im_out", "phase_rad"])
        for d in deltas:
            st = steady_state(base.at(float(d)), branch, prev)
            prev = st.n_bar
            t = st.transmitted
            w.writerow([repr(float(d)), repr(st.n_bar), repr(t.real), repr(t.imag),
                        repr(float(np.angle(t)))])
