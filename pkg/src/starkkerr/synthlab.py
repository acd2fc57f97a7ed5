"""Synthetic two-tone spectroscopy: AC-Stark and Kerr scans.

AC-Stark scans put ``beta * P`` photons in the drive mode and sweep a
spectroscopy tone over the qubit, which shows up as a Gaussian dip centred on
the shifted qubit frequency.  Kerr scans sweep the drive tone across the
drive mode at fixed power and record the phase of a probe on the monitor mode,
whose frequency is pulled by the cross-Kerr shift.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence

import numpy as np

from . import kerrdyn, swpt
from .device import QUBIT, ConfigError, DeviceSpec

Kind = Literal["stark", "stark_monitor", "kerr"]


class BracketError(ValueError):
    """Scan grid does not contain the feature it is meant to locate."""


class BistableDriveError(ValueError):
    def __init__(self, power, sigma):
        self.power = power
        super().__init__(f"drive power {power:g} nW enters the bistable regime "
                         f"(scaled drive {sigma:.3f} >= {kerrdyn.SIGMA_CRIT:.4f})")


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ScanPlan:
    kind: Kind
    powers: np.ndarray
    pump_grid: np.ndarray
    probe_freq: float
    sensor_mode: str
    target: str
    noise_sigma: float = 0.0
    drift_rate: float = 0.0
    drive_mode: str | None = None
    line_width: float = 1.0
    line_depth: float = 0.5
    background: float = 1.0

    def __post_init__(self):
        if self.kind not in ("stark", "stark_monitor", "kerr"):
            raise ConfigError(f"unknown scan kind {self.kind!r}")
        p, g = _frozen(self.powers), _frozen(self.pump_grid)
        if p.ndim != 1 or len(p) == 0 or np.any(np.diff(p) <= 0):
            raise ConfigError("powers must be a nonempty strictly increasing sequence")
        if np.any(p < 0):
            raise ConfigError("powers must be nonnegative")
        if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
            raise ConfigError("pump_grid must be strictly increasing")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        if self.line_width <= 0:
            raise ConfigError("line_width must be positive")
        object.__setattr__(self, "powers", p)
        object.__setattr__(self, "pump_grid", g)
        if self.drive_mode is None:
            if self.kind == "kerr":
                object.__setattr__(self, "drive_mode", self.target)
            else:
                raise ConfigError("stark plans need a drive_mode")

    def with_(self, **changes) -> "ScanPlan":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind, "powers_nW": self.powers.tolist(),
            "pump_grid_MHz": self.pump_grid.tolist(), "probe_freq_MHz": self.probe_freq,
            "sensor_mode": self.sensor_mode, "target": self.target,
            "noise_sigma": self.noise_sigma, "drift_rate_rad": self.drift_rate,
            "drive_mode": self.drive_mode, "line_width_MHz": self.line_width,
            "line_depth": self.line_depth, "background": self.background,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScanPlan":
        return cls(kind=d["kind"], powers=d["powers_nW"], pump_grid=d["pump_grid_MHz"],
                   probe_freq=float(d["probe_freq_MHz"]), sensor_mode=d["sensor_mode"],
                   target=d["target"], noise_sigma=float(d.get("noise_sigma", 0.0)),
                   drift_rate=float(d.get("drift_rate_rad", 0.0)),
                   drive_mode=d.get("drive_mode"),
                   line_width=float(d.get("line_width_MHz", 1.0)),
                   line_depth=float(d.get("line_depth", 0.5)),
                   background=float(d.get("background", 1.0)))


@dataclass(frozen=True, eq=False)
class SpectroscopyTrace:
    power: float
    pump_freqs: np.ndarray
    magnitude: np.ndarray
    phase: np.ndarray
    truth: dict[str, float] | None = None
    kind: str = "stark"

    def __post_init__(self):
        f, m, ph = _frozen(self.pump_freqs), _frozen(self.magnitude), _frozen(self.phase)
        if not (len(f) == len(m) == len(ph)):
            raise ValueError("trace arrays must have equal length")
        object.__setattr__(self, "pump_freqs", f)
        object.__setattr__(self, "magnitude", m)
        object.__setattr__(self, "phase", ph)

    def with_phase(self, phase) -> "SpectroscopyTrace":
        return replace(self, phase=wrap_phase(phase))


def wrap_phase(phase) -> np.ndarray:
    """Map into (-pi, pi]."""
    p = np.asarray(phase, dtype=float)
    out = np.mod(p + np.pi, 2 * np.pi) - np.pi
    out[out == -np.pi] = np.pi
    return out


def _rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def gaussian_dip(f, center, width, depth, background):
    return background - depth * np.exp(-0.5 * ((np.asarray(f) - center) / width) ** 2)


def simulate_stark_scan(spec: DeviceSpec, plan: ScanPlan, rng_seed: int) -> list[SpectroscopyTrace]:
    """One trace per power with the qubit line at ``omega_q + chi_stark * beta * P``."""
    if plan.kind not in ("stark", "stark_monitor"):
        raise ConfigError(f"simulate_stark_scan needs a stark plan, got {plan.kind}")
    drive = plan.drive_mode
    chi = swpt.chi_stark(spec.mode(drive).g, spec.detuning(drive), spec.alpha)
    centers = spec.omega_q + chi * spec.beta * plan.powers
    lo, hi = plan.pump_grid[0], plan.pump_grid[-1]
    margin = 2 * plan.line_width
    bad = (centers < lo + margin) | (centers > hi - margin)
    if bad.any():
        i = int(np.argmax(bad))
        raise BracketError(f"qubit line at {centers[i]:.4f} MHz (P = {plan.powers[i]:g} nW) "
                           f"is not bracketed by the grid [{lo}, {hi}] with a "
                           f"{margin:g} MHz margin")
    traces = []
    f = plan.pump_grid
    for P, c, rng in zip(plan.powers, centers, _rngs(rng_seed, len(plan.powers))):
        noise_m = rng.normal(0.0, plan.noise_sigma, f.size) if plan.noise_sigma else 0.0
        noise_p = rng.normal(0.0, plan.noise_sigma, f.size) if plan.noise_sigma else 0.0
        shape = gaussian_dip(f, c, plan.line_width, plan.line_depth, 0.0)
        if plan.kind == "stark":
            mag = plan.background + shape + noise_m
            phase = np.zeros_like(f) + noise_p
        else:
            # dip read out as a phase excursion of the monitor probe
            mag = np.full_like(f, plan.background) + noise_m
            phase = shape + noise_p
        traces.append(SpectroscopyTrace(float(P), f, mag, wrap_phase(phase),
                                        truth={"omega_q_eff": float(c)}, kind=plan.kind))
    return traces


def kerr_truth(spec: DeviceSpec, drive: str, monitor: str, power: float) -> dict[str, float]:
    coeff = swpt.device_coefficients(spec, drive, monitor)
    d = spec.mode(drive)
    n_peak = kerrdyn.peak_photon_number(d.kappa, spec.drive_conversion(drive) * power)
    eta = -coeff.chi_DD
    return {"omega_d_eff": d.omega - eta * n_peak,
            "omega_m_eff": spec.mode(monitor).omega + coeff.chi_DM * n_peak,
            "n_peak": n_peak}


def simulate_kerr_scan(spec: DeviceSpec, plan: ScanPlan, rng_seed: int) -> list[SpectroscopyTrace]:
    """Monitor-probe phase versus drive frequency, one trace per drive power."""
    if plan.kind != "kerr":
        raise ConfigError(f"simulate_kerr_scan needs a kerr plan, got {plan.kind}")
    drive, monitor = plan.drive_mode, plan.sensor_mode
    if drive == monitor:
        raise ConfigError("drive and monitor modes must differ")
    d, m = spec.mode(drive), spec.mode(monitor)
    if d.kappa is None or m.Q is None:
        raise ConfigError("Kerr scans need kappa/Q on the drive and monitor modes")
    coeff = swpt.device_coefficients(spec, drive, monitor)
    eta = -coeff.chi_DD
    zeta = spec.drive_conversion(drive)
    k = d.kappa / 2
    for P in plan.powers:
        sigma = eta * zeta * P / k**3
        if abs(sigma) >= kerrdyn.SIGMA_CRIT:
            raise BistableDriveError(float(P), sigma)

    f = plan.pump_grid
    x = (f - d.omega) / k
    traces = []
    for P, rng in zip(plan.powers, _rngs(rng_seed, len(plan.powers))):
        E2 = zeta * P
        v = kerrdyn.normalized_response(x, eta * E2 / k**3)
        n = v * k / eta if eta != 0 else E2 / (k**2 * (x * x + 1))
        shift = coeff.chi_DM * n
        w_eff = m.omega + shift
        phase = kerrdyn.phase_response(plan.probe_freq, w_eff, m.Q)
        y = 2 * m.Q * (w_eff - plan.probe_freq) / w_eff
        mag = 1 / np.sqrt(1 + y * y)
        if plan.noise_sigma:
            mag = mag + rng.normal(0.0, plan.noise_sigma, f.size)
            phase = phase + rng.normal(0.0, plan.noise_sigma, f.size)
        truth = kerr_truth(spec, drive, monitor, float(P))
        traces.append(SpectroscopyTrace(float(P), f, mag, wrap_phase(phase), truth=truth,
                                        kind="kerr"))
    return traces


def simulate(spec: DeviceSpec, plan: ScanPlan, rng_seed: int) -> list[SpectroscopyTrace]:
    traces = (simulate_kerr_scan if plan.kind == "kerr" else simulate_stark_scan)(
        spec, plan, rng_seed)
    if plan.drift_rate:
        traces = inject_phase_drift(traces, plan.drift_rate, rng_seed)
    return traces


def drift_offsets(n: int, drift_rate: float, rng_seed: int | None = None,
                  walk_sigma: float = 0.0) -> np.ndarray:
    """Phase offsets: linear ramp in trace index plus an optional random walk."""
    off = drift_rate * np.arange(n, dtype=float)
    if walk_sigma:
        rng = np.random.default_rng(np.random.SeedSequence([rng_seed or 0, 0xD81F7]))
        off = off + np.cumsum(rng.normal(0.0, walk_sigma, n))
    return off


def inject_phase_drift(traces: Sequence[SpectroscopyTrace], drift_rate: float,
                       rng_seed: int | None = None, walk_sigma: float = 0.0
                       ) -> list[SpectroscopyTrace]:
    offsets = drift_offsets(len(traces), drift_rate, rng_seed, walk_sigma)
    if not np.any(offsets):
        return list(traces)
    return [t.with_phase(t.phase + o) for t, o in zip(traces, offsets)]


# ---------------------------------------------------------------- plan builders

def stark_plan_for(spec: DeviceSpec, drive: str, powers: Iterable[float] | None = None,
                   width: float = 1.0, n_points: int = 201, grid: tuple[float, float] | None = None,
                   noise_sigma: float = 0.0, depth: float = 0.5, sensor: str | None = None,
                   kind: Kind = "stark") -> ScanPlan:
    """Qubit spectroscopy plan whose grid covers the line at every power."""
    powers = np.linspace(0, 2, 9) if powers is None else np.asarray(list(powers), float)
    if grid is None:
        chi = swpt.chi_stark(spec.mode(drive).g, spec.detuning(drive), spec.alpha)
        ends = spec.omega_q + chi * spec.beta * np.array([powers[0], powers[-1]])
        grid = (ends.min() - 6 * width, ends.max() + 6 * width)
    sensor = sensor or drive
    return ScanPlan(kind=kind, powers=powers, pump_grid=np.linspace(*grid, n_points),
                    probe_freq=spec.mode(sensor).omega, sensor_mode=sensor, target=QUBIT,
                    noise_sigma=noise_sigma, drive_mode=drive, line_width=width,
                    line_depth=depth)


def kerr_plan_for(spec: DeviceSpec, drive: str, monitor: str,
                  powers: Iterable[float] | None = None, max_fraction: float = 0.8,
                  n_powers: int = 17, span_kappa: float = 5.0, n_points: int = 401,
                  noise_sigma: float = 0.0) -> ScanPlan:
    """Kerr plan; by default powers run up to ``max_fraction`` of the bistability threshold."""
    d = spec.mode(drive)
    if powers is None:
        eta = -swpt.kerr_self(d.g, spec.detuning(drive), spec.alpha)
        p_crit = kerrdyn.critical_drive(d.kappa, eta) ** 2 / spec.drive_conversion(drive)
        powers = np.linspace(1, n_powers, n_powers) * (max_fraction * p_crit / n_powers)
    powers = np.asarray(list(powers), float)
    half = span_kappa * d.kappa
    return ScanPlan(kind="kerr", powers=powers,
                    pump_grid=np.linspace(d.omega - half, d.omega + half, n_points),
                    probe_freq=spec.mode(monitor).omega, sensor_mode=monitor, target=drive,
                    noise_sigma=noise_sigma, drive_mode=drive)


def critical_power(spec: DeviceSpec, drive: str) -> float:
    """Drive power (nW) at the bistability threshold of ``drive``."""
    d = spec.mode(drive)
    eta = -swpt.kerr_self(d.g, spec.detuning(drive), spec.alpha)
    return kerrdyn.critical_drive(d.kappa, eta) ** 2 / spec.drive_conversion(drive)


# ---------------------------------------------------------------- serialization

TRACE_COLUMNS = ["power_nW", "pump_freq_MHz", "magnitude", "phase_rad"]


def write_traces(path: str | Path, traces: Sequence[SpectroscopyTrace],
                 meta: dict[str, Any] | None = None) -> Path:
    """CSV of the traces plus a ``.json`` sidecar; returns the sidecar path."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for t in traces:
            for f, m, p in zip(t.pump_freqs, t.magnitude, t.phase):
                w.writerow([repr(t.power), repr(float(f)), repr(float(m)), repr(float(p))])
    side = {"kind": traces[0].kind if traces else None,
            "truth": [t.truth for t in traces] if traces and traces[0].truth else None}
    side.update(meta or {})
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    return sidecar


def read_traces(path: str | Path) -> tuple[list[SpectroscopyTrace], dict[str, Any]]:
    """Inverse of :func:`write_traces`; the sidecar is optional (real data)."""
    path = Path(path)
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != TRACE_COLUMNS:
        raise ConfigError(f"{path}: expected columns {TRACE_COLUMNS}")
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    if data.size == 0:
        raise ConfigError(f"{path}: no data rows")
    kind = meta.get("kind") or "stark"
    truths = meta.get("truth") or []
    traces = []
    powers, first = np.unique(data[:, 0], return_index=True)
    for i, P in enumerate(powers[np.argsort(first)]):
        sel = data[:, 0] == P
        truth = truths[i] if i < len(truths) else None
        traces.append(SpectroscopyTrace(float(P), data[sel, 1], data[sel, 2], data[sel, 3],
                                        truth=truth, kind=kind))
    return traces, meta
