"""Scenario files: one YAML document per run, strict about unknown keys.

Top-level keys (all optional, each subcommand reads what it needs)::

    seed: 0
    device: <mapping> | <path> | {preset: ba_pair | cb_pair | three_mode}
    lattice: <mapping> | <path>          # tight-binding input
    lattice_device:                      # build the device from lattice modes
      omega_q_MHz, alpha_MHz, kappa_MHz, beta_photons_per_nW,
      modes: {name: mode_index, ...}  or  strongest: N
    pair: {drive: D, monitor: M}
    pairs: [[D, M], ...]                 # mode matrix
    sweep: {qubit_freqs_MHz: [...], g_scaling: none | sqrt, reference_MHz: ...}
    scans:
      stark: {powers_nW, n_points, width_MHz, depth}
      kerr: {powers_nW, n_powers, max_fraction, span_kappa, n_points}
    noise: {relative: 0.0, drift_rad_per_trace: 0.0}   # or a bare number
    extraction: {fit: 1d | 2d, filter_sigma: 3, error_mode: stat | hardware}
    closed_loop: {repeats, tolerance, statistic: max | median,
                  spread_bound_factor, require_trend}
    traces: {stark: <csv>, kerr: <csv>}  # input for ``extract``
    slopes: [{preset: ba_pair} | {slope_q_MHz_per_nW, ...}, ...]
    kerr_curves: {kappa_MHz, eta_MHz, drive_fractions, span_kappa, n_points, branches}
    sw_check: {n_systems, seed}
    dos: {bin_MHz}

Relative paths resolve against the scenario file's directory.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import presets
from .device import ConfigError, DeviceSpec, _check_keys, load_yaml
from .lattice import LatticeSpec, normal_modes

TOP_KEYS = {"seed", "device", "lattice", "lattice_device", "pair", "pairs", "sweep", "scans",
            "noise", "extraction", "closed_loop", "traces", "slopes", "kerr_curves",
            "sw_check", "dos"}

DEVICE_PRESETS = {"ba_pair": presets.ba_pair_device, "cb_pair": presets.cb_pair_device,
                  "three_mode": presets.three_mode_device}

SLOPE_KEYS = {"preset", "name", "slope_q_MHz_per_nW", "slope_d_kHz_per_nW", "slope_m_kHz_per_nW",
              "slope_q_err_MHz_per_nW", "slope_d_err_kHz_per_nW", "slope_m_err_kHz_per_nW",
              "delta_D_MHz", "delta_M_MHz", "alpha_MHz", "pair"}

_SECTION_DEFAULTS: dict[str, dict[str, Any]] = {
    "extraction": {"fit": "1d", "filter_sigma": 3.0, "error_mode": None},
    "closed_loop": {"repeats": 1, "tolerance": None, "statistic": "max",
                    "spread_bound_factor": None, "require_trend": False},
    "kerr_curves": {"kappa_MHz": None, "eta_MHz": None, "drive_fractions": [0.5, 1.0, 2.0],
                    "span_kappa": 6.0, "n_points": 401, "branches": ["low", "high"]},
    "sw_check": {"n_systems": 10, "seed": 2024},
    "dos": {"bin_MHz": 5.0},
}
_SCAN_KEYS = {"stark": {"powers_nW", "n_points", "width_MHz", "depth"},
              "kerr": {"powers_nW", "n_powers", "max_fraction", "span_kappa", "n_points"}}


@dataclass
class Scenario:
    """Validated scenario with defaults filled in; ``to_dict`` is what reports embed."""

    seed: int = 0
    device: DeviceSpec | None = None
    lattice: LatticeSpec | None = None
    pairs: list[tuple[str, str]] = field(default_factory=list)
    sweep: dict[str, Any] | None = None
    scans: dict[str, dict[str, Any]] = field(default_factory=dict)
    noise: float = 0.0
    drift_rate: float = 0.0
    extraction: dict[str, Any] = field(default_factory=dict)
    closed_loop: dict[str, Any] = field(default_factory=dict)
    traces: dict[str, Path] = field(default_factory=dict)
    slopes: list[dict[str, Any]] = field(default_factory=list)
    kerr_curves: dict[str, Any] = field(default_factory=dict)
    sw_check: dict[str, Any] = field(default_factory=dict)
    dos: dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def require_device(self) -> DeviceSpec:
        if self.device is None:
            raise ConfigError("scenario needs a device (or lattice + lattice_device)")
        return self.device

    def pair_list(self) -> list[tuple[str, str]]:
        if self.pairs:
            return list(self.pairs)
        dev = self.require_device()
        if len(dev.modes) < 2:
            raise ConfigError("device needs two modes or an explicit pair")
        return [(dev.modes[0].name, dev.modes[1].name)]

    def qubit_devices(self) -> list[DeviceSpec]:
        """Device copies for each sweep point (or just the device)."""
        dev = self.require_device()
        if not self.sweep:
            return [dev]
        ref = self.sweep["reference_MHz"]
        out = []
        for w in self.sweep["qubit_freqs_MHz"]:
            d = dev.replace(omega_q=float(w))
            if self.sweep["g_scaling"] == "sqrt":
                s = float(np.sqrt(w / ref))
                for m in dev.modes:
                    d = d.with_mode(m.name, g=m.g * s)
            out.append(d)
        return out

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"seed": self.seed}
        if self.device is not None:
            out["device"] = self.device.to_dict()
        if self.lattice is not None:
            out["lattice"] = self.lattice.to_dict()
        out["pairs"] = [list(p) for p in self.pairs]
        if self.sweep:
            out["sweep"] = copy.deepcopy(self.sweep)
        out["scans"] = copy.deepcopy(self.scans)
        out["noise"] = {"relative": self.noise, "drift_rad_per_trace": self.drift_rate}
        for k in ("extraction", "closed_loop", "kerr_curves", "sw_check", "dos"):
            out[k] = copy.deepcopy(getattr(self, k))
        if self.traces:
            out["traces"] = {k: str(v) for k, v in sorted(self.traces.items())}
        if self.slopes:
            out["slopes"] = copy.deepcopy(self.slopes)
        return out


def _path(base: Path, p) -> Path:
    p = Path(str(p))
    return p if p.is_absolute() else (base / p).resolve()


def _device(value, base: Path) -> DeviceSpec:
    if isinstance(value, str):
        return DeviceSpec.load(_path(base, value))
    if isinstance(value, Mapping) and "preset" in value:
        _check_keys(value, {"preset"}, "device")
        name = value["preset"]
        if name not in DEVICE_PRESETS:
            raise ConfigError(f"device: unknown preset {name!r}; choose from {sorted(DEVICE_PRESETS)}")
        return DEVICE_PRESETS[name]()
    return DeviceSpec.from_dict(value)


def _lattice(value, base: Path) -> LatticeSpec:
    if isinstance(value, str):
        return LatticeSpec.load(_path(base, value))
    return LatticeSpec.from_dict(value)


def _lattice_device(lat: LatticeSpec, opts: Mapping[str, Any]) -> DeviceSpec:
    _check_keys(opts, {"omega_q_MHz", "alpha_MHz", "kappa_MHz", "beta_photons_per_nW",
                       "modes", "strongest"}, "lattice_device",
                required={"omega_q_MHz", "alpha_MHz"})
    nm = normal_modes(lat)
    if ("modes" in opts) == ("strongest" in opts):
        raise ConfigError("lattice_device: give exactly one of modes or strongest")
    if "modes" in opts:
        sel = opts["modes"]
        if not isinstance(sel, Mapping) or not sel:
            raise ConfigError("lattice_device.modes: expected {name: mode_index}")
        names, idx = list(sel), [int(i) for i in sel.values()]
        if any(i < 0 or i >= len(nm) for i in idx):
            raise ConfigError(f"lattice_device.modes: index out of range 0..{len(nm) - 1}")
    else:
        n = int(opts["strongest"])
        idx = sorted(np.argsort(-np.abs(nm.couplings), kind="stable")[:n].tolist())
        names = None
    return nm.device(float(opts["omega_q_MHz"]), float(opts["alpha_MHz"]), idx, names,
                     kappa=opts.get("kappa_MHz"),
                     beta=float(opts.get("beta_photons_per_nW", 1.0)))


def _section(name: str, value) -> dict[str, Any]:
    defaults = _SECTION_DEFAULTS[name]
    value = {} if value is None else value
    _check_keys(value, set(defaults), name)
    out = dict(defaults)
    out.update(value)
    return out


def _slopes(value) -> list[dict[str, Any]]:
    items = value if isinstance(value, list) else [value]
    out = []
    for i, item in enumerate(items):
        where = f"slopes[{i}]"
        _check_keys(item, SLOPE_KEYS, where)
        if "preset" in item:
            name = item["preset"]
            if name not in presets.PUBLISHED_SLOPES:
                raise ConfigError(f"{where}: unknown preset {name!r}")
            extra = set(item) - {"preset"}
            if extra:
                raise ConfigError(f"{where}: preset cannot be combined with {sorted(extra)}")
            out.append(slope_set_from_preset(name))
            continue
        need = {"slope_q_MHz_per_nW", "slope_d_kHz_per_nW", "slope_m_kHz_per_nW",
                "delta_D_MHz", "delta_M_MHz", "alpha_MHz"}
        missing = need - set(item)
        if missing:
            raise ConfigError(f"{where}: missing keys {sorted(missing)}")
        s = {k: (v if k in ("name", "pair") else float(v)) for k, v in item.items()}
        s.setdefault("name", f"set{i}")
        s.setdefault("pair", ["D", "M"])
        for k in ("slope_q_err_MHz_per_nW", "slope_d_err_kHz_per_nW", "slope_m_err_kHz_per_nW"):
            s.setdefault(k, 0.0)
        out.append(s)
    return out


def slope_set_from_preset(name: str) -> dict[str, Any]:
    p = presets.PUBLISHED_SLOPES[name]
    return {"name": name, "pair": list(p["pair"]),
            "slope_q_MHz_per_nW": p["slope_q"], "slope_q_err_MHz_per_nW": p["slope_q_err"],
            "slope_d_kHz_per_nW": p["slope_d_kHz"], "slope_d_err_kHz_per_nW": p["slope_d_err_kHz"],
            "slope_m_kHz_per_nW": p["slope_m_kHz"], "slope_m_err_kHz_per_nW": p["slope_m_err_kHz"],
            "delta_D_MHz": p["delta_D"], "delta_M_MHz": p["delta_M"], "alpha_MHz": p["alpha"]}


def _scans(value) -> dict[str, dict[str, Any]]:
    value = {} if value is None else value
    _check_keys(value, set(_SCAN_KEYS), "scans")
    out = {}
    for kind, allowed in _SCAN_KEYS.items():
        sec = value.get(kind) or {}
        _check_keys(sec, allowed, f"scans.{kind}")
        out[kind] = dict(sec)
    return out


def _noise(value) -> tuple[float, float]:
    if value is None:
        return 0.0, 0.0
    if isinstance(value, (int, float)):
        rel, drift = float(value), 0.0
    else:
        _check_keys(value, {"relative", "drift_rad_per_trace"}, "noise")
        rel = float(value.get("relative", 0.0))
        drift = float(value.get("drift_rad_per_trace", 0.0))
    if rel < 0:
        raise ConfigError("noise.relative must be nonnegative")
    return rel, drift


def _pairs(data: Mapping[str, Any]) -> list[tuple[str, str]]:
    if "pair" in data and "pairs" in data:
        raise ConfigError("give either pair or pairs, not both")
    if "pair" in data:
        p = data["pair"]
        _check_keys(p, {"drive", "monitor"}, "pair", required={"drive", "monitor"})
        return [(str(p["drive"]), str(p["monitor"]))]
    out = []
    for i, p in enumerate(data.get("pairs") or []):
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise ConfigError(f"pairs[{i}]: expected [drive, monitor]")
        out.append((str(p[0]), str(p[1])))
    return out


def _sweep(value, device: DeviceSpec | None) -> dict[str, Any] | None:
    if value is None:
        return None
    _check_keys(value, {"qubit_freqs_MHz", "g_scaling", "reference_MHz"}, "sweep",
                required={"qubit_freqs_MHz"})
    freqs = [float(w) for w in value["qubit_freqs_MHz"]]
    if len(freqs) < 1:
        raise ConfigError("sweep.qubit_freqs_MHz is empty")
    scaling = value.get("g_scaling", "none")
    if scaling not in ("none", "sqrt"):
        raise ConfigError(f"sweep.g_scaling must be none or sqrt, got {scaling!r}")
    ref = value.get("reference_MHz")
    if ref is None:
        ref = device.omega_q if device is not None else freqs[-1]
    return {"qubit_freqs_MHz": freqs, "g_scaling": scaling, "reference_MHz": float(ref)}


def scenario_from_dict(data: Mapping[str, Any] | None, base_dir: str | Path = ".") -> Scenario:
    data = {} if data is None else data
    _check_keys(data, TOP_KEYS, "scenario")
    base = Path(base_dir)
    sc = Scenario(base_dir=base)
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    sc.seed = seed
    if "lattice" in data:
        sc.lattice = _lattice(data["lattice"], base)
    if "device" in data and "lattice_device" in data:
        raise ConfigError("give either device or lattice_device, not both")
    if "device" in data:
        sc.device = _device(data["device"], base)
    elif "lattice_device" in data:
        if sc.lattice is None:
            raise ConfigError("lattice_device needs a lattice section")
        sc.device = _lattice_device(sc.lattice, data["lattice_device"])
    sc.pairs = _pairs(data)
    if sc.device is not None:
        for name in {n for p in sc.pairs for n in p}:
            if name not in sc.device.mode_names:
                raise ConfigError(f"pair mode {name!r} not in device modes {sc.device.mode_names}")
    sc.sweep = _sweep(data.get("sweep"), sc.device)
    sc.scans = _scans(data.get("scans"))
    sc.noise, sc.drift_rate = _noise(data.get("noise"))
    sc.extraction = _section("extraction", data.get("extraction"))
    if sc.extraction["fit"] not in ("1d", "2d"):
        raise ConfigError("extraction.fit must be 1d or 2d")
    if sc.extraction["error_mode"] not in (None, "stat", "hardware"):
        raise ConfigError("extraction.error_mode must be stat or hardware")
    sc.closed_loop = _section("closed_loop", data.get("closed_loop"))
    if sc.closed_loop["statistic"] not in ("max", "median"):
        raise ConfigError("closed_loop.statistic must be max or median")
    if int(sc.closed_loop["repeats"]) < 1:
        raise ConfigError("closed_loop.repeats must be at least 1")
    if "traces" in data:
        _check_keys(data["traces"], {"stark", "kerr"}, "traces", required={"stark", "kerr"})
        sc.traces = {k: _path(base, v) for k, v in data["traces"].items()}
        for k, p in sc.traces.items():
            if not p.exists():
                raise ConfigError(f"traces.{k}: file not found: {p}")
    if "slopes" in data:
        sc.slopes = _slopes(data["slopes"])
    sc.kerr_curves = _section("kerr_curves", data.get("kerr_curves"))
    bad = set(sc.kerr_curves["branches"]) - {"low", "high", "previous"}
    if bad:
        raise ConfigError(f"kerr_curves.branches: unknown {sorted(bad)}")
    sc.sw_check = _section("sw_check", data.get("sw_check"))
    sc.dos = _section("dos", data.get("dos"))
    return sc


def load_scenario(path: str | Path | None) -> Scenario:
    if path is None:
        return scenario_from_dict({})
    path = Path(path)
    data = load_yaml(path)
    if data is not None and not isinstance(data, Mapping):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return scenario_from_dict(data, path.resolve().parent)
