"""Device description: a transmon and the photonic modes it couples to.

All frequencies are stored as omega/2pi in MHz.  The coefficient formulas
used throughout the package are homogeneous in frequency, so no factor of
2pi ever enters a calculation.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

QUBIT = "q"


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


@dataclass(frozen=True)
class Mode:
    """One photonic mode as seen by the qubit.

    Either ``kappa`` or ``Q`` may be given; the other is derived from
    ``Q = omega / kappa``.
    """

    name: str
    omega: float
    g: float
    kappa: float | None = None
    Q: float | None = None

    def __post_init__(self):
        if not self.name or self.name == QUBIT:
            raise ConfigError(f"invalid mode name {self.name!r}")
        if self.omega <= 0:
            raise ConfigError(f"mode {self.name}: omega must be positive")
        kappa, Q = self.kappa, self.Q
        if kappa is None and Q is not None:
            kappa = self.omega / Q
        elif Q is None and kappa is not None:
            Q = self.omega / kappa
        if kappa is not None:
            if kappa <= 0:
                raise ConfigError(f"mode {self.name}: kappa must be positive")
            if abs(Q - self.omega / kappa) > 1e-9 * abs(Q):
                raise ConfigError(
                    f"mode {self.name}: Q={Q} inconsistent with omega/kappa="
                    f"{self.omega / kappa}"
                )
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "Q", Q)


@dataclass(frozen=True)
class DeviceSpec:
    """Transmon frequency and anharmonicity plus the coupled modes.

    ``alpha`` is positive and enters the Hamiltonian as
    ``-(alpha/2) q^dag q^dag q q``.  ``beta`` converts applied drive power to
    intracavity photons (photons/nW).  ``zeta`` converts applied power to
    ``|E_dr|^2`` (MHz^2/nW); when left unset it is derived per drive mode as
    ``beta * (kappa/2)^2`` so the photon number at the driven resonance equals
    ``beta * P``.
    """

    omega_q: float
    alpha: float
    modes: tuple[Mode, ...]
    beta: float = 1.0
    zeta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        names = [m.name for m in self.modes]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate mode names in {names}")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative (sign is fixed by H0)")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.zeta is not None and self.zeta <= 0:
            raise ConfigError("zeta must be positive")

    @property
    def mode_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.modes)

    def mode(self, name: str) -> Mode:
        for m in self.modes:
            if m.name == name:
                return m
        raise KeyError(f"no mode named {name!r}; have {self.mode_names}")

    def detuning(self, name: str) -> float:
        """Qubit-mode detuning ``omega_q - omega_j``."""
        return self.omega_q - self.mode(name).omega

    def dispersive_violations(self, limit: float = 0.25) -> list[str]:
        """Names of modes with ``|g/Delta| >= limit`` (or exactly resonant)."""
        bad = []
        for m in self.modes:
            delta = self.omega_q - m.omega
            if delta == 0 or abs(m.g / delta) >= limit:
                bad.append(m.name)
        return bad

    def drive_conversion(self, name: str) -> float:
        """``zeta`` for driving mode ``name`` (MHz^2 per nW)."""
        if self.zeta is not None:
            return self.zeta
        kappa = self.mode(name).kappa
        if kappa is None:
            raise ConfigError(f"mode {name} needs kappa (or Q) to derive zeta")
        return self.beta * (kappa / 2) ** 2

    def replace(self, **changes) -> "DeviceSpec":
        return dataclasses.replace(self, **changes)

    def with_mode(self, name: str, **changes) -> "DeviceSpec":
        # keep kappa as the primary linewidth unless Q alone is changed
        if "Q" not in changes and ("kappa" in changes or "omega" in changes):
            changes["Q"] = None
        elif "Q" in changes and "kappa" not in changes:
            changes["kappa"] = None
        self.mode(name)
        modes = tuple(
            dataclasses.replace(m, **changes) if m.name == name else m for m in self.modes
        )
        return self.replace(modes=modes)

    def subset(self, names: Iterable[str]) -> "DeviceSpec":
        names = list(names)
        return self.replace(modes=tuple(self.mode(n) for n in names))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "qubit": {"omega_MHz": self.omega_q, "alpha_MHz": self.alpha},
            "modes": [
                {"name": m.name, "omega_MHz": m.omega, "g_MHz": m.g,
                 "kappa_MHz": m.kappa}
                for m in self.modes
            ],
            "beta_photons_per_nW": self.beta,
        }
        if self.zeta is not None:
            out["zeta_MHz2_per_nW"] = self.zeta
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DeviceSpec":
        _check_keys(data, {"qubit", "modes", "beta_photons_per_nW", "zeta_MHz2_per_nW"},
                    "device", required={"qubit", "modes"})
        qubit = data["qubit"]
        _check_keys(qubit, {"omega_MHz", "alpha_MHz"}, "device.qubit",
                    required={"omega_MHz", "alpha_MHz"})
        modes = []
        for i, m in enumerate(data["modes"]):
            _check_keys(m, {"name", "omega_MHz", "g_MHz", "kappa_MHz", "Q"},
                        f"device.modes[{i}]", required={"name", "omega_MHz", "g_MHz"})
            modes.append(Mode(
                name=str(m["name"]),
                omega=float(m["omega_MHz"]),
                g=float(m["g_MHz"]),
                kappa=_opt_float(m.get("kappa_MHz")),
                Q=_opt_float(m.get("Q")),
            ))
        return cls(
            omega_q=float(qubit["omega_MHz"]),
            alpha=float(qubit["alpha_MHz"]),
            modes=tuple(modes),
            beta=float(data.get("beta_photons_per_nW", 1.0)),
            zeta=_opt_float(data.get("zeta_MHz2_per_nW")),
        )

    @classmethod
    def load(cls, path: str | Path) -> "DeviceSpec":
        data = load_yaml(path)
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: expected a mapping at top level")
        if "device" in data and len(data) == 1:
            data = data["device"]
        return cls.from_dict(data)


def _opt_float(value) -> float | None:
    return None if value is None else float(value)


def _check_keys(data, allowed: set[str], where: str, required: set[str] = frozenset()):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(data)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def load_yaml(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc


def photons_per_power_from_slope(stark_slope: float, chi_stark: float) -> float:
    """beta implied by a target AC-Stark slope (MHz/nW) and coefficient (MHz/photon)."""
    if chi_stark == 0 or not math.isfinite(chi_stark):
        raise ValueError("AC-Stark coefficient must be finite and nonzero")
    return stark_slope / chi_stark
