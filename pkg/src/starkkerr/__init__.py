"""AC-Stark and Kerr spectroscopy of a transmon coupled to lattice modes.

Closed-form dispersive coefficients, a numeric Schrieffer-Wolff engine and
exact diagonalization for checking them, semiclassical Kerr steady states,
synthetic two-tone spectroscopy, and slope-ratio extraction of couplings.
"""

__version__ = "0.1.0"

from .device import ConfigError, DeviceSpec, Mode
from .extract import (CouplingEstimate, FitError, InconsistentSignsError, consistency_report,
                      extract_couplings, fit_kerr_1d, fit_kerr_2d, fit_qubit_line, fit_slope)
from .fockspace import (DenseOperator, HilbertLayout, assemble_hamiltonian, diagonalize_labeled,
                        exact_coefficients)
from .kerrdyn import KerrDriveParams, critical_drive, steady_state
from .lattice import LatticeSpec, normal_modes
from .pipeline import analyze_pair, run_closed_loop
from .swpt import chi_stark, kerr_cross, kerr_excited, kerr_self, sw_corrections
from .synthlab import ScanPlan, SpectroscopyTrace, simulate

__all__ = [
    "ConfigError", "CouplingEstimate", "DenseOperator", "DeviceSpec", "FitError", "HilbertLayout",
    "InconsistentSignsError", "KerrDriveParams", "LatticeSpec", "Mode", "ScanPlan",
    "SpectroscopyTrace", "analyze_pair", "assemble_hamiltonian", "chi_stark",
    "consistency_report", "critical_drive", "diagonalize_labeled", "exact_coefficients",
    "extract_couplings", "fit_kerr_1d", "fit_kerr_2d", "fit_qubit_line", "fit_slope",
    "kerr_cross", "kerr_excited", "kerr_self", "normal_modes", "run_closed_loop", "simulate",
    "steady_state", "sw_corrections",
]
