"""Fourth-order Schrieffer-Wolff engine and closed-form dispersive coefficients.

The engine works in the eigenbasis of a diagonal H0.  Generators are stored
as Hermitian matrices ``G`` (the anti-Hermitian generator is ``iG``), with

    G1_jk = -i V_jk / (E_j - E_k)
    C     = [G1, V]
    G2_jk = C_jk / (2 (E_j - E_k))

and diagonal corrections

    H2 = i diag(C) / 2
    H3 = -diag[G1, C] / 3
    H4 = -diag(i [G1, [G1, C]] / 8 + [G2, C] / 4)

Closed forms take the qubit-mode detuning ``delta = omega_q - omega_j`` and
the anharmonicity ``alpha > 0`` (all MHz).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .device import QUBIT, DeviceSpec
from .fockspace import DenseOperator, FockSpaceError, HilbertLayout, ladder_ops

GAP_FLOOR = 1e-6
# matrix elements below this fraction of max|V| count as "not coupled"
COUPLING_EPS = 1e-14


class DegenerateSpectrumError(FockSpaceError):
    def __init__(self, pair, gap):
        self.pair = pair
        self.gap = gap
        super().__init__(f"coupled states {pair[0]} and {pair[1]} are degenerate "
                         f"(|E_j - E_k| = {gap:.3e})")


class ResonanceError(ValueError):
    """Closed form evaluated at (or numerically on) one of its poles."""


def _as_matrix(V) -> tuple[np.ndarray, HilbertLayout]:
    if isinstance(V, DenseOperator):
        return V.entries, V.layout
    a = np.asarray(V, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise FockSpaceError(f"V must be square, got shape {a.shape}")
    return a, HilbertLayout((("sys", a.shape[0]),))


def _commutator(A, B):
    return A @ B - B @ A


def _zero_diag(A):
    out = A.copy()
    np.fill_diagonal(out, 0)
    return out


def _only_diag(A):
    return np.diag(np.diag(A))


def _divide_by_gaps(num: np.ndarray, E: np.ndarray, gap_floor: float) -> np.ndarray:
    """``num_jk / (E_j - E_k)`` off the diagonal.

    Pairs that are uncoupled in ``num`` may be degenerate (common in product
    spaces); a coupled pair closer than ``gap_floor`` is an error.
    """
    dE = E[:, None] - E[None, :]
    scale = np.max(np.abs(num)) if num.size else 0.0
    coupled = np.abs(num) > COUPLING_EPS * scale
    np.fill_diagonal(coupled, False)
    close = coupled & (np.abs(dE) < gap_floor)
    if close.any():
        j, k = map(int, np.argwhere(close)[0])
        raise DegenerateSpectrumError((j, k), abs(dE[j, k]))
    out = np.zeros_like(num)
    out[coupled] = num[coupled] / dE[coupled]
    return out


def _check_inputs(H0_diag, V, gap_floor):
    E = np.asarray(H0_diag, dtype=float)
    Vm, layout = _as_matrix(V)
    if E.shape != (Vm.shape[0],):
        raise FockSpaceError(f"H0 has {E.size} entries, V is {Vm.shape}")
    if gap_floor <= 0:
        raise ValueError("gap_floor must be positive")
    vmax = np.max(np.abs(Vm)) if Vm.size else 0.0
    if np.any(np.abs(np.diag(Vm)) > COUPLING_EPS * max(vmax, 1.0)):
        raise FockSpaceError("V must have zero diagonal in the H0 eigenbasis; "
                             "fold its diagonal into H0")
    return E, Vm, layout


def sw_generator1(H0_diag: Sequence[float], V, gap_floor: float = GAP_FLOOR) -> DenseOperator:
    E, Vm, layout = _check_inputs(H0_diag, V, gap_floor)
    return DenseOperator(layout, _divide_by_gaps(-1j * Vm, E, gap_floor))


@dataclass(frozen=True, eq=False)
class SWCorrections:
    G1: DenseOperator
    G2: DenseOperator
    H2: DenseOperator
    H3: DenseOperator
    H4: DenseOperator

    def shifts(self, order: int = 4) -> np.ndarray:
        """Real diagonal energy corrections summed up to ``order``."""
        parts = {2: self.H2, 3: self.H3, 4: self.H4}
        total = sum(np.diag(parts[k].entries) for k in range(2, order + 1))
        return np.real(total)


def sw_corrections(H0_diag: Sequence[float], V, gap_floor: float = GAP_FLOOR) -> SWCorrections:
    E, Vm, layout = _check_inputs(H0_diag, V, gap_floor)
    G1 = _divide_by_gaps(-1j * Vm, E, gap_floor)
    C = _commutator(G1, Vm)
    G2 = _divide_by_gaps(_zero_diag(C) / 2, E, gap_floor)
    H2 = 0.5j * _only_diag(C)
    H3 = -_only_diag(_commutator(G1, C)) / 3
    H4 = -_only_diag(0.125j * _commutator(G1, _commutator(G1, C))
                     + 0.25 * _commutator(G2, C))
    wrap = lambda a: DenseOperator(layout, a)  # noqa: E731
    return SWCorrections(wrap(G1), wrap(G2), wrap(H2), wrap(H3), wrap(H4))


# ---------------------------------------------------------------- closed forms

def _nonzero(value: float, what: str, scale: float) -> float:
    if not np.isfinite(value) or abs(value) <= 1e-12 * scale:
        raise ResonanceError(f"{what} vanishes (pole of the closed form)")
    return value


def _scale(*xs) -> float:
    return max(max(abs(x) for x in xs), 1e-300)


def chi_stark(g: float, delta: float, alpha: float) -> float:
    """AC-Stark shift of the qubit per photon in the mode (MHz/photon)."""
    s = _scale(delta, alpha)
    _nonzero(delta, "delta", s)
    _nonzero(alpha - delta, "alpha - delta", s)
    return 2 * g**2 * alpha / (delta * (alpha - delta))


def kerr_self(g: float, delta: float, alpha: float) -> float:
    """Self-Kerr of a mode, qubit in its ground state (MHz/photon)."""
    s = _scale(delta, alpha)
    _nonzero(delta, "delta", s)
    _nonzero(alpha - 2 * delta, "alpha - 2 delta", s)
    return 2 * g**4 * alpha / (delta**3 * (alpha - 2 * delta))


def kerr_cross(gD: float, gM: float, deltaD: float, deltaM: float, alpha: float) -> float:
    """Cross-Kerr between two modes, qubit in its ground state (MHz/photon)."""
    s = _scale(deltaD, deltaM, alpha)
    _nonzero(deltaD, "deltaD", s)
    _nonzero(deltaM, "deltaM", s)
    _nonzero(alpha - deltaD - deltaM, "alpha - deltaD - deltaM", s)
    return (2 * alpha * gD**2 * gM**2 * (deltaD + deltaM)
            / (deltaD**2 * deltaM**2 * (alpha - deltaD - deltaM)))


def chi_stark_level(g: float, delta: float, alpha: float, level: int = 0) -> float:
    """Per-photon shift of the transmon transition ``level -> level + 1``.

    Second-order result for a weakly anharmonic transmon; ``level = 0``
    reduces to :func:`chi_stark`.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    s = _scale(delta, alpha)

    def shift(k):
        # per-photon second-order shift of transmon level k
        out = -g**2 * (k + 1) / _nonzero(delta - alpha * k, f"delta - {k} alpha", s)
        if k > 0:
            out += g**2 * k / _nonzero(delta - alpha * (k - 1), f"delta - {k - 1} alpha", s)
        return out

    return shift(level + 1) - shift(level)


def tls_stark(g: float, delta: float) -> float:
    return 2 * g**2 / _nonzero(delta, "delta", _scale(delta))


def tls_kerr_self(g: float, delta: float, sigma_z: float = -1.0) -> float:
    """Two-level-qubit self-Kerr, projected on ``sigma_z`` (ground = -1)."""
    return -2 * g**4 / _nonzero(delta, "delta", _scale(delta)) ** 3 * sigma_z


def tls_kerr_cross(ga: float, gb: float, da: float, db: float, sigma_z: float = -1.0) -> float:
    s = _scale(da, db)
    _nonzero(da, "delta_a", s)
    _nonzero(db, "delta_b", s)
    return -2 * ga**2 * gb**2 / (da * db) * (1 / da + 1 / db) * sigma_z


def _kerr_self_level1(g, d, alpha):
    s = _scale(d, alpha)
    _nonzero(d, "delta", s)
    _nonzero(d - alpha, "delta - alpha", s)
    _nonzero(2 * d - 3 * alpha, "2 delta - 3 alpha", s)
    num = d**3 + 5 * (alpha * d**2 - alpha**2 * d) + 3 * alpha**3
    return -2 * g**4 * alpha * num / (d**3 * (d - alpha) ** 3 * (2 * d - 3 * alpha))


def _kerr_cross_level1(ga, gb, da, db, alpha):
    s = _scale(da, db, alpha)
    for val, what in [(da, "delta_a"), (db, "delta_b"), (da - alpha, "delta_a - alpha"),
                      (db - alpha, "delta_b - alpha"),
                      (da + db - 3 * alpha, "delta_a + delta_b - 3 alpha")]:
        _nonzero(val, what, s)
    num = (da**2 * db**2 + 2 * alpha * da * db * (da + db)
           - alpha**2 * (8 * da * db + da**2 + db**2)
           + 4 * alpha**3 * (da + db) - 3 * alpha**4)
    den = da * db * (da - alpha) ** 2 * (db - alpha) ** 2 * (da + db - 3 * alpha)
    return -2 * ga**2 * gb**2 * alpha * num / den * (1 / da + 1 / db)


class ClosedFormKerr(NamedTuple):
    chi_stark: float
    chi_self: float
    chi_cross: float
    level: int


def kerr_excited(level: int, gA: float, gB: float, deltaA: float, deltaB: float,
                 alpha: float) -> ClosedFormKerr:
    """Coefficients with the transmon held in ``level`` (0 or 1).

    ``chi_stark`` is the shift of the ``level -> level+1`` transition per
    photon in mode A; ``chi_self`` is the self-Kerr of mode A; ``chi_cross``
    the A-B cross-Kerr.  Other levels are available from
    :func:`numeric_kerr_coefficients`.
    """
    if level == 0:
        cross = kerr_cross(gA, gB, deltaA, deltaB, alpha)
        return ClosedFormKerr(chi_stark(gA, deltaA, alpha), kerr_self(gA, deltaA, alpha),
                              cross, 0)
    if level == 1:
        return ClosedFormKerr(chi_stark_level(gA, deltaA, alpha, 1),
                              _kerr_self_level1(gA, deltaA, alpha),
                              _kerr_cross_level1(gA, gB, deltaA, deltaB, alpha), 1)
    raise ValueError(f"closed forms exist for levels 0 and 1, not {level}; "
                     "use numeric_kerr_coefficients")


# ---------------------------------------------------------------- numeric side

def two_mode_system(gA: float, gB: float, deltaA: float, deltaB: float, alpha: float,
                    mode_levels: int = 5, qubit_levels: int = 5):
    """Bare energies (qubit frame) and coupling for modes a, b and the transmon."""
    layout = HilbertLayout((("a", mode_levels), ("b", mode_levels), (QUBIT, qubit_levels)))
    na, nb, nq = np.meshgrid(np.arange(mode_levels), np.arange(mode_levels),
                             np.arange(qubit_levels), indexing="ij")
    E = (-deltaA * na - deltaB * nb - 0.5 * alpha * nq * (nq - 1)).astype(float).ravel()
    q, qd = ladder_ops(layout, QUBIT)
    V = 0 * q
    for name, g in (("a", gA), ("b", gB)):
        a, ad = ladder_ops(layout, name)
        V = V + g * (qd @ a + ad @ q)
    return layout, E, V


def numeric_kerr_coefficients(gA: float, gB: float, deltaA: float, deltaB: float,
                              alpha: float, level: int = 0,
                              gap_floor: float = GAP_FLOOR) -> ClosedFormKerr:
    """Same quantities as :func:`kerr_excited`, from the numeric engine.

    Stark comes from H2 differences, Kerr terms from H4 differences.  The
    truncation leaves room for every intermediate state a fourth-order path
    can reach, so the result carries no truncation error.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    layout, E, V = two_mode_system(gA, gB, deltaA, deltaB, alpha,
                                   mode_levels=5, qubit_levels=level + 4)
    corr = sw_corrections(E, V, gap_floor)
    h2 = np.real(np.diag(corr.H2.entries))
    h4 = np.real(np.diag(corr.H4.entries))
    at = lambda h, na, nb, k: h[layout.index_of((na, nb, k))]  # noqa: E731
    stark = (at(h2, 1, 0, level + 1) - at(h2, 0, 0, level + 1)
             - at(h2, 1, 0, level) + at(h2, 0, 0, level))
    self_k = at(h4, 2, 0, level) - 2 * at(h4, 1, 0, level) + at(h4, 0, 0, level)
    cross = (at(h4, 1, 1, level) - at(h4, 1, 0, level)
             - at(h4, 0, 1, level) + at(h4, 0, 0, level))
    return ClosedFormKerr(float(stark), float(self_k), float(cross), level)


class DeviceCoefficients(NamedTuple):
    chi_stark_D: float
    chi_stark_M: float
    chi_DD: float
    chi_MM: float
    chi_DM: float


def device_coefficients(spec: DeviceSpec, drive: str, monitor: str) -> DeviceCoefficients:
    """Ground-state closed forms for a drive/monitor pair of ``spec``."""
    d, m = spec.mode(drive), spec.mode(monitor)
    dD, dM = spec.detuning(drive), spec.detuning(monitor)
    a = spec.alpha
    return DeviceCoefficients(
        chi_stark(d.g, dD, a), chi_stark(m.g, dM, a),
        kerr_self(d.g, dD, a), kerr_self(m.g, dM, a),
        kerr_cross(d.g, m.g, dD, dM, a),
    )
