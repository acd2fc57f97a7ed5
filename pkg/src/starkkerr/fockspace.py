"""Truncated Fock-space operators and the exact-diagonalization oracle.

The product basis is ordered with the first subsystem as the slowest index
(``np.kron`` convention), so a basis label is the tuple of occupations in
layout order.  Device Hamiltonians use the layout ``(mode_1, ..., mode_k, q)``.
"""

from __future__ import annotations

import csv
import itertools
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .device import QUBIT, DeviceSpec

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


class FockSpaceError(ValueError):
    pass


class AmbiguousLabelError(FockSpaceError):
    """No bare state has more than half of a dressed state's weight."""


class MissingLabelError(FockSpaceError, KeyError):
    pass


class DispersiveRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class HilbertLayout:
    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(n), int(d)) for n, d in self.subsystems)
        if not subs:
            raise FockSpaceError("layout needs at least one subsystem")
        names = [n for n, _ in subs]
        if len(set(names)) != len(names):
            raise FockSpaceError(f"subsystem names must be unique: {names}")
        for n, d in subs:
            if d < 2:
                raise FockSpaceError(f"subsystem {n} has dimension {d} < 2")
        object.__setattr__(self, "subsystems", subs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise FockSpaceError(f"unknown subsystem {name!r}; layout has {self.names}") from None

    def labels(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(d) for d in self.dims)))

    def index_of(self, label: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(label), self.dims))

    def enlarged(self, extra: int) -> "HilbertLayout":
        return HilbertLayout(tuple((n, d + extra) for n, d in self.subsystems))


def device_layout(mode_names: Iterable[str], mode_levels: int = 4,
                  qubit_levels: int = 5) -> HilbertLayout:
    """Layout ``(modes..., q)`` with the default truncations."""
    subs = [(n, mode_levels) for n in mode_names] + [(QUBIT, qubit_levels)]
    return HilbertLayout(tuple(subs))


@dataclass(frozen=True, eq=False)
class DenseOperator:
    layout: HilbertLayout
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        n = self.layout.total_dim
        if a.shape != (n, n):
            raise FockSpaceError(f"operator shape {a.shape} does not match layout dim {n}")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    def dag(self) -> "DenseOperator":
        return DenseOperator(self.layout, self.entries.conj().T)

    def _wrap(self, other):
        if isinstance(other, DenseOperator):
            if other.layout != self.layout:
                raise FockSpaceError("operators live on different layouts")
            return other.entries
        return other

    def __add__(self, other):
        return DenseOperator(self.layout, self.entries + self._wrap(other))

    __radd__ = __add__

    def __sub__(self, other):
        return DenseOperator(self.layout, self.entries - self._wrap(other))

    def __neg__(self):
        return DenseOperator(self.layout, -self.entries)

    def __mul__(self, scalar):
        if isinstance(scalar, DenseOperator):
            raise TypeError("use @ for operator products")
        return DenseOperator(self.layout, self.entries * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return DenseOperator(self.layout, self.entries @ self._wrap(other))

    def hermiticity_error(self) -> float:
        """Relative Frobenius norm of the anti-Hermitian part."""
        a = self.entries
        norm = np.linalg.norm(a)
        if norm == 0:
            return 0.0
        return float(np.linalg.norm(a - a.conj().T) / norm)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_error() <= tol


def identity(layout: HilbertLayout) -> DenseOperator:
    return DenseOperator(layout, np.eye(layout.total_dim))


def ladder_ops(layout: HilbertLayout, subsystem: str) -> tuple[DenseOperator, DenseOperator]:
    """Lowering and raising operators of one subsystem, embedded in the layout."""
    pos = layout.position(subsystem)
    factors = [np.eye(d) for d in layout.dims]
    d = layout.dims[pos]
    factors[pos] = np.diag(np.sqrt(np.arange(1, d)), 1)
    low = factors[0]
    for f in factors[1:]:
        low = np.kron(low, f)
    lowering = DenseOperator(layout, low)
    return lowering, lowering.dag()


def number_op(layout: HilbertLayout, subsystem: str) -> DenseOperator:
    low, up = ladder_ops(layout, subsystem)
    return up @ low


def bare_energies(spec: DeviceSpec, layout: HilbertLayout, frame: float = 0.0) -> np.ndarray:
    """Diagonal of H0 in the product basis (frequencies relative to ``frame``)."""
    out = np.zeros(layout.dims)
    for pos, (name, d) in enumerate(layout.subsystems):
        n = np.arange(d, dtype=float)
        if name == QUBIT:
            local = (spec.omega_q - frame) * n - 0.5 * spec.alpha * n * (n - 1)
        else:
            local = (spec.mode(name).omega - frame) * n
        shape = [1] * len(layout.dims)
        shape[pos] = d
        out = out + local.reshape(shape)
    return out.reshape(-1)


def assemble_hamiltonian(spec: DeviceSpec, layout: HilbertLayout,
                         mode_subset: Sequence[str] | None = None,
                         frame: float = 0.0) -> DenseOperator:
    """H0 + Hint for the qubit and the chosen modes.

    ``frame`` subtracts ``frame * N_total`` (a rotating frame).  Hint conserves
    the total excitation number, so this changes eigenvalues by a known
    constant per sector and leaves every finite-difference coefficient intact,
    while keeping the matrix norm small for precise eigenvalues.
    """
    if mode_subset is None:
        mode_subset = [n for n in layout.names if n != QUBIT]
    mode_subset = list(mode_subset)
    if not mode_subset:
        raise FockSpaceError("mode_subset must be nonempty")
    if QUBIT not in layout.names:
        raise FockSpaceError(f"layout must contain the qubit subsystem {QUBIT!r}")
    missing = [n for n in mode_subset if n not in layout.names]
    if missing:
        raise FockSpaceError(f"layout does not cover modes {missing}")

    sub = spec.subset(mode_subset)
    bad = sub.dispersive_violations()
    if bad:
        warnings.warn(f"modes {bad} violate |g/Delta| < 0.25", DispersiveRegimeWarning,
                      stacklevel=2)

    q, qd = ladder_ops(layout, QUBIT)
    H = DenseOperator(layout, np.diag(bare_energies(spec, layout, frame)))
    for name in mode_subset:
        a, ad = ladder_ops(layout, name)
        H = H + sub.mode(name).g * (qd @ a + ad @ q)
    if not H.is_hermitian():
        raise FockSpaceError(f"assembled Hamiltonian not Hermitian "
                             f"(error {H.hermiticity_error():.3e})")
    return H


@dataclass(frozen=True, eq=False)
class LabeledSpectrum:
    energies: np.ndarray
    labels: tuple[tuple[int, ...], ...]
    overlaps: np.ndarray
    names: tuple[str, ...] = ()
    contested: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})

    def energy(self, label: Sequence[int]) -> float:
        try:
            return float(self.energies[self._index[tuple(label)]])
        except KeyError:
            raise MissingLabelError(f"label {tuple(label)} not in spectrum") from None

    def overlap(self, label: Sequence[int]) -> float:
        return float(self.overlaps[self._index[tuple(label)]])

    def to_csv(self, path: str | Path) -> None:
        slot_names = [f"n_{n}" for n in self.names] if self.names else \
            [f"n_{i}" for i in range(len(self.labels[0]))]
        if self.names and len(self.names) == 3:
            slot_names = ["n_D", "n_M", "n_q"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["energy_MHz", *slot_names, "overlap"])
            for e, lab, ov in zip(self.energies, self.labels, self.overlaps):
                w.writerow([repr(float(e)), *lab, repr(float(ov))])


def diagonalize_labeled(H: DenseOperator, required: Iterable[Sequence[int]] | None = None,
                        min_overlap: float = 0.5) -> LabeledSpectrum:
    """Exact eigenpairs, each tagged with the bare product state it resembles most.

    Assignment is greedy over all (eigenvector, bare state) pairs in order of
    decreasing squared overlap, consuming each bare label once.  An eigenvector
    whose assigned overlap is ``<= min_overlap`` raises
    :class:`AmbiguousLabelError`; with ``required`` given only those labels are
    checked.  Eigenvectors that lost their best label to a stronger claim are
    logged and listed in ``contested``.
    """
    if not H.is_hermitian():
        raise FockSpaceError("diagonalize_labeled needs a Hermitian operator")
    w, v = np.linalg.eigh(H.entries)
    weight = np.abs(v) ** 2  # weight[bare, eig]
    n = len(w)
    bare_labels = H.layout.labels()

    order = np.argsort(-weight, axis=None, kind="stable")
    eig_to_bare = np.full(n, -1)
    bare_used = np.zeros(n, bool)
    assigned = 0
    for flat in order:
        b, e = divmod(int(flat), n)
        if eig_to_bare[e] >= 0 or bare_used[b]:
            continue
        eig_to_bare[e] = b
        bare_used[b] = True
        assigned += 1
        if assigned == n:
            break

    best = np.argmax(weight, axis=0)
    contested = tuple(bare_labels[eig_to_bare[e]] for e in range(n) if best[e] != eig_to_bare[e])
    if contested:
        log.warning("label contention resolved by overlap order for %d states: %s",
                    len(contested), contested[:5])

    labels = tuple(bare_labels[b] for b in eig_to_bare)
    overlaps = weight[eig_to_bare, np.arange(n)]
    check = range(n) if required is None else [
        labels.index(tuple(r)) if tuple(r) in labels else None for r in required]
    for i in check:
        if i is None:
            continue
        if overlaps[i] <= min_overlap:
            raise AmbiguousLabelError(
                f"state labeled {labels[i]} has max overlap {overlaps[i]:.3f} <= {min_overlap}"
            )
    return LabeledSpectrum(energies=w, labels=labels, overlaps=overlaps,
                           names=H.layout.names, contested=contested)


class DressedCoefficients(NamedTuple):
    chi_stark_D: float
    chi_stark_M: float | None
    chi_DD: float
    chi_MM: float | None
    chi_DM: float | None


def _unit(k: int, slots: int, *counts: tuple[int, int]) -> tuple[int, ...]:
    lab = [0] * slots
    for pos, c in counts:
        lab[pos] += c
    return tuple(lab)


def dressed_coefficients(spectrum: LabeledSpectrum) -> DressedCoefficients:
    """Finite-difference AC-Stark and Kerr coefficients from labeled energies.

    Labels are ``(n_D, n_q)`` or ``(n_D, n_M, n_q)``; the M entries are
    ``None`` for a single-mode spectrum.
    """
    slots = len(spectrum.labels[0])
    if slots not in (2, 3):
        raise FockSpaceError("expected labels (n_D, n_q) or (n_D, n_M, n_q)")
    qpos = slots - 1
    E = lambda *counts: spectrum.energy(_unit(0, slots, *counts))  # noqa: E731
    e0 = E()

    def stark(pos):
        return E((pos, 1), (qpos, 1)) - E((pos, 1)) - E((qpos, 1)) + e0

    def self_kerr(pos):
        return E((pos, 2)) - 2 * E((pos, 1)) + e0

    chi_D, chi_DD = stark(0), self_kerr(0)
    if slots == 2:
        return DressedCoefficients(chi_D, None, chi_DD, None, None)
    chi_DM = E((0, 1), (1, 1)) - E((0, 1)) - E((1, 1)) + e0
    return DressedCoefficients(chi_D, stark(1), chi_DD, self_kerr(1), chi_DM)


def coefficient_labels(slots: int) -> list[tuple[int, ...]]:
    """Labels ``dressed_coefficients`` reads (all occupations <= 2)."""
    return [lab for lab in itertools.product(range(3), repeat=slots) if sum(lab) <= 2]


def exact_coefficients(spec: DeviceSpec, mode_subset: Sequence[str],
                       mode_levels: int = 4, qubit_levels: int = 5) -> DressedCoefficients:
    """Assemble, diagonalize in the qubit frame and take finite differences."""
    if len(mode_subset) not in (1, 2):
        raise FockSpaceError("exact_coefficients takes one or two modes")
    layout = device_layout(mode_subset, mode_levels, qubit_levels)
    H = assemble_hamiltonian(spec, layout, mode_subset, frame=spec.omega_q)
    spectrum = diagonalize_labeled(H, required=coefficient_labels(len(layout.dims)))
    return dressed_coefficients(spectrum)
