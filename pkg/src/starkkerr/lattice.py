"""Tight-binding resonator lattice: normal modes and qubit couplings.

Site Hamiltonian ``H = omega0 * I - t * A`` for adjacency ``A``.  A qubit
coupled with strength ``g0`` to one site couples to normal mode ``j`` with
``g_j = g0 * psi_j(site)``; this projection is a modeling choice.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .device import ConfigError, DeviceSpec, Mode, _check_keys, load_yaml


class DisconnectedLatticeWarning(UserWarning):
    pass


def _adjacency_from_edges(n_sites: int, edges: Iterable[Sequence[int]]) -> np.ndarray:
    A = np.zeros((n_sites, n_sites))
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < n_sites and 0 <= j < n_sites):
            raise ConfigError(f"edge ({i}, {j}) outside 0..{n_sites - 1}")
        if i == j:
            raise ConfigError(f"self-loop at site {i}")
        A[i, j] = A[j, i] = 1.0
    return A


@dataclass(frozen=True, eq=False)
class LatticeSpec:
    omega0: float
    hopping: float
    adjacency: np.ndarray
    qubit_site: int = 0
    g0: float = 0.0

    def __post_init__(self):
        A = np.array(self.adjacency, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ConfigError("adjacency must be a square matrix")
        if A.shape[0] == 0:
            raise ConfigError("lattice has no sites")
        if not np.array_equal(A, A.T):
            raise ConfigError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise ConfigError("adjacency must have zero diagonal")
        if not np.all(np.isin(A, (0.0, 1.0))):
            raise ConfigError("adjacency entries must be 0 or 1")
        if not 0 <= self.qubit_site < A.shape[0]:
            raise ConfigError(f"qubit_site {self.qubit_site} outside 0..{A.shape[0] - 1}")
        A.flags.writeable = False
        object.__setattr__(self, "adjacency", A)

    @classmethod
    def from_edges(cls, n_sites: int, edges, **kw) -> "LatticeSpec":
        return cls(adjacency=_adjacency_from_edges(n_sites, edges), **kw)

    @property
    def n_sites(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency))
        return [(int(a), int(b)) for a, b in zip(i, j)]

    def hamiltonian(self) -> np.ndarray:
        return self.omega0 * np.eye(self.n_sites) - self.hopping * self.adjacency

    def permuted(self, perm: Sequence[int]) -> "LatticeSpec":
        """Relabel sites: new site ``i`` is old site ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return LatticeSpec(self.omega0, self.hopping, self.adjacency[np.ix_(perm, perm)],
                           int(inv[self.qubit_site]), self.g0)

    def to_dict(self) -> dict[str, Any]:
        return {"n_sites": self.n_sites, "edges": [list(e) for e in self.edges],
                "omega0_MHz": self.omega0, "hopping_MHz": self.hopping,
                "g0_MHz": self.g0, "qubit_site": self.qubit_site}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LatticeSpec":
        _check_keys(data, {"n_sites", "edges", "omega0_MHz", "hopping_MHz", "g0_MHz",
                           "qubit_site", "generator", "cells"}, "lattice",
                    required={"omega0_MHz", "hopping_MHz"})
        kw = dict(omega0=float(data["omega0_MHz"]), hopping=float(data["hopping_MHz"]),
                  g0=float(data.get("g0_MHz", 0.0)), qubit_site=int(data.get("qubit_site", 0)))
        gen = data.get("generator")
        if gen is not None:
            if "edges" in data or "n_sites" in data:
                raise ConfigError("lattice: give either generator or n_sites/edges")
            if gen == "quasi1d":
                n, edges = quasi1d_edges(int(data.get("cells", 9)))
            elif gen == "chain":
                n = int(data.get("cells", 2))
                edges = [(i, i + 1) for i in range(n - 1)]
            else:
                raise ConfigError(f"lattice: unknown generator {gen!r}")
            return cls.from_edges(n, edges, **kw)
        if "cells" in data:
            raise ConfigError("lattice: cells only applies with a generator")
        if "n_sites" not in data:
            raise ConfigError("lattice: missing n_sites (or a generator)")
        return cls.from_edges(int(data["n_sites"]), data.get("edges", []), **kw)

    @classmethod
    def load(cls, path: str | Path) -> "LatticeSpec":
        data = load_yaml(path)
        if isinstance(data, Mapping) and set(data) == {"lattice"}:
            data = data["lattice"]
        return cls.from_dict(data)


@dataclass(frozen=True, eq=False)
class NormalModes:
    frequencies: np.ndarray
    wavefunctions: np.ndarray
    couplings: np.ndarray
    spec: LatticeSpec | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.frequencies)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mode_index", "freq_MHz", "g_MHz"])
            for i, (f, g) in enumerate(zip(self.frequencies, self.couplings)):
                w.writerow([i, repr(float(f)), repr(float(g))])

    def device(self, omega_q: float, alpha: float, indices: Sequence[int],
               names: Sequence[str] | None = None, kappa: float | None = None,
               **kw) -> DeviceSpec:
        """DeviceSpec with the selected normal modes."""
        names = names or [f"m{i}" for i in indices]
        modes = tuple(Mode(n, float(self.frequencies[i]), float(self.couplings[i]), kappa)
                      for n, i in zip(names, indices))
        return DeviceSpec(omega_q=omega_q, alpha=alpha, modes=modes, **kw)


def normal_modes(spec: LatticeSpec) -> NormalModes:
    n_comp, _ = connected_components(spec.adjacency, directed=False)
    if n_comp > 1:
        warnings.warn(f"lattice has {n_comp} disconnected components",
                      DisconnectedLatticeWarning, stacklevel=2)
    w, v = np.linalg.eigh(spec.hamiltonian())
    # fix each eigenvector's sign by its first non-negligible entry
    for j in range(v.shape[1]):
        col = v[:, j]
        first = np.flatnonzero(np.abs(col) > 1e-9)[0]
        if col[first] < 0:
            v[:, j] = -col
    v.flags.writeable = False
    g = spec.g0 * v[spec.qubit_site, :]
    return NormalModes(frequencies=w, wavefunctions=v, couplings=g, spec=spec)


def density_of_states(modes: NormalModes, bin_width: float,
                      lo: float | None = None, hi: float | None = None):
    """Histogram of mode frequencies: returns ``(counts, bin_edges)``."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    f = np.asarray(modes.frequencies)
    lo = f.min() if lo is None else lo
    hi = f.max() if hi is None else hi
    nbins = max(1, int(np.ceil((hi - lo) / bin_width + 1e-12)))
    edges = lo + bin_width * np.arange(nbins + 1)
    if edges[-1] <= f.max():
        edges = np.append(edges, edges[-1] + bin_width)
    counts, edges = np.histogram(f, bins=edges)
    return counts, edges


def quasi1d_edges(cells: int = 9) -> tuple[int, list[tuple[int, int]]]:
    """Sites and edges of a quasi-1D resonator chain with six sites per cell.

    Resonators sit on the edges of a ladder whose unit cell has four
    vertices (a square a-b-d-c plus links b->a' and d->c' to the next cell);
    two resonators are coupled when their edges share a vertex.  Every cell
    therefore holds six resonators.
    """
    if cells < 1:
        raise ValueError("need at least one cell")

    def vid(cell, k):
        return 4 * cell + k  # k: a=0, b=1, c=2, d=3

    graph_edges = []
    for c in range(cells):
        a, b, cc, d = (vid(c, k) for k in range(4))
        graph_edges += [(a, b), (b, d), (d, cc), (cc, a)]
        if c + 1 < cells:
            graph_edges += [(b, vid(c + 1, 0)), (d, vid(c + 1, 2))]
    # the last cell has no outgoing links; give it two stub resonators so each
    # cell holds six sites
    last = cells - 1
    stub = 4 * cells
    graph_edges += [(vid(last, 1), stub), (vid(last, 3), stub + 1)]

    by_vertex: dict[int, list[int]] = {}
    for idx, (u, w) in enumerate(graph_edges):
        by_vertex.setdefault(u, []).append(idx)
        by_vertex.setdefault(w, []).append(idx)
    pairs = set()
    for members in by_vertex.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                pairs.add((min(members[i], members[j]), max(members[i], members[j])))
    return len(graph_edges), sorted(pairs)


def quasi1d_lattice(cells: int = 9, omega0: float = 4950.0, hopping: float = 30.0,
                    g0: float = 0.0, qubit_site: int = 0) -> LatticeSpec:
    """Illustrative 54-site chain (9 cells); parameters are placeholders."""
    n, edges = quasi1d_edges(cells)
    return LatticeSpec.from_edges(n, edges, omega0=omega0, hopping=hopping, g0=g0,
                                  qubit_site=qubit_site)


def chain_lattice(n_sites: int, omega0: float, hopping: float, g0: float = 0.0,
                  qubit_site: int = 0) -> LatticeSpec:
    return LatticeSpec.from_edges(n_sites, [(i, i + 1) for i in range(n_sites - 1)],
                                  omega0=omega0, hopping=hopping, g0=g0, qubit_site=qubit_site)
