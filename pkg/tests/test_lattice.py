import csv

import numpy as np
import pytest

from starkkerr import lattice as L
from starkkerr.device import ConfigError


def test_chain_spectrum_analytic():
    N, w0, t = 12, 4950.0, 25.0
    nm = L.normal_modes(L.chain_lattice(N, w0, t))
    k = np.arange(1, N + 1)
    assert np.allclose(nm.frequencies, np.sort(w0 - 2 * t * np.cos(k * np.pi / (N + 1))))


def test_ring_spectrum_analytic():
    N = 8
    edges = [(i, (i + 1) % N) for i in range(N)]
    nm = L.normal_modes(L.LatticeSpec.from_edges(N, edges, omega0=5000.0, hopping=10.0))
    k = np.arange(N)
    assert np.allclose(nm.frequencies, np.sort(5000.0 - 20.0 * np.cos(2 * np.pi * k / N)))


def test_couplings_sum_rule():
    lat = L.quasi1d_lattice(g0=40.0, qubit_site=7)
    nm = L.normal_modes(lat)
    assert np.sum(nm.couplings**2) == pytest.approx(40.0**2)


def test_permutation_invariance():
    lat = L.quasi1d_lattice(cells=3, g0=30.0, qubit_site=4)
    perm = np.random.default_rng(3).permutation(lat.n_sites)
    a, b = L.normal_modes(lat), L.normal_modes(lat.permuted(perm))
    assert np.allclose(a.frequencies, b.frequencies)
    # |g| per mode is basis independent (degenerate flat-band modes aside)
    nondeg = np.abs(a.frequencies - (lat.omega0 + 2 * lat.hopping)) > 1e-6
    assert np.allclose(np.abs(a.couplings[nondeg]), np.abs(b.couplings[nondeg]))


@pytest.mark.parametrize("cells", [1, 3, 9])
def test_quasi1d_flat_band_multiplicity(cells):
    # sites are edges of a bipartite root graph with 4 cells + 2 vertices;
    # adjacency eigenvalue -2 of its line graph has multiplicity E - V + 1
    lat = L.quasi1d_lattice(cells)
    assert lat.n_sites == 6 * cells
    nm = L.normal_modes(lat)
    flat = np.sum(np.abs(nm.frequencies - (lat.omega0 + 2 * lat.hopping)) < 1e-9)
    assert flat == lat.n_sites - (4 * cells + 2) + 1


def test_wavefunction_sign_convention():
    nm = L.normal_modes(L.chain_lattice(6, 5000, 10))
    for col in nm.wavefunctions.T:
        first = col[np.abs(col) > 1e-9][0]
        assert first > 0


def test_disconnected_warns():
    lat = L.LatticeSpec.from_edges(4, [(0, 1), (2, 3)], omega0=5000, hopping=10)
    with pytest.warns(L.DisconnectedLatticeWarning):
        L.normal_modes(lat)


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 5)]])
def test_bad_edges(edges):
    with pytest.raises(ConfigError):
        L.LatticeSpec.from_edges(3, edges, omega0=1, hopping=1)


def test_from_dict_generator_and_explicit():
    a = L.LatticeSpec.from_dict({"generator": "quasi1d", "cells": 2, "omega0_MHz": 4950,
                                 "hopping_MHz": 30})
    b = L.LatticeSpec.from_dict(a.to_dict())
    assert np.array_equal(a.adjacency, b.adjacency)
    with pytest.raises(ConfigError):
        L.LatticeSpec.from_dict({"generator": "honeycomb", "omega0_MHz": 1, "hopping_MHz": 1})
    with pytest.raises(ConfigError):
        L.LatticeSpec.from_dict({"n_sites": 2, "omega0_MHz": 1, "hopping_MHz": 1, "U": 3})


def test_dos_counts_all_modes():
    nm = L.normal_modes(L.quasi1d_lattice())
    counts, edges = L.density_of_states(nm, 5.0)
    assert counts.sum() == len(nm)
    assert np.allclose(np.diff(edges), 5.0)
    with pytest.raises(ValueError):
        L.density_of_states(nm, 0.0)


def test_modes_csv_and_device(tmp_path):
    nm = L.normal_modes(L.chain_lattice(5, 4950, 20, g0=30))
    p = tmp_path / "m.csv"
    nm.to_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["mode_index", "freq_MHz", "g_MHz"]
    dev = nm.device(4593.0, 113.0, [0, 4], ["A", "B"], kappa=0.1)
    assert dev.mode("B").omega == pytest.approx(nm.frequencies[4])
    assert dev.mode("A").g == pytest.approx(nm.couplings[0])
