import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from starkkerr import swpt
from starkkerr.device import DeviceSpec, Mode
from starkkerr.extract import extract_couplings
from starkkerr.fockspace import assemble_hamiltonian, device_layout

ALPHA = 113.0
ULP_TOL = 8 * np.finfo(float).eps

factors = st.floats(1e-3, 1e3, allow_nan=False)
slopes_q = st.floats(-50.0, -0.5)
kerr_d = st.floats(-5e-2, -1e-4)
kerr_m = st.floats(-5e-2, -1e-4)


@settings(max_examples=1000, deadline=None)
@given(c=factors, sq=slopes_q, sd=kerr_d, sm=kerr_m)
def test_common_slope_scale_leaves_couplings(c, sq, sd, sm):
    a = extract_couplings(sq, sd, sm, -376.0, -367.0, ALPHA)
    b = extract_couplings(c * sq, c * sd, c * sm, -376.0, -367.0, ALPHA)
    assert abs(b.g_drive / a.g_drive - 1) <= ULP_TOL
    assert abs(b.g_monitor / a.g_monitor - 1) <= ULP_TOL


@settings(max_examples=200, deadline=None)
@given(gd=st.floats(1.0, 30.0), gm=st.floats(1.0, 30.0), dD=st.floats(-900, -150),
       dM=st.floats(-900, -150), alpha=st.floats(60, 350), beta=st.floats(0.1, 500))
def test_slopes_from_closed_forms_roundtrip(gd, gm, dD, dM, alpha, beta):
    sq = swpt.chi_stark(gd, dD, alpha) * beta
    sd = swpt.kerr_self(gd, dD, alpha) * beta
    sm = swpt.kerr_cross(gd, gm, dD, dM, alpha) * beta
    est = extract_couplings(sq, sd, sm, dD, dM, alpha)
    assert np.isclose(est.g_drive, gd, rtol=1e-10)
    assert np.isclose(est.g_monitor, gm, rtol=1e-10)


@given(g=st.floats(0.1, 40), d=st.floats(-900, -100), gb=st.floats(0.1, 40),
       db=st.floats(-900, -100))
def test_coefficients_even_in_each_coupling(g, d, gb, db):
    assert swpt.chi_stark(-g, d, ALPHA) == swpt.chi_stark(g, d, ALPHA)
    assert swpt.kerr_self(-g, d, ALPHA) == swpt.kerr_self(g, d, ALPHA)
    assert swpt.kerr_cross(-g, gb, d, db, ALPHA) == swpt.kerr_cross(g, gb, d, db, ALPHA)
    assert swpt.kerr_cross(g, -gb, d, db, ALPHA) == swpt.kerr_cross(g, gb, d, db, ALPHA)


@settings(max_examples=30, deadline=None)
@given(g=st.lists(st.floats(-40, 40), min_size=1, max_size=2),
       levels=st.integers(2, 4), frame=st.floats(0, 5000))
def test_hamiltonian_hermitian_and_conserves_excitations(g, levels, frame):
    modes = tuple(Mode(f"m{i}", 4900.0 + 30 * i, gi) for i, gi in enumerate(g))
    spec = DeviceSpec(4593.0, ALPHA, modes)
    layout = device_layout([m.name for m in modes], mode_levels=levels, qubit_levels=3)
    H = assemble_hamiltonian(spec, layout, frame=frame).entries
    assert np.allclose(H, H.conj().T, atol=0)
    N = np.diag([float(sum(lab)) for lab in layout.labels()])
    assert np.allclose(H @ N, N @ H)
