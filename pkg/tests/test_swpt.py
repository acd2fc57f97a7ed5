
import numpy as np
import pytest

from starkkerr import swpt
from starkkerr.device import DeviceSpec, Mode
from starkkerr.fockspace import FockSpaceError, exact_coefficients

ALPHA = 113.0


def test_two_level_orders_match_series():
    # E0 = -(sqrt(D^2 + 4v^2) - D)/2 = -v^2/D + v^4/D^3 - ...
    D, v = 50.0, 1.5
    corr = swpt.sw_corrections([0.0, D], np.array([[0, v], [v, 0]]))
    h = [np.real(np.diag(x.entries)) for x in (corr.H2, corr.H3, corr.H4)]
    assert h[0] == pytest.approx([-v**2 / D, v**2 / D])
    assert np.allclose(h[1], 0)
    assert h[2] == pytest.approx([v**4 / D**3, -v**4 / D**3])


def test_third_order_loop():
    # Rayleigh-Schrodinger third order for a closed loop V01 V12 V20
    E = np.array([0.0, 7.0, 19.0])
    V = np.array([[0, 0.3, 0.2], [0.3, 0, 0.4], [0.2, 0.4, 0]])
    corr = swpt.sw_corrections(E, V)
    rs3 = V[0, 1] * V[1, 2] * V[2, 0] * 2 / ((E[0] - E[1]) * (E[0] - E[2]))
    assert np.real(corr.H3.entries[0, 0]) == pytest.approx(rs3, rel=1e-12)


def test_generator_is_hermitian_and_solves_commutator():
    rng = np.random.default_rng(1)
    E = np.cumsum(1 + rng.random(5))
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    V = (A + A.conj().T) / 2
    np.fill_diagonal(V, 0)
    G = swpt.sw_generator1(E, V).entries
    # U = exp(iG) with G Hermitian
    assert np.allclose(G, G.conj().T)
    # [G1, H0] = i V  fixes the first-order generator
    H0 = np.diag(E)
    assert np.allclose(G @ H0 - H0 @ G, 1j * V)


def test_degenerate_coupled_pair_raises():
    with pytest.raises(swpt.DegenerateSpectrumError):
        swpt.sw_corrections([0.0, 1e-9, 5.0], np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]))


def test_degenerate_uncoupled_pair_allowed():
    # 0 and 1 are degenerate but sit in separate blocks, so no order connects them
    V = np.zeros((4, 4))
    V[0, 2] = V[2, 0] = V[1, 3] = V[3, 1] = 1.0
    corr = swpt.sw_corrections([0.0, 0.0, 5.0, 6.0], V)
    assert np.isfinite(corr.shifts()).all()


def test_gap_floor_is_configurable():
    V = np.array([[0, 1], [1, 0]], float)
    swpt.sw_corrections([0.0, 1e-3], V)
    with pytest.raises(swpt.DegenerateSpectrumError):
        swpt.sw_corrections([0.0, 1e-3], V, gap_floor=1e-2)


def test_diagonal_coupling_rejected():
    with pytest.raises(FockSpaceError):
        swpt.sw_corrections([0.0, 1.0], np.array([[0.1, 1], [1, 0]]))


def _single(g, delta):
    return DeviceSpec(4593.0, ALPHA, (Mode("D", 4593.0 - delta, g),))


@pytest.mark.parametrize("delta", [-404.0, -250.0, 300.0])
def test_closed_forms_vs_exact_single_mode(delta, quiet_dispersive):
    g = 0.02 * abs(delta)
    ex = exact_coefficients(_single(g, delta), ["D"], mode_levels=6, qubit_levels=7)
    assert swpt.chi_stark(g, delta, ALPHA) == pytest.approx(ex.chi_stark_D, rel=0.01)
    assert swpt.kerr_self(g, delta, ALPHA) == pytest.approx(ex.chi_DD, rel=0.01)


def test_cross_kerr_vs_exact_straddling(quiet_dispersive):
    wd, wm, wq = 4997.0, 4450.0, 4593.0
    dD, dM = wq - wd, wq - wm
    gD, gM = 0.03 * abs(dD), 0.03 * abs(dM)
    spec = DeviceSpec(wq, ALPHA, (Mode("D", wd, gD), Mode("M", wm, gM)))
    ex = exact_coefficients(spec, ["D", "M"], 5, 6)
    assert swpt.kerr_cross(gD, gM, dD, dM, ALPHA) == pytest.approx(ex.chi_DM, rel=0.01)


def test_near_degenerate_modes_hybridize(ba_device):
    # modes 9 MHz apart mix through the qubit, so two-mode exact values move
    # away from the single-mode closed forms while single-mode exact agrees
    c = swpt.device_coefficients(ba_device, "D", "M")
    two = exact_coefficients(ba_device, ["D", "M"])
    one = exact_coefficients(ba_device, ["D"])
    assert c.chi_stark_D == pytest.approx(one.chi_stark_D, rel=0.005)
    assert abs(c.chi_stark_D / two.chi_stark_D - 1) > 0.03


def test_level_zero_reduces_to_ground_forms():
    g, d = 14.2, -376.0
    assert swpt.chi_stark_level(g, d, ALPHA, 0) == pytest.approx(swpt.chi_stark(g, d, ALPHA))
    cf = swpt.kerr_excited(0, g, 13.4, d, -367.0, ALPHA)
    assert cf.chi_self == swpt.kerr_self(g, d, ALPHA)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_stark_level_matches_engine(level):
    g, d = 12.0, -380.0
    nu = swpt.numeric_kerr_coefficients(g, 9.0, d, -300.0, ALPHA, level)
    assert swpt.chi_stark_level(g, d, ALPHA, level) == pytest.approx(nu.chi_stark, rel=1e-10)


def test_ground_kerr_matches_engine():
    g, gb, d, db = 14.2, 13.4, -376.0, -367.0
    nu = swpt.numeric_kerr_coefficients(g, gb, d, db, ALPHA, 0)
    assert swpt.kerr_self(g, d, ALPHA) == pytest.approx(nu.chi_self, rel=1e-10)
    assert swpt.kerr_cross(g, gb, d, db, ALPHA) == pytest.approx(nu.chi_cross, rel=1e-10)


def test_level_two_has_no_closed_form():
    with pytest.raises(ValueError):
        swpt.kerr_excited(2, 1, 1, -300, -310, ALPHA)


def test_tls_limit_ground_state():
    g, d = 10.0, -400.0
    big = 1e4 * abs(d)
    assert swpt.chi_stark(g, d, big) == pytest.approx(swpt.tls_stark(g, d), rel=1e-3)
    assert swpt.kerr_self(g, d, big) == pytest.approx(swpt.tls_kerr_self(g, d), rel=1e-3)


def test_linear_limit_is_zero():
    cf = swpt.kerr_excited(1, 10.0, 9.0, -400.0, -350.0, 0.0)
    assert abs(cf.chi_self) < 1e-12 and abs(cf.chi_cross) < 1e-12
    assert swpt.kerr_self(10.0, -400.0, 0.0) == 0.0


@pytest.mark.parametrize("call", [
    lambda: swpt.chi_stark(10, 0.0, ALPHA),
    lambda: swpt.chi_stark(10, ALPHA, ALPHA),
    lambda: swpt.kerr_self(10, ALPHA / 2, ALPHA),
    lambda: swpt.kerr_cross(10, 10, 50.0, ALPHA - 50.0, ALPHA),
    lambda: swpt.chi_stark_level(10, ALPHA, ALPHA, 1),
])
def test_poles_raise(call):
    with pytest.raises(swpt.ResonanceError):
        call()


def test_coupling_sign_irrelevant():
    assert swpt.chi_stark(-14.2, -376, ALPHA) == swpt.chi_stark(14.2, -376, ALPHA)
    assert swpt.kerr_cross(-3, 4, -376, -367, ALPHA) == swpt.kerr_cross(3, -4, -376, -367, ALPHA)


def test_ground_state_signs_below_modes():
    # qubit below both modes: AC-Stark and both Kerr terms pull down
    c = swpt.device_coefficients(DeviceSpec(4593.0, ALPHA, (Mode("D", 4969, 14.2), Mode("M", 4960, 13.4))),
                                 "D", "M")
    assert c.chi_stark_D < 0 and c.chi_DD < 0 and c.chi_DM < 0
