import pytest

from starkkerr.device import ConfigError, DeviceSpec, Mode, photons_per_power_from_slope


def test_mode_derives_q_from_kappa():
    m = Mode("D", 5000.0, 10.0, kappa=0.5)
    assert m.Q == pytest.approx(10000.0)
    m2 = Mode("D", 5000.0, 10.0, Q=2500.0)
    assert m2.kappa == pytest.approx(2.0)


def test_mode_rejects_inconsistent_q():
    with pytest.raises(ConfigError):
        Mode("D", 5000.0, 10.0, kappa=0.5, Q=100.0)


@pytest.mark.parametrize("name", ["", "q"])
def test_mode_rejects_reserved_names(name):
    with pytest.raises(ConfigError):
        Mode(name, 5000.0, 1.0)


def test_roundtrip_dict(ba_device):
    again = DeviceSpec.from_dict(ba_device.to_dict())
    assert again == ba_device


def test_unknown_key_rejected(ba_device):
    d = ba_device.to_dict()
    d["qubit"]["T1_us"] = 30
    with pytest.raises(ConfigError, match="unknown keys"):
        DeviceSpec.from_dict(d)


def test_missing_key_rejected():
    with pytest.raises(ConfigError, match="missing"):
        DeviceSpec.from_dict({"qubit": {"omega_MHz": 4593.0}, "modes": []})


def test_duplicate_mode_names():
    with pytest.raises(ConfigError):
        DeviceSpec(4593.0, 113.0, (Mode("A", 4960, 1), Mode("A", 4970, 1)))


def test_negative_alpha_rejected():
    with pytest.raises(ConfigError):
        DeviceSpec(4593.0, -113.0, (Mode("A", 4960, 1),))


def test_detuning_convention(ba_device):
    assert ba_device.detuning("D") == pytest.approx(4593.0 - 4969.0)


def test_dispersive_violations():
    spec = DeviceSpec(4593.0, 113.0, (Mode("A", 4600.0, 5.0), Mode("B", 4993.0, 5.0)))
    assert spec.dispersive_violations() == ["A"]


def test_drive_conversion_closure(ba_device):
    d = ba_device.mode("D")
    assert ba_device.drive_conversion("D") == pytest.approx(ba_device.beta * (d.kappa / 2) ** 2)
    with_zeta = ba_device.replace(zeta=0.3)
    assert with_zeta.drive_conversion("D") == 0.3


def test_load_yaml(tmp_path, ba_device):
    import yaml
    p = tmp_path / "dev.yaml"
    p.write_text(yaml.safe_dump({"device": ba_device.to_dict()}))
    assert DeviceSpec.load(p) == ba_device


def test_with_mode_resets_q(ba_device):
    dev = ba_device.with_mode("D", kappa=0.4)
    assert dev.mode("D").Q == pytest.approx(4969.0 / 0.4)


def test_photons_per_power():
    assert photons_per_power_from_slope(-4.0, -0.5) == 8.0
    with pytest.raises(ValueError):
        photons_per_power_from_slope(-4.0, 0.0)
