import math

import pytest

from mixedfield.units import (
    DIPOLE_FIELD_CM1,
    HBAR_CM1_PS,
    KB_CM1_PER_K,
    OCS,
    UNITS,
    MoleculeSpec,
    UnitError,
    boltzmann_factor,
    laser_energy_scale,
    load_molecule,
    molecule_from_mapping,
    parse_key_values,
    stark_energy_scale,
)

# Reference SI values typed in by hand (CODATA 2018) as an independent oracle.
C_SI = 299792458.0
H_SI = 6.62607015e-34
K_SI = 1.380649e-23
DEBYE_SI = 3.335640952e-30
HC_CM = H_SI * C_SI * 100.0


def test_hbar_in_cm1_ps():
    assert HBAR_CM1_PS == pytest.approx(1.0 / (2 * math.pi * C_SI * 100 * 1e-12), rel=1e-12)
    assert HBAR_CM1_PS == pytest.approx(5.30884, rel=1e-5)


def test_boltzmann_constant():
    assert KB_CM1_PER_K == pytest.approx(K_SI / HC_CM, rel=1e-9)
    assert KB_CM1_PER_K == pytest.approx(0.695035, rel=1e-6)


def test_dipole_field_coupling():
    # 0.71 D in 300 V/cm
    expected = 0.71 * DEBYE_SI * 300.0 * 100.0 / HC_CM
    assert stark_energy_scale(0.71, 300.0) == pytest.approx(expected, rel=1e-8)
    assert stark_energy_scale(0.71, 300.0) == pytest.approx(3.5767e-3, rel=1e-4)
    assert DIPOLE_FIELD_CM1 == pytest.approx(DEBYE_SI * 100.0 / HC_CM, rel=1e-8)


def test_laser_coupling():
    # Delta_alpha E0^2 / 4 with E0^2 = 2 I / (c eps0) and Delta_alpha = 4 pi eps0 V
    vol = 4.04e-30
    intensity = 1e12 * 1e4
    energy_j = 2 * math.pi * vol * intensity / C_SI
    assert laser_energy_scale(4.04, 1e12) == pytest.approx(energy_j / HC_CM, rel=1e-8)
    assert laser_energy_scale(4.04, 1e12) == pytest.approx(42.625, rel=1e-4)


def test_negative_inputs_rejected():
    with pytest.raises(ValueError):
        stark_energy_scale(0.71, -1.0)
    with pytest.raises(ValueError):
        laser_energy_scale(4.04, -1.0)
    with pytest.raises(ValueError):
        boltzmann_factor(1, 0.0, 0.2)
    with pytest.raises(ValueError):
        boltzmann_factor(-1, 1.0, 0.2)


def test_boltzmann_factor():
    assert boltzmann_factor(0, 1.0, 0.2) == 1.0
    assert boltzmann_factor(2, 0.5, 0.2) == pytest.approx(math.exp(-6 * 0.2 / (0.5 * K_SI / HC_CM)))


def test_ocs_preset():
    assert OCS.B == pytest.approx(0.2029, abs=1e-4)
    assert OCS.mu == 0.71
    assert OCS.delta_alpha == 4.04
    assert load_molecule("OCS") is OCS


@pytest.mark.parametrize("kwargs", [dict(B=0.0, mu=1, delta_alpha=1), dict(B=1, mu=-1, delta_alpha=1), dict(B=1, mu=1, delta_alpha=math.nan)])
def test_molecule_validation(kwargs):
    with pytest.raises(ValueError):
        MoleculeSpec(name="x", **kwargs)


def test_molecule_file(tmp_path):
    path = tmp_path / "mol.txt"
    path.write_text("# linear rotor\nname = HCN\nB_cm1 = 1.478\nmu_debye = 2.98  # gas phase\ndalpha_A3 = 2.0\n")
    mol = load_molecule(path)
    assert mol == MoleculeSpec("HCN", 1.478, 2.98, 2.0)


def test_molecule_file_errors():
    with pytest.raises(UnitError, match="unknown molecule key"):
        molecule_from_mapping({"B": "1", "mu_debye": "1", "dalpha_A3": "1"})
    with pytest.raises(UnitError, match="missing"):
        molecule_from_mapping({"B_cm1": "1"})
    with pytest.raises(UnitError, match="not a number"):
        molecule_from_mapping({"B_cm1": "1 cm-1", "mu_debye": "1", "dalpha_A3": "1"})
    with pytest.raises(UnitError, match="duplicate"):
        parse_key_values("a = 1\na = 2")
    with pytest.raises(UnitError, match="expected"):
        parse_key_values("just words")


def test_unit_system_roundtrip():
    assert UNITS.energy_to_joule(UNITS.joule_to_energy(1e-22)) == pytest.approx(1e-22)
    assert UNITS.time_to_seconds(UNITS.seconds_to_time(3e-9)) == pytest.approx(3e-9)
    assert UNITS.hbar == HBAR_CM1_PS
