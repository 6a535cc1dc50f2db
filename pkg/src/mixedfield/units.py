"""Physical constants, unit conversions and molecular parameters.

Internal units: energies in cm^-1, times in ps, angles in radians, dc field
strengths in V/cm and laser intensities in W/cm^2. Every factor below is
derived from the CODATA values shipped with :mod:`scipy.constants`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from scipy import constants as _c

# CODATA-derived primaries
_HC_J_CM = _c.h * _c.c * 100.0  # J per cm^-1
_DEBYE_CM = 1e-21 / _c.c  # C m
SPEED_OF_LIGHT_CM_PS = _c.c * 100.0 * 1e-12

#: hbar in cm^-1 ps, i.e. 1 / (2 pi c)
HBAR_CM1_PS = 1.0 / (2.0 * math.pi * SPEED_OF_LIGHT_CM_PS)
#: Boltzmann constant in cm^-1 / K
KB_CM1_PER_K = _c.k / _HC_J_CM
#: mu * E in cm^-1 for 1 D and 1 V/cm
DIPOLE_FIELD_CM1 = _DEBYE_CM * 100.0 / _HC_J_CM
#: Delta_alpha * I / (2 c eps0) in cm^-1 for a polarizability volume of 1 A^3 and 1 W/cm^2
INTENSITY_POLARIZABILITY_CM1 = 2.0 * math.pi * 1e-30 * 1e4 / _c.c / _HC_J_CM


@dataclass(frozen=True)
class UnitSystem:
    """Conversion factors between SI and the internal unit system."""

    energy_unit: str = "cm^-1"
    time_unit: str = "ps"
    kb: float = KB_CM1_PER_K
    dipole_field: float = DIPOLE_FIELD_CM1
    intensity_polarizability: float = INTENSITY_POLARIZABILITY_CM1
    hbar: float = HBAR_CM1_PS

    def joule_to_energy(self, value: float) -> float:
        return value / _HC_J_CM

    def energy_to_joule(self, value: float) -> float:
        return value * _HC_J_CM

    def seconds_to_time(self, value: float) -> float:
        return value * 1e12

    def time_to_seconds(self, value: float) -> float:
        return value * 1e-12


UNITS = UnitSystem()


class UnitError(ValueError):
    """Raised for a malformed or unit-less molecule parameter."""


@dataclass(frozen=True)
class MoleculeSpec:
    """Rigid linear polar molecule.

    Parameters
    ----------
    name : str
    B : float
        Rotational constant in cm^-1.
    mu : float
        Permanent dipole moment in Debye.
    delta_alpha : float
        Polarizability anisotropy as a polarizability volume in A^3.
    """

    name: str
    B: float
    mu: float
    delta_alpha: float

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError(f"rotational constant must be positive, got {self.B}")
        if not self.mu >= 0:
            raise ValueError(f"dipole moment must be non-negative, got {self.mu}")
        if not math.isfinite(self.delta_alpha):
            raise ValueError("polarizability anisotropy must be finite")


OCS = MoleculeSpec(name="OCS", B=0.20286, mu=0.71, delta_alpha=4.04)
PRESETS = {"ocs": OCS}

# config key -> (MoleculeSpec field, unit suffix)
_MOLECULE_KEYS = {
    "B_cm1": "B",
    "mu_debye": "mu",
    "dalpha_A3": "delta_alpha",
}


def stark_energy_scale(mu: float, e_s: float) -> float:
    """Magnitude of the dipole coupling mu*E_s in cm^-1 (mu in D, E_s in V/cm)."""
    if e_s < 0:
        raise ValueError(f"dc field strength must be non-negative, got {e_s}")
    return mu * e_s * DIPOLE_FIELD_CM1


def laser_energy_scale(delta_alpha: float, intensity: float) -> float:
    """Laser coupling I*Delta_alpha/(2 c eps0) in cm^-1 (A^3, W/cm^2)."""
    if intensity < 0:
        raise ValueError(f"laser intensity must be non-negative, got {intensity}")
    return delta_alpha * intensity * INTENSITY_POLARIZABILITY_CM1


def boltzmann_factor(J: int, T: float, B: float) -> float:
    """exp(-B J(J+1) / kT)."""
    if J < 0:
        raise ValueError("J must be non-negative")
    if not T > 0:
        raise ValueError("temperature must be positive; T=0 is the ground-state limit")
    return math.exp(-J * (J + 1) * B / (KB_CM1_PER_K * T))


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UnitError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise UnitError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def molecule_from_mapping(values: dict[str, str]) -> MoleculeSpec:
    values = dict(values)
    name = values.pop("name", "molecule")
    kwargs = {}
    for key, raw in values.items():
        if key not in _MOLECULE_KEYS:
            raise UnitError(
                f"unknown molecule key {key!r}; expected one of name, {', '.join(_MOLECULE_KEYS)}"
            )
        try:
            kwargs[_MOLECULE_KEYS[key]] = float(raw)
        except ValueError:
            raise UnitError(f"{key}: not a number: {raw!r}") from None
    missing = set(_MOLECULE_KEYS.values()) - kwargs.keys()
    if missing:
        raise UnitError(f"missing molecule parameters: {sorted(missing)}")
    return MoleculeSpec(name=name, **kwargs)


def load_molecule(ref: str | Path) -> MoleculeSpec:
    """Load a preset by name (``ocs``) or a key-value molecule file."""
    if isinstance(ref, str) and ref.lower() in PRESETS:
        return PRESETS[ref.lower()]
    path = Path(ref)
    return molecule_from_mapping(parse_key_values(path.read_text()))
