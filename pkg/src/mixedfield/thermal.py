"""Boltzmann weights of field-free rotational states and thermal averages."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import brentq

from .basis import StateLabel
from .units import KB_CM1_PER_K, MoleculeSpec


class TruncationError(ValueError):
    """The requested J cutoff drops too much of the partition function."""


@dataclass(frozen=True)
class WeightTable:
    """Per-state weights W_J for J = 0..j_cut (each of the 2J+1 states)."""

    T: float
    j_cut: int
    per_state: np.ndarray
    deficit: float

    @property
    def manifold(self) -> np.ndarray:
        """(2J+1) W_J, the population of each J manifold."""
        J = np.arange(self.j_cut + 1)
        return (2 * J + 1) * self.per_state


def _boltzmann_terms(T, B, j_stop):
    J = np.arange(j_stop + 1)
    return (2 * J + 1) * np.exp(-J * (J + 1) * B / (KB_CM1_PER_K * T))


def weights(T: float, molecule: MoleculeSpec, j_cut: int = 9, max_deficit: float = 1e-6) -> WeightTable:
    """Boltzmann weights normalized over J <= j_cut.

    The deficit is the fraction of the untruncated partition function carried
    by J > j_cut; a deficit above ``max_deficit`` raises.
    """
    if not T > 0:
        raise ValueError("temperature must be positive")
    if j_cut < 0:
        raise ValueError("j_cut must be non-negative")
    B = molecule.B
    j_stop = j_cut
    while True:
        j_stop = max(2 * j_stop, 16)
        terms = _boltzmann_terms(T, B, j_stop)
        if terms[-1] < 1e-18 * terms.sum():
            break
    total = math.fsum(terms)
    kept = math.fsum(terms[: j_cut + 1])
    deficit = 1.0 - kept / total
    if deficit > max_deficit:
        raise TruncationError(
            f"J <= {j_cut} leaves out {deficit:.2e} of the population at T={T} K "
            f"(limit {max_deficit:.0e}); increase j_cut"
        )
    J = np.arange(j_cut + 1)
    per_state = np.exp(-J * (J + 1) * B / (KB_CM1_PER_K * T)) / kept
    return WeightTable(T, j_cut, per_state, deficit)


@dataclass(frozen=True)
class ThermalEnsemble:
    """Members (label, weight) of a thermal sample.

    For parallel fields the +M and -M states behave identically and are
    represented once by the (J, |M|, e) label with twice the weight; for tilted
    fields the e and o states are separate members.
    """

    T: float
    j_cut: int
    tilted: bool
    members: tuple

    @property
    def labels(self) -> list[StateLabel]:
        return [lab for lab, _ in self.members]

    def weight(self, label: StateLabel) -> float:
        for lab, w in self.members:
            if lab == label:
                return w
        raise KeyError(label)


def member_labels(j_cut: int, tilted: bool) -> list[StateLabel]:
    out = []
    for J in range(j_cut + 1):
        for m in range(J + 1):
            out.append(StateLabel(J, m, "e"))
            if tilted and m > 0:
                out.append(StateLabel(J, m, "o"))
    return out


def ensemble(T: float, molecule: MoleculeSpec, j_cut: int = 9, tilted: bool = True, max_deficit: float = 1e-6) -> ThermalEnsemble:
    """Thermal ensemble at temperature T; T = 0 gives the ground state alone."""
    if T == 0:
        return ThermalEnsemble(0.0, j_cut, tilted, ((StateLabel(0, 0, "e"), 1.0),))
    table = weights(T, molecule, j_cut, max_deficit)
    members = []
    for lab in member_labels(j_cut, tilted):
        mult = 1 if (tilted or lab.absM == 0) else 2
        members.append((lab, mult * float(table.per_state[lab.J])))
    return ThermalEnsemble(T, j_cut, tilted, tuple(members))


def ensemble_average(ens: ThermalEnsemble, values: Mapping[StateLabel, float], min_weight: float = 1e-8) -> float:
    """Weighted sum over members; members below ``min_weight`` may be absent."""
    total = 0.0
    missing = []
    for lab, w in ens.members:
        if lab in values:
            total += w * values[lab]
        elif w > min_weight:
            missing.append(str(lab))
    if missing:
        raise KeyError(f"no per-state value for members {missing}")
    return total


def thermal_curve(temperatures, molecule, values, tilted, j_cut=9, max_deficit=1e-6) -> np.ndarray:
    return np.array(
        [ensemble_average(ensemble(T, molecule, j_cut, tilted, max_deficit), values) for T in temperatures]
    )


def threshold_temperature(
    func: Callable[[float], float], level: float, t_lo: float, t_hi: float, n_scan: int = 200
) -> float:
    """Highest T in [t_lo, t_hi] up to which ``func(T) >= level`` holds continuously from t_lo.

    Returns ``t_hi`` if the level is never crossed and ``t_lo`` if it fails at t_lo.
    """
    ts = np.linspace(t_lo, t_hi, n_scan)
    vals = np.array([func(t) for t in ts]) - level
    if vals[0] < 0:
        return float(t_lo)
    below = np.flatnonzero(vals < 0)
    if below.size == 0:
        return float(t_hi)
    k = below[0]
    return float(brentq(lambda t: func(t) - level, ts[k - 1], ts[k], xtol=1e-6))
