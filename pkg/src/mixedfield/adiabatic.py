"""Adiabatic (fixed-field) spectra, label transport and wavefunction projection.

Inside one symmetry block all levels share the same symmetry, so adiabatic
curves never cross. Labels are therefore fixed by the energy rank once they
are known at the dc-only point of the path (dc switched on first, then the
laser), where each level is identified by its overlap with the field-free
states quantized along the dc field.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .basis import RotorWavefunction, StateLabel, SymmetryBlock, field_free_state
from .hamiltonian import assemble_h
from .units import MoleculeSpec


class AmbiguousAssignment(UserWarning):
    pass


@dataclass
class AdiabaticSpectrum:
    block: SymmetryBlock
    e_s: float
    intensity: float
    beta: float
    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple

    def index(self, label: StateLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label} not in spectrum") from None

    def energy(self, label: StateLabel) -> float:
        return float(self.energies[self.index(label)])

    def vector(self, label: StateLabel) -> np.ndarray:
        return self.vectors[:, self.index(label)]


@dataclass
class ProjectionRecord:
    time: float
    labels: tuple
    coefficients: np.ndarray
    populations: np.ndarray

    def population(self, label: StateLabel) -> float:
        return float(self.populations[self.labels.index(label)])

    def top(self, n: int = 5):
        order = np.argsort(-self.populations)[:n]
        return [(self.labels[k], float(self.populations[k])) for k in order]


def _diagonalize(block, molecule, e_s, intensity, beta):
    H = assemble_h(block, molecule, e_s, intensity, beta)
    try:
        return eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver failed at E_s={e_s}, I={intensity}: {exc}") from exc


@lru_cache(maxsize=64)
def rank_labels(block: SymmetryBlock, molecule: MoleculeSpec, e_s: float, beta: float) -> tuple:
    """Field-free label of each adiabatic level, in ascending energy order.

    Parallel fields conserve |M| and the dc-only levels keep the field-free J
    order. For tilted fields the dc-only eigenvectors are matched to the
    field-free states quantized along the dc field by maximal overlap.
    """
    if block.m is not None:
        return block.labels
    _, vecs = _diagonalize(block, molecule, e_s, 0.0, beta)
    ref = np.column_stack([field_free_state(lab, block).coeffs.real for lab in block.labels])
    overlap = (ref.T @ vecs) ** 2
    rows, cols = linear_sum_assignment(overlap, maximize=True)
    labels = [None] * block.dim
    for r, c in zip(rows, cols):
        labels[c] = block.labels[r]
    return tuple(labels)


def adiabatic_spectrum(
    molecule: MoleculeSpec, e_s: float, intensity: float, beta: float, block: SymmetryBlock
) -> AdiabaticSpectrum:
    """Full eigendecomposition of the fixed-field Hamiltonian, labelled."""
    energies, vectors = _diagonalize(block, molecule, e_s, intensity, beta)
    labels = rank_labels(block, molecule, float(e_s), float(beta))
    return AdiabaticSpectrum(block, e_s, intensity, beta, energies, vectors, labels)


def track_labels(prev: AdiabaticSpectrum, nxt: AdiabaticSpectrum, tol: float = 1e-6) -> tuple:
    """Carry labels from ``prev`` to ``nxt`` by maximal-overlap assignment.

    Ties (overlaps within ``tol``) are broken by energy order and reported
    with an :class:`AmbiguousAssignment` warning.
    """
    if prev.block != nxt.block:
        raise ValueError("label transport needs spectra of the same block")
    overlap = np.abs(prev.vectors.T @ nxt.vectors) ** 2
    n = overlap.shape[0]
    rank_gap = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    rows, cols = linear_sum_assignment(overlap - (0.1 * tol / n) * rank_gap, maximize=True)
    labels = [None] * n
    for r, c in zip(rows, cols):
        labels[c] = prev.labels[r]
        row = overlap[r]
        best = row[c]
        rivals = np.flatnonzero((best - row < tol) & (np.arange(n) != c))
        if best > tol and rivals.size:
            options = [str(prev.labels[r])] + [f"level {j}" for j in rivals]
            warnings.warn(
                f"ambiguous transport of {prev.labels[r]}: levels {c} and {list(rivals)} overlap "
                f"within {tol:g} ({options}); kept energy order",
                AmbiguousAssignment,
                stacklevel=2,
            )
    return tuple(labels)


def track_path(molecule, e_s, beta, block, intensities) -> list[AdiabaticSpectrum]:
    """Spectra along an intensity path with overlap-transported labels."""
    spectra = []
    for k, intensity in enumerate(intensities):
        spec = adiabatic_spectrum(molecule, e_s, intensity, beta, block)
        if k:
            spec.labels = track_labels(spectra[-1], spec)
        spectra.append(spec)
    return spectra


def project(psi: RotorWavefunction, spec: AdiabaticSpectrum) -> ProjectionRecord:
    """C_j = <adiabatic state j | psi> for every level of the block."""
    if psi.block != spec.block:
        raise ValueError("wavefunction and spectrum belong to different blocks")
    coeffs = spec.vectors.T.conj() @ psi.coeffs
    return ProjectionRecord(psi.time, spec.labels, coeffs, np.abs(coeffs) ** 2)


def adiabatic_observable(spec: AdiabaticSpectrum, label: StateLabel, operator: np.ndarray) -> float:
    v = spec.vector(label)
    return float(np.real(v.conj() @ operator @ v))


def adiabatic_gap(molecule, e_s, intensity, beta, block, label_a, label_b) -> float:
    spec = adiabatic_spectrum(molecule, e_s, intensity, beta, block)
    return abs(spec.energy(label_a) - spec.energy(label_b))


def find_avoided_crossing(
    molecule: MoleculeSpec,
    e_s: float,
    beta: float,
    block: SymmetryBlock,
    label_a: StateLabel,
    label_b: StateLabel,
    i_lo: float,
    i_hi: float,
    points_per_decade: int = 40,
) -> tuple[float, float]:
    """Intensity (W/cm^2) and size (cm^-1) of the smallest gap between two levels.

    The gap is scanned on a logarithmic grid in [i_lo, i_hi] and the best grid
    point is refined by a bounded scalar minimization in log10(I).
    """
    decades = math.log10(i_hi / i_lo)
    grid = np.logspace(math.log10(i_lo), math.log10(i_hi), max(3, int(points_per_decade * decades) + 1))
    gaps = np.array([adiabatic_gap(molecule, e_s, i, beta, block, label_a, label_b) for i in grid])
    k = int(np.argmin(gaps))
    lo = math.log10(grid[max(k - 1, 0)])
    hi = math.log10(grid[min(k + 1, len(grid) - 1)])
    res = minimize_scalar(
        lambda u: adiabatic_gap(molecule, e_s, 10.0**u, beta, block, label_a, label_b),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-5},
    )
    return 10.0 ** float(res.x), float(res.fun)


def rising_edge_times(pulse, intensities) -> np.ndarray:
    """Times (ps, <= 0) at which the pulse's rising edge reaches each intensity."""
    intensities = np.asarray(intensities, dtype=float)
    if np.any(intensities <= 0) or np.any(intensities > pulse.i0):
        raise ValueError("intensities must lie in (0, I0]")
    return -pulse.sigma * np.sqrt(2.0 * np.log(pulse.i0 / intensities))


def projection_series(trajectory, config, molecule) -> list[ProjectionRecord]:
    """Project every stored snapshot of a trajectory on the instantaneous spectrum."""
    from .fields import dc_field_at, intensity_at

    block = trajectory.final.block
    out = []
    for t in sorted(trajectory.snapshots):
        spec = adiabatic_spectrum(molecule, dc_field_at(config.dc, t), intensity_at(config.pulse, t), config.beta, block)
        psi = RotorWavefunction(block, trajectory.snapshots[t], t)
        out.append(project(psi, spec))
    return out
