"""Orientation and alignment expectation values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import RotorWavefunction
from .hamiltonian import cos2_theta_matrix, cos_theta_matrix, cos_theta_s_matrix


def expectation(psi: RotorWavefunction, operator: np.ndarray, tol: float = 1e-10) -> float:
    """<psi|O|psi> for a Hermitian matrix O in psi's block."""
    operator = np.asarray(operator)
    if operator.shape != (psi.block.dim, psi.block.dim):
        raise ValueError(f"operator shape {operator.shape} does not match block dimension {psi.block.dim}")
    scale = max(1.0, float(np.abs(operator).max(initial=0.0)))
    if np.abs(operator - operator.conj().T).max(initial=0.0) > tol * scale:
        raise ValueError("operator is not Hermitian")
    value = np.vdot(psi.coeffs, operator @ psi.coeffs)
    if abs(value.imag) > tol * scale:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


@dataclass(frozen=True)
class ObservableSet:
    cos_theta: float
    cos_theta_s: float
    cos2_theta: float
    time: float = 0.0

    def __post_init__(self):
        eps = 1e-10
        if abs(self.cos_theta) > 1 + eps or abs(self.cos_theta_s) > 1 + eps:
            raise ValueError(f"orientation cosine out of bounds: {self}")
        if not -eps <= self.cos2_theta <= 1 + eps:
            raise ValueError(f"alignment cosine out of bounds: {self}")


def observables(psi: RotorWavefunction, beta: float | None = None) -> ObservableSet:
    block = psi.block
    if beta is None:
        beta = block.beta
    return ObservableSet(
        cos_theta=expectation(psi, cos_theta_matrix(block)),
        cos_theta_s=expectation(psi, cos_theta_s_matrix(block, beta)),
        cos2_theta=expectation(psi, cos2_theta_matrix(block)),
        time=psi.time,
    )
