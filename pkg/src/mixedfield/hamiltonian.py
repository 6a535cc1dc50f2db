"""Matrix representations of the rotor Hamiltonian in a symmetry block.

Angular matrix elements are obtained by quadrature on the block's grid, which
is exact for the degree-2 angular factors used here.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .basis import SymmetryBlock, get_grid, get_transform
from .units import MoleculeSpec, laser_energy_scale, stark_energy_scale


def _grid_factors(block: SymmetryBlock):
    tr = get_transform(block)
    grid = get_grid(block.j_max)
    x = np.broadcast_to(grid.x[None, :], tr.grid_shape)
    s = np.broadcast_to(grid.sin_theta[None, :], tr.grid_shape)
    cp = np.broadcast_to(np.cos(tr.phi)[:, None], tr.grid_shape)
    return tr, x, s, cp


@lru_cache(maxsize=64)
def _matrix(block: SymmetryBlock, name: str) -> np.ndarray:
    tr, x, s, cp = _grid_factors(block)
    if name == "cos":
        f = x
    elif name == "cos2":
        f = x * x
    elif name == "sincos":
        if block.m is not None:
            raise ValueError("sin(theta)cos(phi) couples |M| to |M|+-1; needs a tilted-field block")
        f = s * cp
    else:
        raise KeyError(name)
    M = tr.operator_matrix(f).real
    M = 0.5 * (M + M.T)
    M[np.abs(M) < 1e-15] = 0.0
    M.setflags(write=False)
    return M


def cos_theta_matrix(block: SymmetryBlock) -> np.ndarray:
    """<J'M'|cos(theta)|JM>: Delta J = +-1, Delta M = 0."""
    return _matrix(block, "cos")


def sin_theta_cos_phi_matrix(block: SymmetryBlock) -> np.ndarray:
    return _matrix(block, "sincos")


def cos2_theta_matrix(block: SymmetryBlock) -> np.ndarray:
    """<J'M'|cos^2(theta)|JM>: Delta J in {0, +-2}, Delta M = 0."""
    return _matrix(block, "cos2")


def cos_theta_s_matrix(block: SymmetryBlock, beta: float) -> np.ndarray:
    """cos(theta_s) = cos(beta) cos(theta) + sin(beta) sin(theta) cos(phi)."""
    if beta == 0:
        return cos_theta_matrix(block)
    if block.m is not None:
        raise ValueError("tilted dc field (beta != 0) needs a parity block, not a fixed-M block")
    return math.cos(beta) * cos_theta_matrix(block) + math.sin(beta) * sin_theta_cos_phi_matrix(block)


def rotational_energies(block: SymmetryBlock, B: float) -> np.ndarray:
    return B * block.J * (block.J + 1.0)


def assemble_h(block: SymmetryBlock, molecule: MoleculeSpec, e_s: float, intensity: float, beta: float | None = None) -> np.ndarray:
    """H = B J^2 - mu E_s cos(theta_s) - (I Delta_alpha / 2 c eps0) cos^2(theta), in cm^-1."""
    if beta is None:
        beta = block.beta
    H = np.diag(rotational_energies(block, molecule.B))
    w_dc = stark_energy_scale(molecule.mu, e_s)
    if w_dc:
        H = H - w_dc * cos_theta_s_matrix(block, beta)
    w_l = laser_energy_scale(molecule.delta_alpha, intensity)
    if w_l:
        H = H - w_l * cos2_theta_matrix(block)
    return H


def potential_grid(tr, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """cos(theta_s) and cos^2(theta) at the nodes of a :class:`BlockTransform`."""
    grid = tr.grid
    x = grid.x[None, :]
    cos_s = math.cos(beta) * x + math.sin(beta) * grid.sin_theta[None, :] * np.cos(tr.phi)[:, None]
    cos_s = np.broadcast_to(cos_s, tr.grid_shape).copy()
    cos2 = np.broadcast_to(x * x, tr.grid_shape).copy()
    return cos_s, cos2
