"""Symmetry-adapted spherical-harmonic basis and angular quadrature grid.

Basis functions are real and have definite parity under reflection through
the XZ-plane (phi -> -phi)::

    e:  Theta_JM(cos theta) cos(M phi) / sqrt(pi)     (M > 0)
        Theta_J0(cos theta) / sqrt(2 pi)              (M = 0)
    o:  Theta_JM(cos theta) sin(M phi) / sqrt(pi)     (M > 0)

``Theta_JM`` is the associated Legendre function without the Condon-Shortley
phase, normalized on [-1, 1]. In terms of complex harmonics the e-function is
((-1)^M Y_{J,M} + Y_{J,-M}) / sqrt(2).

The grid is Gauss-Legendre in cos(theta) times a uniform grid in phi. The
coefficient (FBR) and grid (DVR) representations are connected by
:func:`synthesize` and :func:`analyze`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.fft import next_fast_len
from scipy.special import roots_legendre

PARITIES = ("e", "o")


@dataclass(frozen=True, order=True)
class StateLabel:
    """Field-free label (J, |M|, parity) of a rotor state."""

    J: int
    absM: int
    parity: str = "e"

    def __post_init__(self):
        if self.J < 0 or not 0 <= self.absM <= self.J:
            raise ValueError(f"invalid label J={self.J}, |M|={self.absM}")
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be 'e' or 'o', got {self.parity!r}")
        if self.absM == 0 and self.parity == "o":
            raise ValueError("|M| = 0 states only exist with even parity")

    def __str__(self):
        if self.absM > 9:
            return f"{self.J},{self.absM},{self.parity}"
        return f"{self.J}{self.absM}{self.parity}"

    @classmethod
    def parse(cls, text: str) -> "StateLabel":
        """Parse ``"2,0,e"`` or ``"20e"`` (single-digit form)."""
        text = text.strip()
        if "," in text:
            J, M, p = (s.strip() for s in text.split(","))
        else:
            J, M, p = text[:-2], text[-2], text[-1]
        return cls(int(J), int(M), p)


@dataclass(frozen=True)
class SymmetryBlock:
    """A set of basis functions closed under the Hamiltonian.

    ``m`` is set for the parallel-field mode (beta = 0), where |M| is
    conserved; it is ``None`` for tilted fields, where only the parity is.
    """

    j_max: int
    parity: str
    beta: float
    m: int | None

    @property
    def mode(self) -> str:
        return "parallel" if self.m is not None else "tilted"

    @cached_property
    def labels(self) -> tuple[StateLabel, ...]:
        if self.m is not None:
            return tuple(StateLabel(J, self.m, self.parity) for J in range(self.m, self.j_max + 1))
        m0 = 0 if self.parity == "e" else 1
        return tuple(
            StateLabel(J, m, self.parity)
            for J in range(self.j_max + 1)
            for m in range(m0, J + 1)
        )

    @property
    def dim(self) -> int:
        return len(self.labels)

    @cached_property
    def J(self) -> np.ndarray:
        return np.array([lab.J for lab in self.labels])

    @cached_property
    def M(self) -> np.ndarray:
        return np.array([lab.absM for lab in self.labels])

    @cached_property
    def m_values(self) -> np.ndarray:
        return np.unique(self.M)

    def index(self, label: StateLabel) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"label {label} not in block {self}") from None

    @cached_property
    def _index(self):
        return {lab: k for k, lab in enumerate(self.labels)}

    def __contains__(self, label):
        return label in self._index


def build_block(j_max: int, beta: float = 0.0, parity: str = "e", M: int | None = None) -> SymmetryBlock:
    """Basis block for the given field geometry.

    Parallel fields (beta = 0) need the conserved ``M``; tilted fields must
    not pass one.
    """
    if j_max < 0:
        raise ValueError("j_max must be non-negative")
    if parity not in PARITIES:
        raise ValueError(f"parity must be 'e' or 'o', got {parity!r}")
    if beta == 0:
        if M is None:
            raise ValueError("parallel fields (beta = 0) require a fixed M")
        M = abs(int(M))
        if M > j_max:
            raise ValueError(f"|M|={M} exceeds j_max={j_max}")
        if M == 0 and parity == "o":
            raise ValueError("|M| = 0 has no odd-parity states")
        return SymmetryBlock(j_max, parity, 0.0, M)
    if M is not None:
        raise ValueError("tilted fields do not conserve M; pass M=None")
    if parity == "o" and j_max < 1:
        raise ValueError("odd-parity block needs j_max >= 1")
    return SymmetryBlock(j_max, parity, float(beta), None)


def block_for_label(label: StateLabel, j_max: int, beta: float) -> SymmetryBlock:
    if beta == 0:
        return build_block(j_max, 0.0, label.parity, label.absM)
    return build_block(j_max, beta, label.parity)


def normalized_legendre(m: int, j_max: int, x: np.ndarray) -> np.ndarray:
    """Theta_Jm(x) for J = m..j_max, shape (j_max - m + 1, len(x)).

    Orthonormal on [-1, 1], no Condon-Shortley phase.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros((j_max - m + 1, x.size))
    if m > j_max:
        return out
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.full(x.size, math.sqrt(0.5))
    for k in range(1, m + 1):
        pmm = pmm * math.sqrt((2 * k + 1) / (2 * k)) * s
    out[0] = pmm
    if j_max > m:
        out[1] = math.sqrt(2 * m + 3) * x * pmm
    for J in range(m + 2, j_max + 1):
        a = math.sqrt((4 * J * J - 1) / (J * J - m * m))
        b = math.sqrt(((J - 1) ** 2 - m * m) / (4 * (J - 1) ** 2 - 1))
        out[J - m] = a * (x * out[J - m - 1] - b * out[J - m - 2])
    return out


def phi_functions(m_values, parity: str, phi: np.ndarray) -> np.ndarray:
    """Normalized azimuthal factors, shape (len(phi), len(m_values))."""
    phi = np.asarray(phi, dtype=float)
    m_values = np.asarray(m_values)
    ang = np.outer(phi, m_values)
    if parity == "e":
        F = np.cos(ang) / math.sqrt(math.pi)
        F[:, m_values == 0] = 1.0 / math.sqrt(2.0 * math.pi)
    else:
        F = np.sin(ang) / math.sqrt(math.pi)
    return F


def _orthonormalize(table: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Symmetric (Loewdin) orthonormalization of rows under a weighted sum.

    Removes the ~1e-14 quadrature residue so repeated transforms do not bias
    the norm.
    """
    gram = (table * weights) @ table.T
    vals, vecs = np.linalg.eigh(gram)
    return (vecs / np.sqrt(vals)) @ vecs.T @ table


class AngularGrid:
    """Gauss-Legendre (cos theta) x uniform (phi) quadrature grid.

    ``n_theta = j_max + 2`` integrates every product of two basis functions
    with the cos^2 theta potential exactly; ``n_phi`` is the smallest even
    FFT-friendly size >= 2 j_max + 5.
    """

    def __init__(self, j_max: int):
        self.j_max = int(j_max)
        self.n_theta = self.j_max + 2
        x, w = roots_legendre(self.n_theta)
        self.x = x
        self.w = w
        n = next_fast_len(2 * self.j_max + 5)
        while n % 2:
            n = next_fast_len(n + 1)
        self.n_phi = n
        self.phi = 2.0 * math.pi * np.arange(n) / n
        self.w_phi = 2.0 * math.pi / n
        self._tables: dict[int, np.ndarray] = {}

    def __repr__(self):
        return f"AngularGrid(j_max={self.j_max}, n_theta={self.n_theta}, n_phi={self.n_phi})"

    @property
    def cos_theta(self):
        return self.x

    @property
    def sin_theta(self):
        return np.sqrt(1.0 - self.x**2)

    def theta_table(self, m: int) -> np.ndarray:
        """Orthonormalized Theta_Jm at the nodes, shape (j_max - m + 1, n_theta)."""
        if m not in self._tables:
            raw = normalized_legendre(m, self.j_max, self.x)
            self._tables[m] = _orthonormalize(raw, self.w)
        return self._tables[m]

    def weights(self) -> np.ndarray:
        """Full quadrature weights, shape (n_theta, n_phi); they sum to 4 pi."""
        return np.outer(self.w, np.full(self.n_phi, self.w_phi))


@lru_cache(maxsize=16)
def get_grid(j_max: int) -> AngularGrid:
    return AngularGrid(j_max)


class BlockTransform:
    """Synthesis/analysis pair for one block on one grid.

    Coefficients live in a padded layout ``(n_m, j_max + 1, ...)`` indexed by
    (M, J); entries with J < M are identically zero. Grid values have layout
    ``(n_phi, n_theta, ...)``.

    With ``half_phi=True`` only the nodes phi in [0, pi] are kept, with doubled
    interior weights. This is exact for a definite-parity block acted on by a
    potential even in phi. A parallel-field block drops the phi axis entirely
    (its azimuthal factor is common to every basis function).
    """

    def __init__(self, block: SymmetryBlock, grid: AngularGrid, half_phi: bool = False):
        if grid.j_max != block.j_max:
            raise ValueError(f"grid j_max {grid.j_max} != block j_max {block.j_max}")
        self.block = block
        self.grid = grid
        ms = block.m_values
        self.m_values = ms
        n_m, n_J = len(ms), block.j_max + 1
        L = np.zeros((n_m, grid.n_theta, n_J))
        for k, m in enumerate(ms):
            L[k, :, m:] = grid.theta_table(int(m)).T
        self.L = L
        self.LtW = np.ascontiguousarray(L.transpose(0, 2, 1) * grid.w)
        m_pos = {int(m): k for k, m in enumerate(ms)}
        self.rows = np.array([m_pos[lab.absM] for lab in block.labels])
        self.cols = block.J.copy()
        self.fixed_m = block.m is not None
        if self.fixed_m:
            self.phi = np.zeros(1)
            self.F = np.ones((1, 1))
            self.FtW = np.ones((1, 1))
        else:
            if half_phi:
                n = grid.n_phi // 2
                phi = grid.phi[: n + 1]
                wphi = np.full(n + 1, 2.0 * grid.w_phi)
                wphi[0] = wphi[-1] = grid.w_phi
            else:
                phi = grid.phi
                wphi = np.full(grid.n_phi, grid.w_phi)
            F = phi_functions(ms, block.parity, phi)
            self.phi = phi
            self.F = _orthonormalize(F.T, wphi).T
            self.FtW = np.ascontiguousarray(self.F.T * wphi)
        self.half_phi = half_phi and not self.fixed_m

    @property
    def grid_shape(self):
        return (len(self.phi), self.grid.n_theta)

    def pad(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs)
        out = np.zeros((len(self.m_values), self.block.j_max + 1) + coeffs.shape[1:], dtype=coeffs.dtype)
        out[self.rows, self.cols] = coeffs
        return out

    def unpad(self, padded: np.ndarray) -> np.ndarray:
        return padded[self.rows, self.cols]

    def synthesize_padded(self, C: np.ndarray) -> np.ndarray:
        """(n_m, n_J, *rest) -> (n_phi, n_theta, *rest) for real or complex C."""
        rest = C.shape[2:]
        G = np.matmul(self.L, C.reshape(C.shape[0], C.shape[1], -1))
        if self.fixed_m:
            return G.reshape((1, self.grid.n_theta) + rest)
        out = self.F @ G.reshape(G.shape[0], -1)
        return out.reshape((len(self.phi), self.grid.n_theta) + rest)

    def analyze_padded(self, values: np.ndarray) -> np.ndarray:
        rest = values.shape[2:]
        if self.fixed_m:
            G = values.reshape(1, self.grid.n_theta, -1)
        else:
            G = (self.FtW @ values.reshape(values.shape[0], -1)).reshape(len(self.m_values), self.grid.n_theta, -1)
        C = np.matmul(self.LtW, G)
        return C.reshape((len(self.m_values), self.block.j_max + 1) + rest)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.synthesize_padded(self.pad(coeffs))

    def analyze(self, values: np.ndarray) -> np.ndarray:
        return self.unpad(self.analyze_padded(values))

    def operator_matrix(self, values: np.ndarray) -> np.ndarray:
        """Matrix of a multiplicative function given at this transform's nodes."""
        eye = np.eye(self.block.dim)
        f = np.asarray(values)[:, :, None]
        return self.analyze(f * self.synthesize(eye))


_transforms: dict = {}


def get_transform(block: SymmetryBlock, half_phi: bool = False) -> BlockTransform:
    key = (block, half_phi)
    if key not in _transforms:
        _transforms[key] = BlockTransform(block, get_grid(block.j_max), half_phi=half_phi)
    return _transforms[key]


@dataclass
class RotorWavefunction:
    """Coefficient vector over a block's basis at time ``time`` (ps)."""

    block: SymmetryBlock
    coeffs: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.block.dim,):
            raise ValueError(f"expected {self.block.dim} coefficients, got {self.coeffs.shape}")

    @property
    def norm(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    @classmethod
    def basis_state(cls, block: SymmetryBlock, label: StateLabel, time: float = 0.0):
        c = np.zeros(block.dim, complex)
        c[block.index(label)] = 1.0
        return cls(block, c, time)


def _full_phi_factor(block: SymmetryBlock, grid: AngularGrid) -> np.ndarray:
    return phi_functions(block.m_values, block.parity, grid.phi)


def synthesize(psi: RotorWavefunction, grid: AngularGrid) -> np.ndarray:
    """Values psi(theta_i, phi_j) on the full grid, shape (n_theta, n_phi)."""
    if grid.j_max != psi.block.j_max:
        raise ValueError(f"grid j_max {grid.j_max} does not match block j_max {psi.block.j_max}")
    tr = get_transform(psi.block)
    G = np.matmul(tr.L, tr.pad(psi.coeffs)[:, :, None])[:, :, 0]  # (n_m, n_theta)
    F = _full_phi_factor(psi.block, grid)
    return (F @ G).T


def analyze(values: np.ndarray, grid: AngularGrid, block: SymmetryBlock) -> np.ndarray:
    """Coefficients of grid values; the quadrature adjoint of :func:`synthesize`."""
    values = np.asarray(values)
    if values.shape != (grid.n_theta, grid.n_phi):
        raise ValueError(f"grid values must have shape {(grid.n_theta, grid.n_phi)}, got {values.shape}")
    if grid.j_max != block.j_max:
        raise ValueError(f"grid j_max {grid.j_max} does not match block j_max {block.j_max}")
    F = _full_phi_factor(block, grid)
    G = (F.T * grid.w_phi) @ values.T  # (n_m, n_theta)
    out = np.zeros((len(block.m_values), block.j_max + 1), dtype=np.result_type(values, float))
    for k, m in enumerate(block.m_values):
        out[k, m:] = grid.theta_table(int(m)) @ (grid.w * G[k])
    m_pos = {int(m): k for k, m in enumerate(block.m_values)}
    rows = [m_pos[lab.absM] for lab in block.labels]
    return out[rows, block.J]


def evaluate(coeffs: np.ndarray, block: SymmetryBlock, cos_theta, phi) -> np.ndarray:
    """Evaluate a wavefunction at arbitrary directions (broadcast shapes)."""
    x, ph = np.broadcast_arrays(np.asarray(cos_theta, float), np.asarray(phi, float))
    shape = x.shape
    x, ph = x.ravel(), ph.ravel()
    coeffs = np.asarray(coeffs)
    out = np.zeros(x.size, dtype=np.result_type(coeffs, float))
    for m in block.m_values:
        sel = block.M == m
        if not np.any(coeffs[sel]):
            continue
        table = normalized_legendre(int(m), block.j_max, x)
        radial = coeffs[sel] @ table[block.J[sel] - m]
        out += radial * phi_functions([m], block.parity, ph)[:, 0]
    return out.reshape(shape)


def field_free_state(label: StateLabel, block: SymmetryBlock) -> RotorWavefunction:
    """Field-free eigenstate carrying ``label`` in the frame of the dc field.

    For parallel fields this is a basis vector. For tilted fields the state is
    quantized along the dc field direction (sin b, 0, cos b), which is the
    field-free state adiabatically connected to the dc-dressed state with the
    same label; it is obtained by projecting the rotated function onto the
    block by quadrature (exact, since it is band-limited to J).
    """
    if label not in block:
        raise KeyError(f"label {label} not in block")
    if block.m is not None or block.beta == 0:
        return RotorWavefunction.basis_state(block, label)
    grid = get_grid(block.j_max)
    cb, sb = math.cos(block.beta), math.sin(block.beta)
    X = grid.x[:, None]
    S = grid.sin_theta[:, None]
    cp, sp = np.cos(grid.phi)[None, :], np.sin(grid.phi)[None, :]
    # field-frame coordinates: z' along the dc field, x' = R_y(beta) X
    zp = cb * X + sb * S * cp
    xp = cb * S * cp - sb * X
    yp = S * sp
    phip = np.arctan2(yp, xp)
    values = (
        normalized_legendre(label.absM, label.J, np.clip(zp, -1, 1).ravel())[-1]
        * phi_functions([label.absM], label.parity, phip.ravel())[:, 0]
    ).reshape(zp.shape)
    c = analyze(values, grid, block)
    c = c / np.linalg.norm(c)
    return RotorWavefunction(block, c.astype(complex))
