"""Second-order split-operator propagation of rotor wavefunctions.

One step is::

    psi' = exp(-i V dt / 2 hbar) exp(-i H_r dt / hbar) exp(-i V dt / 2 hbar) psi

with the potential V(theta, phi; t) applied pointwise on the angular grid and
the rotor term applied as exact phases on the coefficients. Fields are taken at
the step midpoint. In :func:`propagate_many` consecutive potential half-steps
are fused on the grid, so each step costs one analysis and one synthesis.

Several initial states of one symmetry block are propagated together as the
columns of a coefficient matrix; the grid transforms then run as real matrix
products on interleaved real/imaginary parts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import (
    RotorWavefunction,
    StateLabel,
    SymmetryBlock,
    block_for_label,
    field_free_state,
    get_transform,
)
from .fields import FieldConfiguration, dc_field_at, intensity_at
from .hamiltonian import cos2_theta_matrix, cos_theta_matrix, cos_theta_s_matrix, potential_grid
from .units import HBAR_CM1_PS, MoleculeSpec, laser_energy_scale, stark_energy_scale

logger = logging.getLogger(__name__)


class PropagationError(RuntimeError):
    """NaN/Inf in the wavefunction or a norm drift beyond tolerance."""


def default_j_max(i0: float) -> int:
    """Basis cutoff adequate for the peak intensity (W/cm^2)."""
    if i0 <= 1.01e11:
        return 24
    if i0 <= 1.01e12:
        return 40
    raise ValueError("no default basis cutoff above 1e12 W/cm^2; set j_max explicitly")


@dataclass(frozen=True)
class PropagationPlan:
    """Numerical controls.

    ``dt_pulse`` is the step at the pulse peak (ps). Elsewhere the step grows
    as ``dt_pulse * sqrt(I0 / I(t))`` up to ``dt_ramp``, which is also the
    step of the dc ramp. ``stride`` is the observable sampling interval in
    steps; ``snapshot_times`` (ps) are hit exactly and the wavefunction is
    stored there.
    """

    j_max: int = 40
    dt_pulse: float = 0.04
    dt_ramp: float = 0.5
    stride: int = 2000
    adaptive: bool = True
    norm_tol: float = 1e-8
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not (self.dt_pulse > 0 and self.dt_ramp > 0):
            raise ValueError("time steps must be positive")
        if self.stride < 1:
            raise ValueError("sampling stride must be >= 1")
        if self.j_max < 0:
            raise ValueError("j_max must be non-negative")


@dataclass
class Trajectory:
    label: StateLabel | None
    times: np.ndarray
    dc_field: np.ndarray
    intensity: np.ndarray
    cos_theta: np.ndarray
    cos_theta_s: np.ndarray
    cos2_theta: np.ndarray
    norm: np.ndarray
    final: RotorWavefunction
    snapshots: dict = field(default_factory=dict)
    n_steps: int = 0

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(1.0 - self.norm)))

    def to_csv(self, path) -> None:
        data = np.column_stack(
            [self.times, self.dc_field, self.intensity, self.cos_theta, self.cos2_theta, self.norm]
        )
        np.savetxt(
            path,
            data,
            delimiter=",",
            header="t_ps,E_Vcm,I_Wcm2,cos_theta,cos2_theta,norm",
            comments="",
            fmt="%.12g",
        )


def time_grid(config: FieldConfiguration, plan: PropagationPlan, t_end: float = 0.0) -> np.ndarray:
    """Step boundaries from the start of the dc ramp to ``t_end``."""
    dc, pulse = config.dc, config.pulse
    pieces = []
    if dc.ramp_duration > 0:
        n = max(1, math.ceil(dc.ramp_duration / plan.dt_ramp - 1e-9))
        pieces.append(np.linspace(dc.ramp_start, dc.ramp_end, n + 1)[:-1])
    t = max(dc.ramp_end, pulse.t_start)
    if dc.ramp_end < pulse.t_start:
        n = max(1, math.ceil((pulse.t_start - dc.ramp_end) / plan.dt_ramp - 1e-9))
        pieces.append(np.linspace(dc.ramp_end, pulse.t_start, n + 1)[:-1])
    out = []
    i0 = pulse.i0
    two_sig2 = 2.0 * pulse.sigma**2
    while t < t_end - 1e-12:
        out.append(t)
        if plan.adaptive and i0 > 0:
            # dt_pulse * sqrt(I0/I) evaluated at the step's left edge
            h = min(plan.dt_ramp, plan.dt_pulse * math.exp(t * t / (2.0 * two_sig2)))
        else:
            h = plan.dt_pulse if i0 > 0 else plan.dt_ramp
        t = min(t + h, t_end)
        if t_end - t < 1e-3 * h:
            t = t_end
    out.append(t_end)
    pieces.append(np.array(out))
    grid = np.concatenate(pieces)
    if plan.snapshot_times:
        extra = [s for s in plan.snapshot_times if grid[0] < s < grid[-1]]
        grid = np.unique(np.concatenate([grid, extra]))
    return grid


class _Kernel:
    """Precomputed grids and phases for one block, molecule and geometry."""

    def __init__(self, block: SymmetryBlock, molecule: MoleculeSpec, beta: float):
        if block.m is not None and beta != 0:
            raise ValueError("tilted fields need a parity block")
        self.block = block
        self.molecule = molecule
        self.tr = get_transform(block, half_phi=True)
        cos_s, cos2 = potential_grid(self.tr, beta)
        self.cos_s = cos_s[:, :, None]
        self.cos2 = cos2[:, :, None]
        J = np.arange(block.j_max + 1, dtype=float)
        self.rot = np.broadcast_to(molecule.B * J * (J + 1.0), (len(self.tr.m_values), block.j_max + 1))[:, :, None]
        self.w_dc = stark_energy_scale(molecule.mu, 1.0)
        self.w_l = laser_energy_scale(1.0, 1.0) * molecule.delta_alpha

    def couplings(self, e_s, intensity):
        """(mu E_s, I Delta_alpha / 2 c eps0) in cm^-1, sign convention V = -a cos_s - b cos2."""
        return self.w_dc * e_s, self.w_l * intensity

    def kick(self, a_dt, b_dt):
        """exp(-i V dt / hbar) for V = -a cos_s - b cos2, given a*dt and b*dt."""
        phase = (a_dt / HBAR_CM1_PS) * self.cos_s + (b_dt / HBAR_CM1_PS) * self.cos2
        return np.exp(1j * phase)

    def synth(self, C):
        """Complex padded coefficients (n_m, n_J, k) -> complex grid (n_phi, n_theta, k)."""
        tr = self.tr
        k = C.shape[-1]
        G = np.matmul(tr.L, C.view(np.float64))
        if tr.fixed_m:
            return G.view(np.complex128).reshape(1, tr.grid.n_theta, k)
        out = tr.F @ G.reshape(G.shape[0], -1)
        return out.reshape(len(tr.phi), tr.grid.n_theta, 2 * k).view(np.complex128)

    def anal(self, g):
        tr = self.tr
        k = g.shape[-1]
        if tr.fixed_m:
            G = g.view(np.float64).reshape(1, tr.grid.n_theta, 2 * k)
        else:
            G = (tr.FtW @ g.view(np.float64).reshape(g.shape[0], -1)).reshape(len(tr.m_values), tr.grid.n_theta, 2 * k)
        return np.matmul(tr.LtW, G).view(np.complex128)


def split_step(
    psi: RotorWavefunction, t: float, dt: float, config: FieldConfiguration, molecule: MoleculeSpec
) -> RotorWavefunction:
    """One Strang step from t to t + dt with fields at t + dt/2."""
    kern = _Kernel(psi.block, molecule, config.beta)
    tm = t + 0.5 * dt
    a, b = kern.couplings(dc_field_at(config.dc, tm), intensity_at(config.pulse, tm))
    half = kern.kick(0.5 * a * dt, 0.5 * b * dt)
    C = kern.tr.pad(psi.coeffs)[:, :, None].astype(complex)
    C = kern.anal(half * kern.synth(C))
    C = C * np.exp(-1j * kern.rot * dt / HBAR_CM1_PS)
    C = kern.anal(half * kern.synth(C))
    c = kern.tr.unpad(C[:, :, 0])
    if not np.all(np.isfinite(c)):
        raise PropagationError(f"non-finite wavefunction after step at t={t} ps")
    return RotorWavefunction(psi.block, c, t + dt)


def run_block(
    block: SymmetryBlock,
    initial: np.ndarray,
    config: FieldConfiguration,
    molecule: MoleculeSpec,
    plan: PropagationPlan,
    boundaries: np.ndarray | None = None,
    labels=None,
) -> list[Trajectory]:
    """Propagate the columns of ``initial`` (dim x k) through ``boundaries``."""
    if boundaries is None:
        boundaries = time_grid(config, plan)
    initial = np.asarray(initial, dtype=complex)
    if initial.ndim == 1:
        initial = initial[:, None]
    k = initial.shape[1]
    kern = _Kernel(block, molecule, config.beta)
    tr = kern.tr
    C = np.ascontiguousarray(tr.pad(initial))
    ops = {
        "cos": cos_theta_matrix(block),
        "cos2": cos2_theta_matrix(block),
        "cos_s": cos_theta_s_matrix(block, config.beta),
    }
    n_steps = len(boundaries) - 1
    snap_set = {float(s) for s in plan.snapshot_times}
    snap_idx = {i for i, t in enumerate(boundaries) if float(t) in snap_set}

    samples = {key: [] for key in ("t", "E", "I", "cos", "cos_s", "cos2", "norm")}
    snapshots: list[dict] = [dict() for _ in range(k)]

    def record(i, C):
        c = tr.unpad(C)
        if not np.all(np.isfinite(c)):
            raise PropagationError(f"non-finite wavefunction at t={boundaries[i]} ps")
        t = float(boundaries[i])
        samples["t"].append(t)
        samples["E"].append(dc_field_at(config.dc, t))
        samples["I"].append(intensity_at(config.pulse, t))
        norm = np.einsum("ij,ij->j", c.conj(), c).real
        samples["norm"].append(norm)
        for key in ("cos", "cos_s", "cos2"):
            samples[key].append(np.einsum("ij,ik,kj->j", c.conj(), ops[key], c).real / norm)
        if i in snap_idx:
            for j in range(k):
                snapshots[j][t] = c[:, j].copy()
        return c

    record(0, C)
    g = kern.synth(C)
    pend_a = pend_b = 0.0  # pending potential half-kick (a*dt, b*dt)
    mids = 0.5 * (boundaries[1:] + boundaries[:-1])
    dts = np.diff(boundaries)
    w_dc, w_l = kern.w_dc, kern.w_l
    rot = kern.rot
    last_dt = None
    for n in range(n_steps):
        dt = dts[n]
        tm = mids[n]
        a = w_dc * dc_field_at(config.dc, tm)
        b = w_l * intensity_at(config.pulse, tm)
        g *= kern.kick(pend_a + 0.5 * a * dt, pend_b + 0.5 * b * dt)
        C = kern.anal(g)
        if dt != last_dt:
            kin = np.exp(-1j * rot * (dt / HBAR_CM1_PS))
            last_dt = dt
        C *= kin
        g = kern.synth(C)
        pend_a, pend_b = 0.5 * a * dt, 0.5 * b * dt
        i = n + 1
        if i == n_steps or i % plan.stride == 0 or i in snap_idx:
            g *= kern.kick(pend_a, pend_b)
            pend_a = pend_b = 0.0
            C = kern.anal(g)
            record(i, C)
            if i < n_steps:
                g = kern.synth(C)
    c_final = tr.unpad(C)

    arr = {key: np.array(v) for key, v in samples.items()}
    out = []
    for j in range(k):
        final = RotorWavefunction(block, c_final[:, j], float(boundaries[-1]))
        out.append(
            Trajectory(
                label=None if labels is None else labels[j],
                times=arr["t"],
                dc_field=arr["E"],
                intensity=arr["I"],
                cos_theta=arr["cos"][:, j],
                cos_theta_s=arr["cos_s"][:, j],
                cos2_theta=arr["cos2"][:, j],
                norm=arr["norm"][:, j],
                final=final,
                snapshots=snapshots[j],
                n_steps=n_steps,
            )
        )
    return out


def propagate_many(
    labels,
    config: FieldConfiguration,
    molecule: MoleculeSpec,
    plan: PropagationPlan,
    strict: bool = True,
) -> dict[StateLabel, Trajectory]:
    """Propagate field-free states ``labels`` from the start of the dc ramp to t = 0.

    States sharing a symmetry block are propagated together. With
    ``strict=False`` a norm drift beyond ``plan.norm_tol`` is logged instead of
    raised; check :attr:`Trajectory.norm_drift`.
    """
    groups: dict[SymmetryBlock, list[StateLabel]] = {}
    for lab in labels:
        block = block_for_label(lab, plan.j_max, config.beta)
        groups.setdefault(block, []).append(lab)
    boundaries = time_grid(config, plan)
    results = {}
    for block, labs in groups.items():
        init = np.column_stack([field_free_state(lab, block).coeffs for lab in labs])
        logger.info("propagating %d state(s) in %s block (dim %d, %d steps)", len(labs), block.mode, block.dim, len(boundaries) - 1)
        for lab, traj in zip(labs, run_block(block, init, config, molecule, plan, boundaries, labs)):
            if traj.norm_drift > plan.norm_tol:
                msg = f"state {lab}: norm drift {traj.norm_drift:.2e} exceeds {plan.norm_tol:.0e}; increase j_max"
                if strict:
                    raise PropagationError(msg)
                logger.warning(msg)
            results[lab] = traj
    return results


def propagate(label: StateLabel, config: FieldConfiguration, molecule: MoleculeSpec, plan: PropagationPlan) -> Trajectory:
    """Propagate one field-free state; raises :class:`PropagationError` on failure."""
    return propagate_many([label], config, molecule, plan)[label]
