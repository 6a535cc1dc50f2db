"""Ion-imaging model: up/down orientation ratio and 2D screen images.

Fragments fly along the molecular axis u and hit a screen. A
:class:`ScreenGeometry` fixes the screen normal n (the projection direction)
and the vertical axis v; a fragment lands at (y, z) = (u.(v x n), u.v) and
counts as "up" when z > 0. The probe detects a molecule with weight cos^2 of
the angle between its axis and the probe polarization: ``vertical`` points
along v, ``perpendicular`` along n, and ``circular`` rotates in the (n, v)
plane and averages the two. In screen-frame polar angles (polar axis v,
azimuth from n) the weights are cos^2 t, sin^2 t cos^2 p and their mean.

Two geometries are provided. ``laser_plane`` puts the screen in the
laboratory YZ plane (n = X, v = Z, the laser polarization). ``field_normal``
puts the screen perpendicular to a dc field tilted by beta in the XZ plane,
with v the screen projection of the laser polarization; it needs beta != 0
and coincides with ``laser_plane`` at beta = 90 degrees.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .basis import RotorWavefunction, evaluate


class ProbePolarization(str, enum.Enum):
    VERTICAL = "vertical"
    PERPENDICULAR = "perpendicular"
    CIRCULAR = "circular"


PROBES = tuple(ProbePolarization)

MIN_RASTER = 32


@dataclass(frozen=True)
class ScreenGeometry:
    """Screen normal and vertical axis as laboratory unit vectors."""

    normal: tuple
    vertical: tuple
    name: str = "custom"

    def __post_init__(self):
        n = np.asarray(self.normal, float)
        v = np.asarray(self.vertical, float)
        if abs(np.linalg.norm(n) - 1) > 1e-12 or abs(np.linalg.norm(v) - 1) > 1e-12 or abs(n @ v) > 1e-12:
            raise ValueError("screen normal and vertical axis must be orthonormal")

    @classmethod
    def laser_plane(cls) -> "ScreenGeometry":
        return cls((1.0, 0.0, 0.0), (0.0, 0.0, 1.0), "laser_plane")

    @classmethod
    def field_normal(cls, beta: float) -> "ScreenGeometry":
        if abs(math.sin(beta)) < 1e-9:
            raise ValueError("a screen normal to the dc field has no up/down axis when beta = 0")
        sb, cb = math.sin(beta), math.cos(beta)
        sign = 1.0 if sb > 0 else -1.0
        return cls((sb, 0.0, cb), (-sign * cb, 0.0, sign * sb), "field_normal")

    @classmethod
    def for_fields(cls, beta: float) -> "ScreenGeometry":
        """Default: normal to the dc field when tilted, laser plane otherwise."""
        return cls.field_normal(beta) if beta != 0 else cls.laser_plane()

    @property
    def frame(self) -> np.ndarray:
        """Rows: screen-frame axes (n, v x n, v) in laboratory coordinates."""
        n = np.asarray(self.normal, float)
        v = np.asarray(self.vertical, float)
        return np.array([n, np.cross(v, n), v])

    def to_lab(self, x, y, z):
        """Laboratory (cos theta, phi) of the screen-frame vector (x, y, z)."""
        R = self.frame
        ux = R[0, 0] * x + R[1, 0] * y + R[2, 0] * z
        uy = R[0, 1] * x + R[1, 1] * y + R[2, 1] * z
        uz = R[0, 2] * x + R[1, 2] * y + R[2, 2] * z
        return np.clip(uz, -1.0, 1.0), np.arctan2(uy, ux)


def detection_weight(theta, phi, probe) -> np.ndarray:
    """Selectivity weight of an axis at screen-frame polar angles (theta, phi)."""
    probe = ProbePolarization(probe)
    ct = np.cos(theta)
    st = np.sin(theta)
    vertical = ct**2
    perpendicular = (st * np.cos(phi)) ** 2
    if probe is ProbePolarization.VERTICAL:
        return vertical
    if probe is ProbePolarization.PERPENDICULAR:
        return perpendicular
    return 0.5 * (vertical + perpendicular)


def _weight_xyz(x, z, probe):
    probe = ProbePolarization(probe)
    if probe is ProbePolarization.VERTICAL:
        return z**2
    if probe is ProbePolarization.PERPENDICULAR:
        return x**2
    return 0.5 * (x**2 + z**2)


@dataclass(frozen=True)
class OrientationRatio:
    n_up: float
    n_tot: float

    @property
    def n_down(self) -> float:
        return self.n_tot - self.n_up

    @property
    def ratio(self) -> float:
        return self.n_up / self.n_tot


Density = Callable[[np.ndarray, np.ndarray], np.ndarray]


def density_function(psi: RotorWavefunction) -> Density:
    """rho(cos t, p) = |psi|^2.

    For fixed-M blocks the state stands for the signed-M eigenstate, whose
    density is azimuthally uniform (the mean of the e and o densities).
    """
    block = psi.block
    coeffs = psi.coeffs
    if block.m is None:
        def rho(x, phi):
            return np.abs(evaluate(coeffs, block, x, phi)) ** 2
        return rho
    scale = 1.0 if block.m == 0 else 0.5

    def rho(x, phi):
        x, phi = np.broadcast_arrays(x, phi)
        return scale * np.abs(evaluate(coeffs, block, x, np.zeros_like(phi))) ** 2
    return rho


def _as_density(source, degree, geometry):
    if isinstance(source, RotorWavefunction):
        if geometry is None:
            geometry = ScreenGeometry.for_fields(source.block.beta)
        return density_function(source), source.block.j_max, geometry
    if callable(source):
        if degree is None:
            raise ValueError("a bare density needs its angular degree (J_max of the underlying state)")
        return source, degree, geometry or ScreenGeometry.laser_plane()
    raise TypeError("expected a RotorWavefunction or a density callable")


def nup_ntot(
    source: Union[RotorWavefunction, Density],
    probe,
    degree: int | None = None,
    geometry: ScreenGeometry | None = None,
) -> OrientationRatio:
    """Weighted counts of axes pointing up (u.v >= 0) and in total.

    The sphere is split at the screen's horizon and each hemisphere is
    integrated in screen-frame coordinates with its own Gauss-Legendre rule,
    exact for a density of angular degree <= ``degree`` times the quadratic
    weight. ``geometry`` defaults to :meth:`ScreenGeometry.for_fields` of the
    state's tilt angle (laser plane for bare densities).
    """
    rho, jm, geometry = _as_density(source, degree, geometry)
    n_x = jm + 3
    n_phi = 2 * jm + 4
    nodes, w = leggauss(n_x)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    w_phi = 2 * np.pi / n_phi
    parts = []
    for lo in (0.0, -1.0):
        zs = lo + 0.5 * (nodes + 1.0)
        Zs, Ps = np.meshgrid(zs, phi, indexing="ij")
        Ss = np.sqrt(1.0 - Zs**2)
        lab_x, lab_phi = geometry.to_lab(Ss * np.cos(Ps), Ss * np.sin(Ps), Zs)
        vals = rho(lab_x, lab_phi) * detection_weight(np.arccos(Zs), Ps, probe)
        parts.append(0.5 * w_phi * float(w @ vals.sum(axis=1)))
    n_up, n_down = parts
    n_tot = n_up + n_down
    if not n_tot > 0:
        raise ValueError(f"probe '{ProbePolarization(probe).value}' detects nothing: N_tot = {n_tot}")
    return OrientationRatio(n_up, n_tot)


def approx_ratio(cos_theta: float) -> float:
    """Estimate (1 + <cos t>)/2 of the up fraction."""
    if abs(cos_theta) > 1 + 1e-12:
        raise ValueError("|<cos theta>| must not exceed 1")
    return 0.5 * (1.0 + cos_theta)


@dataclass
class ScreenImage:
    """Cell-averaged screen density on an n x n raster covering [-1, 1]^2."""

    y: np.ndarray
    z: np.ndarray
    values: np.ndarray
    probe: ProbePolarization
    geometry: ScreenGeometry

    @property
    def cell_area(self) -> float:
        return float((self.y[1] - self.y[0]) * (self.z[1] - self.z[0]))

    def integral(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def upper_fraction(self) -> float:
        up = self.values[:, self.z > 0].sum() + 0.5 * self.values[:, self.z == 0].sum()
        return float(up / self.values.sum())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["y", "z", "P"])
            for i, yv in enumerate(self.y):
                for k, zv in enumerate(self.z):
                    out.writerow([f"{yv:.6f}", f"{zv:.6f}", f"{self.values[i, k]:.10e}"])


def screen_image(
    source: Union[RotorWavefunction, Density],
    probe,
    n: int = 128,
    sub: int = 6,
    degree: int | None = None,
    geometry: ScreenGeometry | None = None,
) -> ScreenImage:
    """Project the detected axis distribution onto the screen.

    P(y, z) = sum over x = +-sqrt(1 - y^2 - z^2) of rho w / |x|. Values are
    averages over each raster cell, so the inverse-square-root rim factor is
    integrated rather than sampled: along z at fixed y the substitution
    z = a sin(al), a = sqrt(1 - y^2), turns dz/|x| into d(al).
    """
    if n < MIN_RASTER:
        raise ValueError(f"raster {n}x{n} is too coarse; need at least {MIN_RASTER}x{MIN_RASTER}")
    rho, _, geometry = _as_density(source, degree, geometry)
    edges = np.linspace(-1.0, 1.0, n + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    h = edges[1] - edges[0]
    g, gw = leggauss(sub)
    # y nodes per column: shape (n, sub)
    ys = centers[:, None] + 0.5 * h * g[None, :]
    a = np.sqrt(np.clip(1.0 - ys**2, 0.0, None))
    safe = np.where(a > 0, a, 1.0)
    lo = np.arcsin(np.clip(edges[None, None, :-1] / safe[:, :, None], -1, 1))
    hi = np.arcsin(np.clip(edges[None, None, 1:] / safe[:, :, None], -1, 1))
    lo = np.where(a[:, :, None] > 0, lo, 0.0)
    hi = np.where(a[:, :, None] > 0, hi, 0.0)
    half = 0.5 * (hi - lo)  # (n, sub, n)
    al = 0.5 * (hi + lo)[..., None] + half[..., None] * g  # (n, sub, n, sub)
    Y = np.broadcast_to(ys[:, :, None, None], al.shape)
    A = a[:, :, None, None]
    Z = A * np.sin(al)
    Xabs = A * np.cos(al)
    integrand = np.zeros(al.shape)
    for sign in (1.0, -1.0):
        X = sign * Xabs
        lab_x, lab_phi = geometry.to_lab(X, Y, Z)
        integrand += rho(lab_x, lab_phi) * _weight_xyz(X, Z, probe)
    inner = (integrand * gw).sum(axis=-1) * half  # (n, sub, n): integral over z-cell
    cell = 0.5 * h * np.einsum("s,isk->ik", gw, inner)
    values = cell / h**2
    return ScreenImage(centers, centers.copy(), values, ProbePolarization(probe), geometry)
