"""Field schedules: linear dc ramp with plateau, Gaussian nonresonant pulse.

Times are in ps with the pulse peak at t = 0. The dc ramp ends when the pulse
is switched on, so the laser always acts on an already dc-dressed state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .units import MoleculeSpec, laser_energy_scale, stark_energy_scale

NS = 1000.0  # ps per ns
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class DcSchedule:
    """dc field rising linearly from 0 at ``ramp_start`` to ``e_max`` (V/cm)."""

    e_max: float
    beta: float
    ramp_duration: float
    ramp_start: float

    def __post_init__(self):
        if self.e_max < 0:
            raise ValueError("dc field strength must be non-negative")
        if self.ramp_duration < 0:
            raise ValueError("ramp duration must be non-negative")

    @property
    def ramp_end(self) -> float:
        return self.ramp_start + self.ramp_duration


@dataclass(frozen=True)
class GaussianPulse:
    """I(t) = I0 exp(-t^2 / 2 sigma^2) for t >= t_start, zero before.

    ``fwhm_ns`` is the intensity FWHM in ns; ``t_start`` is in ps and defaults
    to three FWHM before the peak.
    """

    i0: float
    fwhm_ns: float
    t_start: float | None = None

    def __post_init__(self):
        if self.i0 < 0:
            raise ValueError("peak intensity must be non-negative")
        if not self.fwhm_ns > 0:
            raise ValueError("pulse FWHM must be positive")
        if self.t_start is None:
            object.__setattr__(self, "t_start", -3.0 * self.fwhm_ns * NS)
        if self.t_start > 0:
            raise ValueError("the pulse must be switched on before its peak")

    @property
    def sigma_ns(self) -> float:
        return self.fwhm_ns / FWHM_PER_SIGMA

    @property
    def sigma(self) -> float:
        """sigma in ps."""
        return self.sigma_ns * NS


def intensity_at(pulse: GaussianPulse, t: float) -> float:
    if t < pulse.t_start:
        return 0.0
    return pulse.i0 * math.exp(-(t * t) / (2.0 * pulse.sigma**2))


def dc_field_at(dc: DcSchedule, t: float) -> float:
    if t <= dc.ramp_start:
        return 0.0
    if t >= dc.ramp_end:
        return dc.e_max
    return dc.e_max * (t - dc.ramp_start) / dc.ramp_duration


@dataclass(frozen=True)
class FieldConfiguration:
    dc: DcSchedule
    pulse: GaussianPulse

    @property
    def beta(self) -> float:
        return self.dc.beta

    @property
    def t_begin(self) -> float:
        return self.dc.ramp_start

    def fields_at(self, t: float) -> tuple[float, float]:
        return dc_field_at(self.dc, t), intensity_at(self.pulse, t)

    def check(self, molecule: MoleculeSpec, ratio: float = 1e-4) -> None:
        """Validate the switching order: pulse turn-on after the dc plateau,
        and the laser coupling at turn-on negligible against the dc coupling."""
        if self.dc.ramp_end > self.pulse.t_start + 1e-9:
            raise ValueError(
                f"dc ramp ends at {self.dc.ramp_end} ps, after the pulse turn-on at {self.pulse.t_start} ps"
            )
        w_laser = laser_energy_scale(abs(molecule.delta_alpha), intensity_at(self.pulse, self.pulse.t_start))
        w_dc = stark_energy_scale(molecule.mu, self.dc.e_max)
        if w_laser > ratio * w_dc:
            raise ValueError(
                f"laser coupling at turn-on ({w_laser:.3e} cm^-1) is not negligible against "
                f"the dc coupling ({w_dc:.3e} cm^-1); switch the pulse on earlier"
            )


def make_configuration(
    molecule: MoleculeSpec,
    e_max: float,
    beta: float,
    i0: float,
    fwhm_ns: float,
    ramp_ns: float = 10.0,
    tstart_multiple_of_tau: float = 3.0,
) -> FieldConfiguration:
    """Standard schedule: ramp, then pulse switched on at -k*tau, peak at 0.

    ``beta`` is in radians.
    """
    pulse = GaussianPulse(i0, fwhm_ns, -tstart_multiple_of_tau * fwhm_ns * NS)
    dc = DcSchedule(e_max, beta, ramp_ns * NS, pulse.t_start - ramp_ns * NS)
    config = FieldConfiguration(dc, pulse)
    config.check(molecule)
    return config
