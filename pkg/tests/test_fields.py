import math

import numpy as np
import pytest

from mixedfield.fields import DcSchedule, FieldConfiguration, GaussianPulse, dc_field_at, intensity_at, make_configuration
from mixedfield.units import OCS


def test_gaussian_fwhm():
    pulse = GaussianPulse(1e12, 10.0)
    half = pulse.fwhm_ns * 1000 / 2
    assert intensity_at(pulse, half) == pytest.approx(0.5e12, rel=1e-12)
    assert intensity_at(pulse, 0.0) == 1e12
    assert pulse.sigma == pytest.approx(10000 / (2 * math.sqrt(2 * math.log(2))))


def test_pulse_switched_on_at_start():
    pulse = GaussianPulse(1e12, 1.0)
    assert pulse.t_start == -3000.0
    assert intensity_at(pulse, -3000.1) == 0.0
    assert intensity_at(pulse, -3000.0) > 0.0


def test_pulse_validation():
    with pytest.raises(ValueError):
        GaussianPulse(-1.0, 1.0)
    with pytest.raises(ValueError):
        GaussianPulse(1.0, 0.0)
    with pytest.raises(ValueError):
        GaussianPulse(1.0, 1.0, t_start=5.0)


def test_dc_ramp():
    dc = DcSchedule(300.0, 0.0, 100.0, -200.0)
    assert dc_field_at(dc, -300.0) == 0.0
    assert dc_field_at(dc, -150.0) == pytest.approx(150.0)
    assert dc_field_at(dc, -100.0) == 300.0
    assert dc_field_at(dc, 0.0) == 300.0
    with pytest.raises(ValueError):
        DcSchedule(-1.0, 0.0, 1.0, 0.0)


def test_standard_configuration():
    cfg = make_configuration(OCS, 300.0, math.radians(30), 1e12, 10.0)
    assert cfg.dc.ramp_end == pytest.approx(cfg.pulse.t_start)
    assert cfg.pulse.t_start == -30000.0
    assert cfg.t_begin == -40000.0
    assert cfg.beta == pytest.approx(math.radians(30))
    e, i = cfg.fields_at(-35000.0)
    assert e == pytest.approx(150.0) and i == 0.0


def test_configuration_checks():
    # pulse switched on during the ramp
    bad = FieldConfiguration(DcSchedule(300.0, 0.0, 1000.0, -3500.0), GaussianPulse(1e12, 1.0))
    with pytest.raises(ValueError, match="after the pulse"):
        bad.check(OCS)
    # pulse switched on too late (laser already comparable to the dc coupling)
    with pytest.raises(ValueError, match="not negligible"):
        make_configuration(OCS, 300.0, 0.0, 1e12, 10.0, tstart_multiple_of_tau=1.0)
