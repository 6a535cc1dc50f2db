"""One rotational state through a dc ramp followed by a laser pulse.

The (2,0,e) state of OCS in a 300 V/cm field tilted by 30 degrees from the
laser polarization is driven by a short, moderately intense pulse. The
wavefunction is stored on the rising edge and projected on the
instantaneous adiabatic states. The dc splittings between the J = 2
sublevels are tiny, so already the weak leading edge of the pulse mixes them
and the state reaches the peak far from its adiabatic label.
"""

import numpy as np

from mixedfield.adiabatic import projection_series, rising_edge_times
from mixedfield.basis import StateLabel
from mixedfield.fields import intensity_at, make_configuration
from mixedfield.propagator import PropagationPlan, propagate
from mixedfield.units import OCS

label = StateLabel.parse("20e")
config = make_configuration(OCS, 300.0, np.radians(30), 1e11, fwhm_ns=1.0, ramp_ns=2.0)
probe_at = rising_edge_times(config.pulse, [1e7, 1e8, 1e9, 1e10, 1e11])
plan = PropagationPlan(j_max=24, snapshot_times=tuple(probe_at))

traj = propagate(label, config, OCS, plan)
print(f"{traj.n_steps} steps, norm drift {traj.norm_drift:.1e}")
print(f"<cos theta> at the pulse peak: {traj.cos_theta[-1]:+.4f}")

def rec_intensity(t):
    return intensity_at(config.pulse, t)


for rec in projection_series(traj, config, OCS):
    top = ", ".join(f"{lab} {p:.3f}" for lab, p in rec.top(3))
    print(f"t = {rec.time:9.1f} ps  I = {rec_intensity(rec.time):8.1e}   {top}")
