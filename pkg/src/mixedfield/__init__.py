"""Mixed-field orientation of thermal ensembles of linear rotors.

A linear molecule in a weak dc field plus a strong nonresonant laser pulse is
propagated with a split-operator scheme on a Gauss-Legendre/Fourier grid,
starting from field-free rotational states. The package provides the
adiabatic spectra used to label the dressed states, the orientation and
alignment cosines, an ion-imaging model of the up/down fragment ratio and
Boltzmann averages over the initial states.
"""

__version__ = "0.1.0"

from .units import OCS, MoleculeSpec, load_molecule
from .basis import StateLabel, SymmetryBlock, RotorWavefunction, build_block, block_for_label, field_free_state
from .fields import DcSchedule, FieldConfiguration, GaussianPulse, make_configuration
from .hamiltonian import assemble_h
from .propagator import PropagationPlan, Trajectory, propagate, propagate_many
from .adiabatic import adiabatic_spectrum, find_avoided_crossing, project
from .observables import ObservableSet, expectation, observables
from .imaging import ProbePolarization, approx_ratio, nup_ntot, screen_image
from .thermal import ensemble, ensemble_average, threshold_temperature, weights
from .runner import StateResult, compute_states

__all__ = [
    "OCS",
    "MoleculeSpec",
    "load_molecule",
    "StateLabel",
    "SymmetryBlock",
    "RotorWavefunction",
    "build_block",
    "block_for_label",
    "field_free_state",
    "DcSchedule",
    "FieldConfiguration",
    "GaussianPulse",
    "make_configuration",
    "assemble_h",
    "PropagationPlan",
    "Trajectory",
    "propagate",
    "propagate_many",
    "adiabatic_spectrum",
    "find_avoided_crossing",
    "project",
    "ObservableSet",
    "expectation",
    "observables",
    "ProbePolarization",
    "approx_ratio",
    "nup_ntot",
    "screen_image",
    "ensemble",
    "ensemble_average",
    "threshold_temperature",
    "weights",
    "StateResult",
    "compute_states",
]
