import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedfield.basis import StateLabel
from mixedfield.thermal import (
    TruncationError,
    ensemble,
    ensemble_average,
    member_labels,
    thermal_curve,
    threshold_temperature,
    weights,
)
from mixedfield.units import KB_CM1_PER_K, OCS


def direct_manifold(T, J, j_cut=60):
    """Untruncated Boltzmann manifold population by brute-force summation."""
    z = sum((2 * j + 1) * math.exp(-j * (j + 1) * OCS.B / (KB_CM1_PER_K * T)) for j in range(j_cut))
    return (2 * J + 1) * math.exp(-J * (J + 1) * OCS.B / (KB_CM1_PER_K * T)) / z


@pytest.mark.parametrize("T", [0.1, 0.46, 1.0, 2.0])
def test_weights_against_direct_sum(T):
    table = weights(T, OCS, j_cut=14)
    for J in range(5):
        assert table.manifold[J] == pytest.approx(direct_manifold(T, J), rel=1e-9)
    assert table.deficit < 1e-6


def test_weights_properties():
    table = weights(0.8, OCS)
    assert np.all(table.per_state > 0)
    assert np.all(np.diff(table.per_state) < 0)
    assert table.manifold.sum() == pytest.approx(1.0, abs=1e-14)


def test_crossover_of_j0_and_j1():
    ts = np.linspace(0.4, 0.8, 81)
    diff = [weights(T, OCS).manifold[1] - weights(T, OCS).manifold[0] for T in ts]
    assert diff[0] < 0 < diff[-1]


def test_truncation_error():
    with pytest.raises(TruncationError, match="increase j_cut"):
        weights(2.0, OCS, j_cut=3)
    table = weights(0.7, OCS, j_cut=5, max_deficit=1e-4)
    assert table.deficit < 1e-4
    with pytest.raises(ValueError):
        weights(0.0, OCS)


def test_ensemble_members():
    tilted = ensemble(0.3, OCS, j_cut=3, tilted=True)
    parallel = ensemble(0.3, OCS, j_cut=3, tilted=False)
    assert len(tilted.members) == 16
    assert len(parallel.members) == 10
    assert sum(w for _, w in tilted.members) == pytest.approx(1.0, abs=1e-6)
    assert sum(w for _, w in parallel.members) == pytest.approx(1.0, abs=1e-6)
    assert parallel.weight(StateLabel(2, 1)) == pytest.approx(2 * tilted.weight(StateLabel(2, 1, "o")))
    with pytest.raises(KeyError):
        parallel.weight(StateLabel(2, 1, "o"))
    assert member_labels(1, True) == [StateLabel(0, 0), StateLabel(1, 0), StateLabel(1, 1), StateLabel(1, 1, "o")]


def test_zero_temperature_is_ground_state():
    ens = ensemble(0.0, OCS)
    values = {StateLabel(0, 0): 0.42}
    assert ensemble_average(ens, values) == 0.42
    # and the T -> 0+ limit agrees
    full = {lab: (0.42 if lab.J == 0 else -1.0) for lab in member_labels(9, True)}
    assert ensemble_average(ensemble(0.02, OCS), full) == pytest.approx(0.42, abs=1e-10)


def test_missing_members():
    ens = ensemble(0.5, OCS, j_cut=4)
    with pytest.raises(KeyError):
        ensemble_average(ens, {StateLabel(0, 0): 1.0})
    # members below the weight floor may be omitted
    cold = ensemble(0.05, OCS, j_cut=4)
    vals = {lab: 1.0 for lab in member_labels(1, True)}
    assert ensemble_average(cold, vals) == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.5), st.integers(0, 2**31 - 1))
def test_average_is_convex_combination(T, seed):
    rng = np.random.default_rng(seed)
    labels = member_labels(9, True)
    vals = dict(zip(labels, rng.uniform(-1, 1, len(labels))))
    avg = ensemble_average(ensemble(T, OCS, 9, True), vals)
    assert min(vals.values()) - 1e-12 <= avg <= max(vals.values()) + 1e-12


def test_threshold_temperature():
    vals = {lab: 1.0 - 0.5 * lab.J for lab in member_labels(9, False)}

    def f(T):
        return thermal_curve([T], OCS, vals, tilted=False)[0]

    t = threshold_temperature(f, 0.7, 0.05, 2.0)
    assert f(t) == pytest.approx(0.7, abs=1e-6)
    assert threshold_temperature(f, -100, 0.05, 2.0) == 2.0
    assert threshold_temperature(f, 2.0, 0.05, 2.0) == 0.05
