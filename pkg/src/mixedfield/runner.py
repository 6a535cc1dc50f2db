"""Per-state results at the pulse peak, with an on-disk cache.

A state result bundles what thermal averages and state tables need: the
orientation cosines, the imaging ratios for every probe, the largest adiabatic
populations and the convergence diagnostics of the propagation. Results are
keyed by a hash of everything that determines them, so a cache directory can
be shared between runs that differ only in temperature.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adiabatic import adiabatic_spectrum, project
from .basis import RotorWavefunction, StateLabel, block_for_label
from .fields import FieldConfiguration
from .imaging import PROBES, nup_ntot
from .observables import observables
from .propagator import PropagationPlan, propagate_many
from .units import MoleculeSpec

logger = logging.getLogger(__name__)

CACHE_VERSION = 2


@dataclass(frozen=True)
class StateResult:
    label: StateLabel
    cos_theta: float
    cos_theta_s: float
    cos2_theta: float
    ratios: dict
    norm_drift: float
    n_steps: int
    top: tuple
    converged: bool

    def ratio(self, probe) -> float:
        return self.ratios[getattr(probe, "value", probe)]

    def to_json(self) -> dict:
        return {
            "label": str(self.label),
            "cos_theta": self.cos_theta,
            "cos_theta_s": self.cos_theta_s,
            "cos2_theta": self.cos2_theta,
            "ratios": dict(self.ratios),
            "norm_drift": self.norm_drift,
            "n_steps": self.n_steps,
            "top": [[str(lab), p] for lab, p in self.top],
            "converged": self.converged,
        }

    @classmethod
    def from_json(cls, data: dict) -> "StateResult":
        return cls(
            label=StateLabel.parse(data["label"]),
            cos_theta=data["cos_theta"],
            cos_theta_s=data["cos_theta_s"],
            cos2_theta=data["cos2_theta"],
            ratios=dict(data["ratios"]),
            norm_drift=data["norm_drift"],
            n_steps=data["n_steps"],
            top=tuple((StateLabel.parse(s), p) for s, p in data["top"]),
            converged=data["converged"],
        )


def _physical(obj) -> dict:
    # 2000 and 2000.0 V/cm are the same run
    return {k: float(v) if isinstance(v, int) and not isinstance(v, bool) else v for k, v in dataclasses.asdict(obj).items()}


def _config_record(molecule, config, plan) -> dict:
    plan_rec = dataclasses.asdict(plan)
    plan_rec.pop("snapshot_times", None)
    return {
        "version": CACHE_VERSION,
        "molecule": _physical(molecule),
        "dc": _physical(config.dc),
        "pulse": _physical(config.pulse),
        "plan": plan_rec,
    }


def config_hash(molecule: MoleculeSpec, config: FieldConfiguration, plan: PropagationPlan) -> str:
    text = json.dumps(_config_record(molecule, config, plan), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class StateCache:
    """Directory of ``<config hash>/<label>.npz`` files."""

    def __init__(self, root):
        self.root = Path(root)

    def _path(self, key: str, label: StateLabel) -> Path:
        return self.root / key / f"{label}.npz"

    def get(self, key: str, label: StateLabel) -> StateResult | None:
        path = self._path(key, label)
        if not path.exists():
            return None
        with np.load(path) as data:
            return StateResult.from_json(json.loads(str(data["result"])))

    def put(self, key: str, result: StateResult, coeffs: np.ndarray) -> None:
        path = self._path(key, result.label)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, result=json.dumps(result.to_json(), sort_keys=True), coeffs=coeffs)
        os.replace(tmp, path)


def summarize(trajectory, config: FieldConfiguration, molecule: MoleculeSpec, plan: PropagationPlan, n_top: int = 5) -> StateResult:
    psi: RotorWavefunction = trajectory.final
    obs = observables(psi, config.beta)
    # screen normal to the dc field when tilted, laser plane otherwise
    ratios = {p.value: nup_ntot(psi, p).ratio for p in PROBES}
    spec = adiabatic_spectrum(molecule, config.dc.e_max, config.pulse.i0, config.beta, psi.block)
    top = tuple(project(psi, spec).top(n_top))
    return StateResult(
        label=trajectory.label,
        cos_theta=obs.cos_theta,
        cos_theta_s=obs.cos_theta_s,
        cos2_theta=obs.cos2_theta,
        ratios=ratios,
        norm_drift=trajectory.norm_drift,
        n_steps=trajectory.n_steps,
        top=top,
        converged=trajectory.norm_drift <= plan.norm_tol,
    )


def _job(args):
    labels, config, molecule, plan = args
    trajectories = propagate_many(labels, config, molecule, plan, strict=False)
    return [(summarize(trajectories[lab], config, molecule, plan), trajectories[lab].final.coeffs) for lab in labels]


def _chunks(labels, config, plan, workers):
    groups: dict = {}
    for lab in labels:
        groups.setdefault(block_for_label(lab, plan.j_max, config.beta), []).append(lab)
    jobs = []
    for labs in groups.values():
        n = max(1, min(len(labs), workers))
        for k in range(n):
            part = labs[k::n]
            if part:
                jobs.append(part)
    return jobs


def compute_states(
    labels,
    config: FieldConfiguration,
    molecule: MoleculeSpec,
    plan: PropagationPlan,
    cache: StateCache | str | os.PathLike | None = None,
    workers: int = 1,
) -> dict[StateLabel, StateResult]:
    """Results at t = 0 for every label, reusing cached ones.

    Propagation failures do not raise; they come back with ``converged=False``.
    """
    if cache is not None and not isinstance(cache, StateCache):
        cache = StateCache(cache)
    key = config_hash(molecule, config, plan)
    labels = list(dict.fromkeys(labels))
    results: dict[StateLabel, StateResult] = {}
    todo = []
    for lab in labels:
        hit = cache.get(key, lab) if cache is not None else None
        if hit is not None:
            results[lab] = hit
        else:
            todo.append(lab)
    if todo:
        jobs = [(part, config, molecule, plan) for part in _chunks(todo, config, plan, workers)]
        logger.info("computing %d state(s) in %d job(s), %d cached", len(todo), len(jobs), len(labels) - len(todo))
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outputs = list(pool.map(_job, jobs))
        else:
            outputs = [_job(job) for job in jobs]
        for out in outputs:
            for res, coeffs in out:
                results[res.label] = res
                if cache is not None:
                    cache.put(key, res, coeffs)
    return {lab: results[lab] for lab in labels}
