"""Command-line front end.

Every command reads an INI run configuration (see :func:`load_config`),
expands the field matrix (all combinations of the listed dc strengths, tilt
angles, peak intensities and pulse widths) and writes one directory per
configuration hash under the output directory. Each directory holds the
configuration snapshot, plot-ready CSV tables and a ``summary.json``.

Example configuration::

    [molecule]
    ref = ocs

    [fields]
    e_max_vcm = 300
    beta_deg = 30
    i0_wcm2 = 5e11, 1e12
    fwhm_ns = 10

    [thermal]
    temperatures_k = 0.05:1.5:0.01
    j_cut = 9
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import itertools
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adiabatic import adiabatic_spectrum, rising_edge_times, projection_series
from .basis import StateLabel, block_for_label
from .fields import make_configuration
from .imaging import PROBES, ProbePolarization, approx_ratio
from .propagator import PropagationPlan, default_j_max, propagate_many
from .runner import StateCache, compute_states, config_hash
from .thermal import TruncationError, ensemble, ensemble_average, member_labels, weights
from .units import MoleculeSpec, load_molecule

logger = logging.getLogger("mixedfield")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    """Comma-separated numbers, or ``start:stop:step`` (stop included)."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(s) for s in text.split(":"))
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(n)]
    return [float(s) for s in text.split(",") if s.strip()]


def _labels(text: str) -> list[StateLabel]:
    return [StateLabel.parse(s) for s in text.split(";") if s.strip()]


@dataclass(frozen=True)
class FieldPoint:
    e_max: float
    beta_deg: float
    i0: float
    fwhm_ns: float
    ramp_ns: float
    tstart_tau: float


@dataclass
class RunConfig:
    """Validated contents of a run configuration file."""

    molecule: MoleculeSpec
    molecule_ref: str
    fields: list
    j_max: int | None = None
    dt_pulse: float = 0.04
    dt_ramp: float = 0.5
    stride: int = 2000
    norm_tol: float = 1e-8
    temperatures: list = field(default_factory=lambda: [round(0.05 * k, 10) for k in range(1, 31)])
    j_cut: int = 9
    max_deficit: float = 1e-6
    probes: tuple = PROBES
    states: list | None = None
    label: StateLabel | None = None
    mixture: dict = field(default_factory=dict)
    adiabatic_points: int = 200
    adiabatic_i_min: float = 1e8
    adiabatic_j: int = 4
    output: str = "runs"
    cache: str | None = None
    workers: int = 1

    def plan(self, point: FieldPoint) -> PropagationPlan:
        j_max = self.j_max if self.j_max is not None else default_j_max(point.i0)
        return PropagationPlan(
            j_max=j_max, dt_pulse=self.dt_pulse, dt_ramp=self.dt_ramp, stride=self.stride, norm_tol=self.norm_tol
        )

    def configuration(self, point: FieldPoint):
        return make_configuration(
            self.molecule, point.e_max, math.radians(point.beta_deg), point.i0, point.fwhm_ns, point.ramp_ns, point.tstart_tau
        )

    def snapshot(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        data["fields"] = [dataclasses.asdict(p) for p in self.fields]
        data["molecule"] = dataclasses.asdict(self.molecule)
        data["probes"] = [p.value for p in self.probes]
        data["states"] = None if self.states is None else [str(s) for s in self.states]
        data["label"] = None if self.label is None else str(self.label)
        data["mixture"] = {str(k): v for k, v in self.mixture.items()}
        data.pop("output")
        data.pop("cache")
        data.pop("workers")
        return data


def load_config(path=None, molecule=None, overrides: dict | None = None) -> RunConfig:
    """Parse an INI file into a :class:`RunConfig`; everything has a default."""
    ini = configparser.ConfigParser()
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"config file {path} not found")
        ini.read(path)
    for section, values in (overrides or {}).items():
        if not ini.has_section(section):
            ini.add_section(section)
        for k, v in values.items():
            ini.set(section, k, str(v))

    def get(section, key, default=None):
        return ini.get(section, key, fallback=default)

    try:
        ref = molecule or get("molecule", "ref", "ocs")
        mol = load_molecule(ref)
        matrix = {
            "e_max": _floats(get("fields", "e_max_vcm", "300")),
            "beta_deg": _floats(get("fields", "beta_deg", "0")),
            "i0": _floats(get("fields", "i0_wcm2", "1e12")),
            "fwhm_ns": _floats(get("fields", "fwhm_ns", "10")),
        }
        ramp = float(get("fields", "ramp_ns", "10"))
        tstart = float(get("fields", "tstart_tau", "3"))
        points = [FieldPoint(e, b, i, f, ramp, tstart) for e, b, i, f in itertools.product(*matrix.values())]
        jm = get("numerics", "j_max", "auto")
        probes = tuple(ProbePolarization(p.strip()) for p in get("imaging", "probes", "vertical, perpendicular, circular").split(","))
        states = get("states", "labels")
        label = get("project", "label")
        mixture = {}
        for item in (get("mixture", "states", "") or "").split(";"):
            if item.strip():
                lab, w = item.split(":")
                mixture[StateLabel.parse(lab)] = float(w)
        cfg = RunConfig(
            molecule=mol,
            molecule_ref=str(ref),
            fields=points,
            j_max=None if jm.strip() == "auto" else int(jm),
            dt_pulse=float(get("numerics", "dt_pulse_ps", "0.04")),
            dt_ramp=float(get("numerics", "dt_ramp_ps", "0.5")),
            stride=int(get("numerics", "stride", "2000")),
            norm_tol=float(get("numerics", "norm_tol", "1e-8")),
            temperatures=_floats(get("thermal", "temperatures_k", "0.05:1.5:0.05")),
            j_cut=int(get("thermal", "j_cut", "9")),
            max_deficit=float(get("thermal", "max_deficit", "1e-6")),
            probes=probes,
            states=None if states is None else _labels(states),
            label=None if label is None else StateLabel.parse(label),
            mixture=mixture,
            adiabatic_points=int(get("adiabatic", "points", "200")),
            adiabatic_i_min=float(get("adiabatic", "i_min_wcm2", "1e8")),
            adiabatic_j=int(get("adiabatic", "j_levels", "4")),
            output=get("run", "output", "runs"),
            cache=get("run", "cache"),
            workers=int(get("run", "workers", "1")),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not cfg.fields:
        raise ConfigError("the field matrix is empty")
    for p in cfg.fields:
        if p.e_max < 0 or p.i0 < 0 or p.fwhm_ns <= 0 or p.ramp_ns < 0:
            raise ConfigError(f"invalid field point {p}")
        try:
            cfg.configuration(p)  # switching-order checks
        except ValueError as exc:
            raise ConfigError(f"field point {p}: {exc}") from exc
    if cfg.j_max is not None and cfg.j_max < 1:
        raise ConfigError("j_max must be positive")
    if cfg.dt_pulse <= 0 or cfg.dt_ramp <= 0 or cfg.stride < 1:
        raise ConfigError("time steps and stride must be positive")
    if any(t < 0 for t in cfg.temperatures):
        raise ConfigError("temperatures must be non-negative")
    if cfg.j_cut < 0 or cfg.workers < 1:
        raise ConfigError("j_cut must be >= 0 and workers >= 1")
    if cfg.mixture and abs(sum(cfg.mixture.values()) - 1.0) > 1e-9:
        raise ConfigError("mixture weights must sum to 1")
    if cfg.states is not None and cfg.j_max is not None:
        for lab in cfg.states:
            if lab.J > cfg.j_max:
                raise ConfigError(f"state {lab} exceeds j_max = {cfg.j_max}")


class Run:
    """Output directory bookkeeping for one field point."""

    def __init__(self, cfg: RunConfig, point: FieldPoint, command: str):
        self.cfg = cfg
        self.point = point
        self.config = cfg.configuration(point)
        self.plan = cfg.plan(point)
        self.key = config_hash(cfg.molecule, self.config, self.plan)
        record = {"command": command, "field": dataclasses.asdict(point), "run": cfg.snapshot()}
        text = json.dumps(record, sort_keys=True)
        self.run_hash = hashlib.sha256(text.encode()).hexdigest()[:16]
        self.dir = Path(cfg.output) / f"{command}-{self.run_hash}"
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / "config.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
        self.t0 = time.perf_counter()
        self.summary = {"command": command, "config_hash": self.run_hash, "state_hash": self.key, "field": dataclasses.asdict(point)}
        self.converged = True

    @property
    def cache(self):
        root = self.cfg.cache if self.cfg.cache is not None else Path(self.cfg.output) / "cache"
        return StateCache(root)

    def states(self, labels):
        results = compute_states(labels, self.config, self.cfg.molecule, self.plan, self.cache, self.cfg.workers)
        bad = [str(lab) for lab, r in results.items() if not r.converged]
        if bad:
            self.converged = False
            logger.error("%d state(s) did not converge: %s", len(bad), ", ".join(bad))
        diag = self.summary.setdefault("diagnostics", {"max_norm_drift": 0.0, "unconverged": [], "j_max": self.plan.j_max})
        diag["max_norm_drift"] = max([diag["max_norm_drift"]] + [r.norm_drift for r in results.values()])
        diag["unconverged"] = sorted(set(diag["unconverged"]) | set(bad))
        return results

    def finish(self):
        self.summary["converged"] = self.converged
        self.summary["wall_time_s"] = round(time.perf_counter() - self.t0, 3)
        (self.dir / "summary.json").write_text(json.dumps(self.summary, indent=2, sort_keys=True) + "\n")
        print(self.dir)
        return self.converged


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        out.writerows(rows)


def _fmt(x) -> str:
    return f"{x:.10g}" if isinstance(x, float) else str(x)


def cmd_weights(cfg: RunConfig) -> bool:
    record = {
        "command": "weights",
        "molecule": dataclasses.asdict(cfg.molecule),
        "temperatures": cfg.temperatures,
        "j_cut": cfg.j_cut,
        "max_deficit": cfg.max_deficit,
    }
    text = json.dumps(record, sort_keys=True)
    out = Path(cfg.output) / f"weights-{hashlib.sha256(text.encode()).hexdigest()[:16]}"
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    rows = []
    deficits = {}
    for T in cfg.temperatures:
        if T == 0:
            continue
        try:
            table = weights(T, cfg.molecule, cfg.j_cut, cfg.max_deficit)
        except TruncationError as exc:
            raise ConfigError(str(exc)) from exc
        deficits[_fmt(T)] = table.deficit
        rows += [[_fmt(T), J, _fmt(float(w))] for J, w in enumerate(table.manifold)]
    _write_csv(out / "weights.csv", ["T_K", "J", "manifold_weight"], rows)
    summary = {"command": "weights", "truncation_deficit": deficits, "converged": True}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(out)
    return True


def _state_list(cfg: RunConfig, point: FieldPoint) -> list[StateLabel]:
    if cfg.states is not None:
        return list(cfg.states)
    return member_labels(cfg.j_cut, point.beta_deg != 0)


def cmd_state_table(cfg: RunConfig) -> bool:
    ok = True
    for point in cfg.fields:
        run = Run(cfg, point, "state-table")
        results = run.states(_state_list(cfg, point))
        header = ["J", "absM", "parity", "cos_theta", "cos2_theta"] + [f"ratio_{p.value}" for p in cfg.probes]
        header += [f"top{k}_{s}" for k in range(1, 6) for s in ("label", "pop")]
        rows = []
        for lab in sorted(results):
            r = results[lab]
            row = [lab.J, lab.absM, lab.parity, _fmt(r.cos_theta), _fmt(r.cos2_theta)]
            row += [_fmt(r.ratio(p)) for p in cfg.probes]
            for k in range(5):
                row += [str(r.top[k][0]), _fmt(r.top[k][1])] if k < len(r.top) else ["", ""]
            rows.append(row)
        _write_csv(run.dir / "states.csv", header, rows)
        run.summary["states"] = {str(lab): results[lab].to_json() for lab in sorted(results)}
        ok &= run.finish()
    return ok


def thermal_rows(cfg: RunConfig, point: FieldPoint, results) -> tuple[list, dict]:
    tilted = point.beta_deg != 0
    cos = {lab: r.cos_theta for lab, r in results.items()}
    ratio = {p: {lab: r.ratio(p) for lab, r in results.items()} for p in cfg.probes}
    rows = []
    for T in cfg.temperatures:
        ens = ensemble(T, cfg.molecule, cfg.j_cut, tilted, cfg.max_deficit)
        c = ensemble_average(ens, cos)
        rows.append([_fmt(T), _fmt(c), _fmt(approx_ratio(c))] + [_fmt(ensemble_average(ens, ratio[p])) for p in cfg.probes])
    header = ["T_K", "cos_theta", "approx_ratio"] + [f"ratio_{p.value}" for p in cfg.probes]
    return header, rows


def cmd_thermal_sweep(cfg: RunConfig) -> bool:
    ok = True
    for point in cfg.fields:
        run = Run(cfg, point, "thermal-sweep")
        try:
            for T in cfg.temperatures:
                if T > 0:
                    weights(T, cfg.molecule, cfg.j_cut, cfg.max_deficit)
        except TruncationError as exc:
            raise ConfigError(str(exc)) from exc
        results = run.states(member_labels(cfg.j_cut, point.beta_deg != 0))
        header, rows = thermal_rows(cfg, point, results)
        _write_csv(run.dir / "thermal.csv", header, rows)
        _write_csv(
            run.dir / "states.csv",
            ["J", "absM", "parity", "cos_theta"] + [f"ratio_{p.value}" for p in cfg.probes],
            [[lab.J, lab.absM, lab.parity, _fmt(results[lab].cos_theta)] + [_fmt(results[lab].ratio(p)) for p in cfg.probes] for lab in sorted(results)],
        )
        run.summary["thermal"] = {h: [r[k] for r in rows] for k, h in enumerate(header)}
        if cfg.mixture:
            run.summary["mixture"] = mixture_values(cfg, point, run)
        ok &= run.finish()
    return ok


def mixture_values(cfg: RunConfig, point: FieldPoint, run: Run) -> dict:
    results = run.states(sorted(cfg.mixture))
    out = {"cos_theta": sum(w * results[lab].cos_theta for lab, w in cfg.mixture.items())}
    for p in cfg.probes:
        out[f"ratio_{p.value}"] = sum(w * results[lab].ratio(p) for lab, w in cfg.mixture.items())
    return out


def cmd_mixture(cfg: RunConfig) -> bool:
    if not cfg.mixture:
        raise ConfigError("the [mixture] section needs 'states = J,M,p:weight; ...'")
    ok = True
    for point in cfg.fields:
        run = Run(cfg, point, "mixture")
        run.summary["mixture"] = mixture_values(cfg, point, run)
        ok &= run.finish()
    return ok


def cmd_project(cfg: RunConfig) -> bool:
    if cfg.label is None:
        raise ConfigError("the [project] section needs 'label = J,M,p'")
    ok = True
    for point in cfg.fields:
        run = Run(cfg, point, "project")
        levels = np.logspace(math.log10(cfg.adiabatic_i_min), math.log10(point.i0), cfg.adiabatic_points)
        times = tuple(float(t) for t in rising_edge_times(run.config.pulse, levels))
        plan = dataclasses.replace(run.plan, snapshot_times=times)
        traj = propagate_many([cfg.label], run.config, cfg.molecule, plan, strict=False)[cfg.label]
        records = projection_series(traj, run.config, cfg.molecule)
        block = traj.final.block
        shown = [lab for lab in block.labels if lab.J <= cfg.adiabatic_j]
        rows = []
        for rec, level in zip(records, levels):
            rows.append([_fmt(float(rec.time)), _fmt(float(level))] + [_fmt(rec.population(lab)) for lab in shown])
        _write_csv(run.dir / "projection.csv", ["t_ps", "I_Wcm2"] + [str(lab) for lab in shown], rows)
        traj.to_csv(run.dir / "trajectory.csv")
        final = records[-1]
        run.summary["label"] = str(cfg.label)
        run.summary["final_top"] = [[str(lab), p] for lab, p in final.top(5)]
        run.summary["cos_theta"] = float(traj.cos_theta[-1])
        run.summary["diagnostics"] = {"norm_drift": traj.norm_drift, "j_max": plan.j_max, "n_steps": traj.n_steps}
        run.converged = traj.norm_drift <= plan.norm_tol
        ok &= run.finish()
    return ok


def cmd_adiabatic_map(cfg: RunConfig) -> bool:
    for point in cfg.fields:
        run = Run(cfg, point, "adiabatic-map")
        beta = math.radians(point.beta_deg)
        levels = np.concatenate([[0.0], np.logspace(math.log10(cfg.adiabatic_i_min), math.log10(point.i0), cfg.adiabatic_points)])
        probe_labels = cfg.states if cfg.states is not None else member_labels(cfg.adiabatic_j, beta != 0)
        blocks = {}
        for lab in probe_labels:
            blocks.setdefault(block_for_label(lab, run.plan.j_max, beta), []).append(lab)
        rows = []
        for intensity in levels:
            row = [_fmt(float(intensity))]
            for block, labs in blocks.items():
                spec = adiabatic_spectrum(cfg.molecule, point.e_max, float(intensity), beta, block)
                for lab in labs:
                    v = spec.vector(lab)
                    row += [_fmt(spec.energy(lab)), _fmt(float(v @ _cos_op(block) @ v))]
            rows.append(row)
        header = ["I_Wcm2"] + [f"{s}_{lab}" for labs in blocks.values() for lab in labs for s in ("E_cm1", "cos")]
        _write_csv(run.dir / "adiabatic.csv", header, rows)
        run.finish()
    return True


def _cos_op(block):
    from .hamiltonian import cos_theta_matrix

    return cos_theta_matrix(block)


COMMANDS = {
    "weights": cmd_weights,
    "state-table": cmd_state_table,
    "thermal-sweep": cmd_thermal_sweep,
    "project": cmd_project,
    "adiabatic-map": cmd_adiabatic_map,
    "mixture": cmd_mixture,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedfield", description="Mixed-field orientation of thermal linear-rotor ensembles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "weights": "Boltzmann manifold weights over the temperature grid",
        "state-table": "per-state orientation, imaging ratios and adiabatic populations at the pulse peak",
        "thermal-sweep": "thermal orientation and imaging-ratio curves",
        "project": "populations of adiabatic states along the rising edge for one state",
        "adiabatic-map": "adiabatic energies and orientation versus intensity",
        "mixture": "orientation of an explicit state mixture",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("-c", "--config", help="INI run configuration")
        p.add_argument("-m", "--molecule", help="molecule preset name or key=value file")
        p.add_argument("-o", "--output", help="output directory")
        p.add_argument("-w", "--workers", type=int, help="worker processes for per-state jobs")
        p.add_argument("--cache", help="per-state result cache directory")
        p.add_argument("--j-max", help="basis cutoff (integer or 'auto')")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    run = {}
    if args.output:
        run["output"] = args.output
    if args.workers:
        run["workers"] = args.workers
    if args.cache:
        run["cache"] = args.cache
    overrides = {"run": run}
    if args.j_max:
        overrides["numerics"] = {"j_max": args.j_max}
    try:
        cfg = load_config(args.config, args.molecule, overrides)
        ok = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"mixedfield: configuration error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
