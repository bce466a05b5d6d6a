"""Scenario runner: evolve a probe, diagonalize the QFIM along a time grid, emit tables."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .dynamics import HamiltonianSpec, Propagator, build_hamiltonian, default_probe, oat_analytic
from .errors import ConfigError
from .multiparam import COMMUTE_TOL, find_commuting_sets, uhlmann_curvature
from .qfim import diagonalize, qfim_pure, qgt, track_trajectory
from .su_basis import build_lie_basis, enumerate_space

SCENARIOS = ("oat", "tat", "custom")
OUTPUTS = ("eigenvalues", "leading_vector", "commuting_sets", "qgt")
FORMATS = ("csv", "json", "both")
SCENARIO_N = {"oat": 2, "tat": 4}
THREADS_ENV = "OPTGEN_THREADS"


@dataclass
class ScenarioConfig:
    scenario: str = "oat"
    n: int | None = None
    N: int = 20
    chi: float = 1.0
    t_max: float | None = None  # default pi / (2 chi)
    t_steps: int = 201
    outputs: tuple = ("eigenvalues", "leading_vector")
    output_dir: str = "out"
    format: str = "csv"
    commuting_times: tuple = ()
    commute_tol: float = COMMUTE_TOL
    hamiltonian_file: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n is None and self.scenario in SCENARIO_N:
            self.n = SCENARIO_N[self.scenario]
        if self.t_max is None and isinstance(self.chi, (int, float)) and self.chi > 0:
            self.t_max = math.pi / (2 * self.chi)
        self.outputs = tuple(self.outputs)
        self.commuting_times = tuple(float(t) for t in self.commuting_times)
        if self.scenario == "tat" and not self.commuting_times and "commuting_sets" in self.outputs:
            self.commuting_times = (math.pi / (4 * self.chi),)
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"must be one of {SCENARIOS}, got {self.scenario!r}")
        if not isinstance(self.n, int) or self.n < 2:
            raise ConfigError("n", f"must be an integer >= 2, got {self.n!r}")
        want = SCENARIO_N.get(self.scenario)
        if want is not None and self.n != want:
            raise ConfigError("n", f"scenario {self.scenario} requires n={want}, got {self.n}")
        if not isinstance(self.N, int) or self.N < 1:
            raise ConfigError("N", f"must be a positive integer, got {self.N!r}")
        if not (isinstance(self.chi, (int, float)) and math.isfinite(self.chi) and self.chi > 0):
            raise ConfigError("chi", f"must be a positive finite number, got {self.chi!r}")
        if not isinstance(self.t_steps, int) or self.t_steps < 2:
            raise ConfigError("t_steps", f"must be an integer >= 2, got {self.t_steps!r}")
        if not (isinstance(self.t_max, (int, float)) and math.isfinite(self.t_max) and self.t_max > 0):
            raise ConfigError("t_max", f"must be a positive finite number, got {self.t_max!r}")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise ConfigError("outputs", f"unknown entries {sorted(bad)}; allowed {OUTPUTS}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"must be one of {FORMATS}, got {self.format!r}")
        if any(not math.isfinite(t) or t < 0 for t in self.commuting_times):
            raise ConfigError("commuting_times", "times must be finite and non-negative")
        if self.scenario == "custom" and not self.hamiltonian_file:
            raise ConfigError("hamiltonian_file", "custom scenario needs a Hamiltonian operator file")

    @classmethod
    def from_mapping(cls, mapping):
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        return cls(**mapping)

    @classmethod
    def from_file(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        return cls.from_mapping(data)

    def times(self):
        return np.linspace(0.0, self.t_max, self.t_steps)


def thread_count():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"must be an integer, got {raw!r}") from None
    if k < 1:
        raise ConfigError(THREADS_ENV, f"must be >= 1, got {k}")
    return k


@dataclass
class Setup:
    space: object
    basis: object
    hamiltonian: object
    probe: object
    propagator: Propagator = field(repr=False)


def prepare(config):
    space = enumerate_space(config.n, config.N)
    basis = build_lie_basis(space)
    if config.scenario == "custom":
        op, _ = io.read_operator(config.hamiltonian_file, basis)
        spec = HamiltonianSpec("CUSTOM", config.chi, op.matrix)
    else:
        spec = HamiltonianSpec(config.scenario.upper(), config.chi)
    H = build_hamiltonian(spec, space)
    return Setup(space, basis, H, default_probe(space), Propagator(H))


def state_at(setup, t):
    return setup.probe if t == 0.0 else setup.propagator(setup.probe, t)


def _pmap(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def snapshot(setup, t, with_qgt=False):
    """QFIM, its eigensystem and optionally the QGT at time t."""
    psi = state_at(setup, t)
    q = qfim_pure(psi, setup.basis, tag=f"t={t!r}")
    out = {"t": t, "state": psi, "qfim": q, "eig": diagonalize(q)}
    if with_qgt:
        out["qgt"] = qgt(psi, setup.basis).matrix
    return out


def commuting_report(setup, snap, commute_tol=COMMUTE_TOL, min_qfi=None):
    eig = snap["eig"]
    sets = find_commuting_sets(eig, setup.basis, min_qfi=min_qfi, commute_tol=commute_tol)
    out = []
    for cs in sets:
        u = uhlmann_curvature(snap["state"], cs.generators).matrix
        out.append({
            "ranks": list(cs.ranks),
            "qfis": [float(x) for x in cs.qfis],
            "total_qfi": cs.total_qfi,
            "max_pairwise_commutator": float(cs.max_pairwise_commutator),
            "rotation_angles": {str(k + 1): float(a) for k, a in cs.rotation_angles.items()},
            "exceeds_cartan": bool(cs.exceeds_cartan),
            "coefficients": cs.coefficients.tolist(),
            "uhlmann_max_abs": float(np.abs(u).max(initial=0.0)),
        })
    return {"t": float(snap["t"]), "eigenvalues": eig.eigenvalues.tolist(), "sets": out}


def _group_sizes(eig):
    sizes = np.zeros(len(eig.eigenvalues), dtype=int)
    for g in eig.degeneracy_groups:
        sizes[list(g)] = len(g)
    return sizes


def _header(labels, m, with_coeffs):
    cols = ["t"] + [f"lambda_{k}" for k in range(1, m + 1)]
    if with_coeffs:
        cols += [f"coeff_{lab}_1" for lab in labels]
    return cols + [f"degeneracy_{k}" for k in range(1, m + 1)]


def run_scenario(config, workers=None):
    """Run the configured scenario and write its files; returns the written paths."""
    workers = thread_count() if workers is None else workers
    setup = prepare(config)
    basis = setup.basis
    labels = list(basis.labels)
    m = len(labels)
    times = config.times()
    want_qgt = "qgt" in config.outputs
    snaps = _pmap(lambda t: snapshot(setup, float(t), want_qgt), times, workers)
    eigs = [s["eig"] for s in snaps]
    tracked_vals, tracked_vecs = track_trajectory(eigs)

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    coeffs = "leading_vector" in config.outputs
    write_csv = config.format in ("csv", "both")
    write_json = config.format in ("json", "both") or want_qgt

    if write_csv and ("eigenvalues" in config.outputs or coeffs):
        rows_sorted, rows_tracked = [], []
        for t, eig, tv, tvec in zip(times, eigs, tracked_vals, tracked_vecs):
            sizes = _group_sizes(eig)
            row = [t, *eig.eigenvalues] + (list(eig.vectors[:, 0]) if coeffs else []) + list(sizes)
            rows_sorted.append(row)
            # degeneracy sizes follow the tracked slots
            tsizes = [sizes[int(np.argmin(np.abs(eig.eigenvalues - v)))] for v in tv]
            rows_tracked.append([t, *tv] + (list(tvec[:, 0]) if coeffs else []) + tsizes)
        header = _header(labels, m, coeffs)
        written.append(io.write_csv(out / "trajectory_sorted.csv", header, rows_sorted))
        written.append(io.write_csv(out / "trajectory_tracked.csv", header, rows_tracked))

    if write_json:
        records = []
        for s, tv in zip(snaps, tracked_vals):
            eig = s["eig"]
            rec = {
                "t": float(s["t"]),
                "eigenvalues": eig.eigenvalues.tolist(),
                "tracked_eigenvalues": [float(v) for v in tv],
                "leading_vector": eig.vectors[:, 0].tolist(),
                "degeneracy_groups": [[k + 1 for k in g] for g in eig.degeneracy_groups],
            }
            if want_qgt:
                rec["qgt"] = {"re": s["qgt"].real.tolist(), "im": s["qgt"].imag.tolist()}
            records.append(rec)
        doc = {"schema_version": io.SCHEMA_VERSION, "scenario": config.scenario, "n": config.n,
               "N": config.N, "chi": config.chi, "labels": labels, "records": records}
        written.append(io.write_json(out / "trajectory.json", doc, "trajectory"))

    if config.scenario == "oat":
        F, delta = oat_analytic(config.N, config.chi * times)
        written.append(io.write_csv(out / "oat_analytic.csv", ["t", "F_OAT", "delta"],
                                    zip(times, F, delta)))

    if "commuting_sets" in config.outputs and config.commuting_times:
        snaps_c = [snapshot(setup, t) for t in config.commuting_times]
        doc = {"schema_version": io.SCHEMA_VERSION, "scenario": config.scenario, "n": config.n,
               "N": config.N, "chi": config.chi, "commute_tol": config.commute_tol,
               "min_qfi": float(config.N), "labels": labels,
               "snapshots": [commuting_report(setup, s, config.commute_tol) for s in snaps_c]}
        written.append(io.write_json(out / "commuting_sets.json", doc, "commuting_sets"))

    manifest = {"schema_version": io.SCHEMA_VERSION, "config": asdict(config),
                "files": [p.name for p in written]}
    written.append(io.write_json(out / "run_manifest.json", manifest, "run_manifest"))
    return written
