"""Command-line entry point.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import io
from .connection import CONNECTED_TOL, solve_connection
from .dynamics import evolve
from .errors import (ConfigError, NumericalError, OptgenError, ResourceError,
                     SpectrumMismatchError)
from .multiparam import COMMUTE_TOL
from .qfim import qfi_along
from .scenario import (ScenarioConfig, commuting_report, prepare, run_scenario, snapshot,
                       thread_count)
from .su_basis import build_lie_basis, enumerate_space

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
SUBCOMMANDS = ("run", "basis-dump", "evolve", "qfim-at", "connect", "commuting-sets")

# inline flag -> config field
_SCENARIO_FLAGS = {"scenario": "scenario", "n": "n", "N": "N", "chi": "chi", "t_max": "t_max",
                   "t_steps": "t_steps", "format": "format", "out": "output_dir",
                   "outputs": "outputs", "commuting_times": "commuting_times",
                   "commute_tol": "commute_tol", "hamiltonian_file": "hamiltonian_file",
                   "seed": "seed"}


def _scenario_args(p, grid=True):
    p.add_argument("--config", "--input", dest="config", help="JSON scenario configuration")
    p.add_argument("--scenario", choices=("oat", "tat", "custom"))
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--chi", type=float)
    p.add_argument("--hamiltonian-file", help="operator JSON for the custom scenario")
    if grid:
        p.add_argument("--t-max", type=float)
        p.add_argument("--t-steps", type=int)
    p.add_argument("--seed", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="optgen",
        description="Optimal generators of quantum Fisher information for symmetric SU(n) probes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write trajectory tables")
    _scenario_args(p)
    p.add_argument("--format", choices=("csv", "json", "both"))
    p.add_argument("--out", "--output", dest="out", help="output directory")
    p.add_argument("--outputs", nargs="+", help="eigenvalues leading_vector commuting_sets qgt")
    p.add_argument("--commuting-times", type=float, nargs="+")
    p.add_argument("--commute-tol", type=float)

    p = sub.add_parser("basis-dump", help="write the su(n) basis as binary matrices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--output", "--out", dest="output", required=True, help="output directory")

    p = sub.add_parser("evolve", help="basis expectation values along a time grid")
    _scenario_args(p)
    p.add_argument("--output", "--out", dest="output", required=True)

    p = sub.add_parser("qfim-at", help="QFIM and its eigensystem at one time")
    _scenario_args(p, grid=False)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--qgt", action="store_true", help="include the quantum geometric tensor")
    p.add_argument("--random-directions", type=int, default=0,
                   help="also check this many random unit directions against lambda_max")
    p.add_argument("--output", "--out", dest="output")

    p = sub.add_parser("connect", help="solve i[R, G] = Z for a unitary connection")
    p.add_argument("--generator-file", help="operator JSON for G")
    p.add_argument("--target-file", help="operator JSON for Z")
    p.add_argument("--input", help="JSON with 'generator' and 'target' operator documents")
    p.add_argument("--connected-tol", type=float, default=CONNECTED_TOL)
    p.add_argument("--no-refine", action="store_true", help="keep the raw Sylvester solution")
    p.add_argument("--output", "--out", dest="output")

    p = sub.add_parser("commuting-sets", help="commuting sets of QFIM eigen-generators")
    _scenario_args(p, grid=False)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--commute-tol", type=float, default=COMMUTE_TOL)
    p.add_argument("--min-qfi", type=float)
    p.add_argument("--output", "--out", dest="output")
    return parser


def config_from_args(args, **extra):
    base = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
        if not isinstance(base, dict):
            raise ConfigError("config", "top level must be an object")
    for flag, fieldname in _SCENARIO_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            base[fieldname] = value
    base.update(extra)
    return ScenarioConfig.from_mapping(base)


def _emit(doc, output, schema):
    if output:
        io.write_json(output, doc, schema)
    else:
        io.validate(doc, schema)
        print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_run(args):
    config = config_from_args(args)
    for path in run_scenario(config):
        print(path)


def cmd_basis_dump(args):
    basis = build_lie_basis(enumerate_space(args.n, args.N))
    print(io.write_basis_dump(basis, args.output))


def cmd_evolve(args):
    config = config_from_args(args, output_dir=str(Path(args.output).parent))
    setup = prepare(config)
    times = config.times()
    res = evolve(setup.hamiltonian, setup.probe, times, workers=thread_count())
    exps = [[float(g.expectation(s.amplitudes).real) for g in setup.basis] for s in res.states]
    doc = {"schema_version": io.SCHEMA_VERSION, "scenario": config.scenario, "n": config.n,
           "N": config.N, "chi": config.chi, "times": times.tolist(),
           "labels": list(setup.basis.labels), "expectations": exps,
           "norm_error": [abs(float(np.linalg.norm(s.amplitudes)) - 1.0) for s in res.states]}
    _emit(doc, args.output, "evolution")


def cmd_qfim_at(args):
    if not math.isfinite(args.t) or args.t < 0:
        raise ConfigError("t", f"must be finite and non-negative, got {args.t!r}")
    config = config_from_args(args)
    setup = prepare(config)
    snap = snapshot(setup, args.t, with_qgt=args.qgt)
    eig = snap["eig"]
    doc = {"schema_version": io.SCHEMA_VERSION, "scenario": config.scenario, "n": config.n,
           "N": config.N, "chi": config.chi, "t": args.t, "labels": list(setup.basis.labels),
           "qfim": snap["qfim"].matrix.tolist(), "eigenvalues": eig.eigenvalues.tolist(),
           "eigenvectors": eig.vectors.T.tolist(),
           "degeneracy_groups": [[k + 1 for k in g] for g in eig.degeneracy_groups]}
    if args.qgt:
        doc["qgt"] = {"re": snap["qgt"].real.tolist(), "im": snap["qgt"].imag.tolist()}
    if args.random_directions:
        rng = np.random.default_rng(config.seed)
        lam = float(eig.eigenvalues[0])
        worst = -math.inf
        for _ in range(args.random_directions):
            v = rng.normal(size=len(setup.basis))
            v /= np.linalg.norm(v)
            worst = max(worst, qfi_along(snap["state"], v, setup.basis))
        if worst > lam * (1 + 1e-9):
            raise NumericalError(f"random direction QFI {worst} exceeds lambda_max {lam}")
        print(f"random directions: max QFI {worst:.17g} <= lambda_max {lam:.17g}", file=sys.stderr)
    _emit(doc, args.output, "qfim_snapshot")


def _load_pair(args):
    if args.input:
        doc = io.read_json(args.input)
        try:
            gdoc, zdoc = doc["generator"], doc["target"]
        except (KeyError, TypeError):
            raise ConfigError("input", "expected 'generator' and 'target' entries") from None
    elif args.generator_file and args.target_file:
        gdoc, zdoc = io.read_json(args.generator_file), io.read_json(args.target_file)
    else:
        raise ConfigError("input", "give --generator-file and --target-file, or --input")
    g, basis = io.operator_from_json(gdoc)
    z, _ = io.operator_from_json(zdoc, basis)
    if z.space != g.space:
        raise ConfigError("target", "generator and target live on different spaces")
    return g, z, basis


def cmd_connect(args):
    g, z, basis = _load_pair(args)
    sol = solve_connection(g, z, basis, refine=not args.no_refine)
    dec = sol.r_coefficients
    doc = {"schema_version": io.SCHEMA_VERSION, "n": basis.n, "N": basis.N,
           "generator_label": g.label, "target_label": z.label, "method": sol.method,
           "rank": sol.rank, "scale": sol.scale, "sylvester_residual": sol.sylvester_residual,
           "connection_fidelity": sol.connection_fidelity, "raw_fidelity": sol.raw_fidelity,
           "discarded_antihermitian": sol.discarded_antihermitian,
           "connected": sol.connection_fidelity <= args.connected_tol,
           "connected_tol": args.connected_tol,
           "r_coefficients": dict(zip(basis.labels, map(float, dec.coefficients))),
           "r_identity_part": float(dec.identity_part), "r_residual": dec.residual}
    _emit(doc, args.output, "connection")


def cmd_commuting_sets(args):
    if any(not math.isfinite(t) or t < 0 for t in args.t):
        raise ConfigError("t", "times must be finite and non-negative")
    config = config_from_args(args)
    setup = prepare(config)
    snaps = [commuting_report(setup, snapshot(setup, t), args.commute_tol, args.min_qfi)
             for t in args.t]
    doc = {"schema_version": io.SCHEMA_VERSION, "scenario": config.scenario, "n": config.n,
           "N": config.N, "chi": config.chi, "commute_tol": args.commute_tol,
           "min_qfi": float(args.min_qfi if args.min_qfi is not None else config.N),
           "labels": list(setup.basis.labels), "snapshots": snaps}
    _emit(doc, args.output, "commuting_sets")


COMMANDS = {"run": cmd_run, "basis-dump": cmd_basis_dump, "evolve": cmd_evolve,
            "qfim-at": cmd_qfim_at, "connect": cmd_connect, "commuting-sets": cmd_commuting_sets}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    # bare scenario flags mean "run"
    if argv and argv[0].startswith("-") and argv[0] not in ("-h", "--help"):
        argv.insert(0, "run")
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ResourceError, SpectrumMismatchError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except jsonschema.ValidationError as exc:
        print(f"schema validation failed: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError, ValueError, OptgenError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
