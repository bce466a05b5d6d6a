"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a PASS/FAIL line shown in the terminal summary.
"""

import math

import numpy as np
import pytest

from conftest import ACCEPTANCE
from optgen import io
from optgen.cli import main
from optgen.connection import (commutator_superoperator, penrose_residuals, pseudoinverse,
                               solve_connection)
from optgen.dynamics import DensityMatrix, StateVector, coherent_spin_state, oat_analytic
from optgen.multiparam import find_commuting_sets, uhlmann_curvature
from optgen.qfim import diagonalize, qfi_along, qfim_mixed, qfim_pure, qgt
from optgen.scenario import snapshot
from optgen.su_basis import (build_lie_basis, decompose_operator, enumerate_space,
                             killing_norm_table, su4_named_operators)

from oracles import brute_qfim, bures_qfim, spin_matrices

N = 20
TAT_PEAK = 146.44831644294862  # grid maximum from the first verified run
TAT_PEAK_T = 0.22776546738526002


def report(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def tat_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tat")
    assert main(["run", "--scenario", "tat", "--N", str(N), "--t-steps", "401",
                 "--out", str(out), "--outputs", "eigenvalues"]) == 0
    _, rows = io.read_csv(out / "trajectory_sorted.csv")
    return np.array(rows, dtype=float)


def test_criterion_01_oat_analytic(tmp_path):
    t_max = 1 / math.sqrt(N)
    assert main(["run", "--scenario", "oat", "--N", str(N), "--t-max", repr(t_max),
                 "--t-steps", "101", "--out", str(tmp_path)]) == 0
    _, rows = io.read_csv(tmp_path / "trajectory_sorted.csv")
    data = np.array(rows, dtype=float)
    F, _ = oat_analytic(N, data[:, 0])
    err = np.max(np.abs(data[:, 1] - F) / F)
    report(1, len(data) == 101 and err < 1e-8, f"max relative error {err:.2e} over 101 points")


def test_criterion_02_oat_boundaries(oat20):
    w0 = snapshot(oat20, 0.0)["eig"].eigenvalues
    w1 = snapshot(oat20, math.pi / 2)["eig"].eigenvalues
    ok0 = np.abs(w0 - [N, N, 0]).max() < 1e-8
    ok1 = np.max(np.abs(w1 - [N**2, N, N]) / [N**2, N, N]) < 1e-6
    report(2, ok0 and ok1, f"t=0 {np.round(w0, 10)}, t=pi/2 {np.round(w1, 8)}")


def test_criterion_03_oat_angle(oat20):
    ts = np.linspace(0.01, 0.5, 50) / math.sqrt(N)
    worst_x, worst_angle = 0.0, 0.0
    for t in ts:
        v = snapshot(oat20, t)["eig"].vectors[:, 0]
        v = v * np.sign(v[1])
        _, delta = oat_analytic(N, t)
        worst_x = max(worst_x, abs(v[0]))
        worst_angle = max(worst_angle, abs(math.atan2(v[2], v[1]) - delta))
    report(3, worst_x < 1e-6 and worst_angle < 1e-6,
           f"max |Jx coeff| {worst_x:.1e}, max angle error {worst_angle:.1e} rad")


def test_criterion_04_tat_initial_degeneracy(tat_run):
    lam = tat_run[0, 1:16]
    top = np.abs(lam[:6] - N).max()
    rest = np.abs(lam[6:]).max()
    report(4, top < 1e-8 and rest < 1e-8 * N**2,
           f"max |lambda_1..6 - N| {top:.1e}, max |lambda_7..15| {rest:.1e}")


def test_criterion_05_tat_peak(tat_run):
    t, lam = tat_run[:, 0], tat_run[:, 1]
    k = int(np.argmax(lam))
    peak, t_peak = lam[k], t[k] * math.sqrt(N)
    ok = (rel(peak, 146) <= 0.02 and 0.5 <= t_peak <= 1.5
          and rel(peak, TAT_PEAK) < 1e-9 and abs(t[k] - TAT_PEAK_T) < 1e-12)
    report(5, ok, f"peak {peak:.6f} ({peak / N**2:.4f} N^2) at t*sqrt(N) = {t_peak:.4f}")


def test_criterion_06_tat_commuting_triple(tat20, tat20_quarter):
    eig = tat20_quarter["eig"]
    lam = eig.eigenvalues / N**2
    want = {1: 0.307, 3: 0.189, 8: 0.117}
    errs = {r: rel(lam[r - 1], v) for r, v in want.items()}
    sets = find_commuting_sets(eig, tat20.basis)
    triple = next((s for s in sets if {1, 3, 8} <= set(s.ranks)), None)
    ok = max(errs.values()) < 0.005 and triple is not None
    detail = f"lambda_1,3,8 / N^2 = {lam[0]:.4f}, {lam[2]:.4f}, {lam[7]:.4f}"
    if triple is not None:
        idx = [triple.ranks.index(r) for r in (1, 3, 8)]
        u = uhlmann_curvature(tat20_quarter["state"], [triple.generators[i] for i in idx])
        umax = np.abs(u.matrix).max()
        ok = ok and triple.max_pairwise_commutator < 1e-8 and umax < 1e-6 * eig.eigenvalues[0]
        detail += (f"; set {triple.ranks} commutator {triple.max_pairwise_commutator:.1e},"
                   f" Uhlmann max {umax:.1e}")
    report(6, ok, detail)


def test_criterion_07_physical_directions(tat20, tat20_quarter):
    b = tat20.basis
    psi = tat20_quarter["state"]
    mxy = (b.unit_vector("Mx") + b.unit_vector("My")) / math.sqrt(2)
    kz = decompose_operator(b, su4_named_operators(b.space)["Kz"]).coefficients
    kz = kz / np.linalg.norm(kz)
    rank8 = tat20_quarter["eig"].vectors[:, 7]
    got = [qfi_along(psi, v, b) / N**2 for v in (mxy, kz, rank8)]
    want = [0.300, 0.195, 0.117]
    err = max(rel(g, w) for g, w in zip(got, want))
    report(7, err < 0.005, "QFI / N^2 = " + ", ".join(f"{g:.4f}" for g in got))


def test_criterion_08_basis_suite():
    failures = {"count": [], "trace": [], "gram": [], "spectrum": []}
    for n in range(2, 6):
        for NN in range(1, 9):
            b = build_lie_basis(enumerate_space(n, NN))
            D = b.space.dim
            if len(b) != n * n - 1:
                failures["count"].append((n, NN))
            if any(abs(g.trace()) >= 1e-10 * D for g in b):
                failures["trace"].append((n, NN))
            if np.abs(b.gram() - b.norm_c * np.eye(len(b))).max() > 1e-10 * b.norm_c:
                failures["gram"].append((n, NN))
            ref = b[0].spectrum()
            odd = [g.label for g in b if not np.allclose(g.spectrum(), ref, atol=1e-9, rtol=0)]
            if odd:
                failures["spectrum"].append((n, NN, *odd))
    table = killing_norm_table(range(2, 6), range(1, 9))
    print("Killing norm: n N numeric closed_form agree")
    for r in table:
        print(f"  {r['n']} {r['N']} {r['numeric']:.6g} {r['closed_form']:.6g} {r['agree']}")
    agree = [(r["n"], r["N"]) for r in table if r["agree"]]
    bad = {k: v for k, v in failures.items() if v}
    detail = (f"closed-form norm agrees only at {agree}; "
              + ("all checks hold" if not bad else
                 "; ".join(f"{k} fails for {len(v)} of 32 (e.g. {v[0]})" for k, v in bad.items())))
    report(8, not bad, detail)


def test_criterion_09_geometry_consistency():
    rng = np.random.default_rng(9)
    worst = 0.0
    for n, NN in ((2, 6), (4, 4)):
        sp = enumerate_space(n, NN)
        b = build_lie_basis(sp)
        for _ in range(50):
            v = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
            psi = StateVector.normalized(v, sp)
            worst = max(worst, np.abs(qfim_pure(psi, b).matrix - qgt(psi, b).metric).max())
    report(9, worst < 1e-9, f"max |F - 4 Re Q| {worst:.1e} over 100 states")


def test_criterion_10_connection_suite():
    rng = np.random.default_rng(10)
    b = build_lie_basis(enumerate_space(2, 4))
    worst_fid, worst_penrose = 0.0, 0.0
    for _ in range(100):
        u, v = rng.normal(size=3), rng.normal(size=3)
        g = b.combination(u / np.linalg.norm(u))
        z = b.combination(v / np.linalg.norm(v))
        worst_fid = max(worst_fid, solve_connection(g, z, b).connection_fidelity)
        sup = 1j * commutator_superoperator(g.dense())
        worst_penrose = max(worst_penrose, *penrose_residuals(sup, pseudoinverse(sup)))
    same = solve_connection(b["Jz"], b["Jz"], b).sylvester_residual
    ok = worst_fid < 1e-6 and worst_penrose < 1e-8 and same > 1e-3
    report(10, ok, f"max fidelity {worst_fid:.1e}, max Penrose residual {worst_penrose:.1e},"
                   f" G=Z residual {same:.3f}")


def test_criterion_11_witness_calibration():
    rng = np.random.default_rng(11)
    sp = enumerate_space(2, N)
    b = build_lie_basis(sp)
    css = [diagonalize(qfim_pure(coherent_spin_state(sp, th, ph), b)).eigenvalues[0]
           for th, ph in zip(rng.uniform(0, math.pi, 20), rng.uniform(0, 2 * math.pi, 20))]
    amps = np.zeros(sp.dim, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    noon = diagonalize(qfim_pure(StateVector(amps, sp), b)).eigenvalues[0]
    randoms = []
    for _ in range(20):
        v = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
        randoms.append(diagonalize(qfim_pure(StateVector.normalized(v, sp), b)).eigenvalues[0])
    tested = css + [noon] + randoms
    css_err = max(abs(x - N) for x in css)
    ok = css_err < 1e-8 and abs(noon - N**2) < 1e-8 and max(tested) <= N**2 * (1 + 1e-6)
    report(11, ok, f"CSS max |lambda - N| {css_err:.1e}, NOON lambda {noon:.10f},"
                   f" max over {len(tested)} states {max(tested):.4f}")


def test_criterion_12_oracles():
    rng = np.random.default_rng(12)
    worst = 0.0
    for NN in (1, 2, 3):
        sp = enumerate_space(2, NN)
        b = build_lie_basis(sp)
        ops = spin_matrices(NN)
        for _ in range(10):
            v = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
            psi = StateVector.normalized(v, sp)
            worst = max(worst, np.abs(qfim_pure(psi, b).matrix - brute_qfim(psi.amplitudes, ops)).max())
    sp = enumerate_space(2, 4)
    b = build_lie_basis(sp)
    rho = DensityMatrix.depolarized(coherent_spin_state(sp, math.pi / 2, 0.0), 0.01)
    bures = np.abs(qfim_mixed(rho, b).matrix - bures_qfim(rho.matrix, [g.dense() for g in b])).max()
    report(12, worst < 1e-10 and bures < 1e-5,
           f"brute-force max diff {worst:.1e}, Bures finite-difference max diff {bures:.1e}")
